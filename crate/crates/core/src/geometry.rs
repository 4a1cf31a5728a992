//! Rigid-body poses, frame conventions and parametric camera models.
//!
//! Frame conventions used throughout the crate:
//!
//! * **robot / world**: X forward, Y left, Z up. Planar poses live in the XY plane.
//! * **camera**: Z along the optical axis, X to the right of the image, Y down the image.
//!
//! Pixel coordinates are `(u, v)` = (column, row). Integer coordinates address pixel
//! centres, so the continuous footprint of pixel `u` is `[u - 0.5, u + 0.5)`.
//!
//! Depth semantics differ by camera kind: a pinhole camera stores the optical-axis
//! depth (camera-frame `z`), fisheye and equirectangular cameras store Euclidean range
//! along the ray.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = Vector3<f64>;

const ORTHONORMAL_TOL: f64 = 1e-9;

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let wrapped = theta.rem_euclid(2.0 * PI);
    if wrapped > PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

/// Planar pose on the ground plane. `theta` is always kept in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawPose2D")]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Deserialize)]
struct RawPose2D {
    x: f64,
    y: f64,
    #[serde(default)]
    theta: f64,
}

impl From<RawPose2D> for Pose2D {
    fn from(raw: RawPose2D) -> Self {
        Pose2D::new(raw.x, raw.y, raw.theta)
    }
}

impl Default for Pose2D {
    fn default() -> Self {
        Self::origin()
    }
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn origin() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }

    /// `self ∘ other`: `other` expressed in `self`'s frame, mapped to the parent frame.
    pub fn compose(&self, other: &Pose2D) -> Pose2D {
        let (s, c) = self.theta.sin_cos();
        Pose2D::new(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )
    }

    pub fn inverse(&self) -> Pose2D {
        let (s, c) = self.theta.sin_cos();
        Pose2D::new(
            -(c * self.x + s * self.y),
            s * self.x - c * self.y,
            -self.theta,
        )
    }

    /// Pose of `other` expressed in the frame of `self`.
    pub fn relative(&self, other: &Pose2D) -> Pose2D {
        self.inverse().compose(other)
    }

    pub fn transform_point(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        (self.x + c * x - s * y, self.y + s * x + c * y)
    }

    pub fn distance(&self, other: &Pose2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Lifts the pose to a 3D transform (yaw about Z, translation in the ground plane).
    pub fn to_transform(&self) -> Transform3D {
        Transform3D {
            rotation: *Rotation3::from_axis_angle(&Vector3::z_axis(), self.theta).matrix(),
            translation: Vector3::new(self.x, self.y, 0.0),
        }
    }
}

/// Rigid transform `p ↦ R p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TransformDoc", into = "TransformDoc")]
pub struct Transform3D {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

/// Wire form: 9 row-major rotation entries and a 3-vector translation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformDoc {
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
}

impl TryFrom<TransformDoc> for Transform3D {
    type Error = Error;

    fn try_from(doc: TransformDoc) -> Result<Self> {
        let r = doc.rotation;
        Transform3D::new(
            Matrix3::new(r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8]),
            Vector3::from(doc.translation),
        )
    }
}

impl From<Transform3D> for TransformDoc {
    fn from(t: Transform3D) -> Self {
        let m = t.rotation;
        TransformDoc {
            rotation: [
                m[(0, 0)],
                m[(0, 1)],
                m[(0, 2)],
                m[(1, 0)],
                m[(1, 1)],
                m[(1, 2)],
                m[(2, 0)],
                m[(2, 1)],
                m[(2, 2)],
            ],
            translation: [t.translation.x, t.translation.y, t.translation.z],
        }
    }
}

impl Default for Transform3D {
    fn default() -> Self {
        Self::identity()
    }
}

impl Transform3D {
    /// Validates that `rotation` is a proper rotation (orthonormal, det = +1).
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if !rotation
            .iter()
            .chain(translation.iter())
            .all(|v| v.is_finite())
        {
            return Err(Error::InvalidTransform("non-finite entry".into()));
        }
        let gram_err = (rotation.transpose() * rotation - Matrix3::identity())
            .abs()
            .max();
        if gram_err > ORTHONORMAL_TOL {
            return Err(Error::InvalidTransform(format!(
                "rotation is not orthonormal (|RᵀR - I| = {gram_err:e})"
            )));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(Error::InvalidTransform(format!("det(R) = {det}")));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    pub fn from_rotation(rotation: Rotation3<f64>) -> Self {
        Self {
            rotation: *rotation.matrix(),
            translation: Vector3::zeros(),
        }
    }

    /// Rotation about `axis` (need not be normalized) by `angle` radians, then translation.
    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64, translation: Vector3<f64>) -> Self {
        let rot = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
        Self {
            rotation: *rot.matrix(),
            translation,
        }
    }

    /// Robot-to-camera transform for a camera whose optical centre sits at `position`
    /// in the robot frame, looking along robot +X, then yawed (about robot Z, positive
    /// to the left) and pitched (about robot Y, positive tilts the view downward).
    pub fn camera_mount(position: [f64; 3], yaw: f64, pitch: f64) -> Self {
        // Camera axes expressed in robot coordinates: x_c = -Y, y_c = -Z, z_c = +X.
        let optical = Matrix3::new(0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.0);
        let yaw_m = Rotation3::from_axis_angle(&Vector3::z_axis(), yaw);
        let pitch_m = Rotation3::from_axis_angle(&Vector3::y_axis(), pitch);
        let robot_from_camera = Self {
            rotation: yaw_m.matrix() * pitch_m.matrix() * optical,
            translation: Vector3::from(position),
        };
        robot_from_camera.inverse()
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn apply(&self, p: &Point3) -> Point3 {
        self.rotation * p + self.translation
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Transform3D) -> Transform3D {
        Transform3D {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Transform3D {
        let rt = self.rotation.transpose();
        Transform3D {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }
}

pub fn compose(a: &Transform3D, b: &Transform3D) -> Transform3D {
    a.compose(b)
}

pub fn apply(t: &Transform3D, p: &Point3) -> Point3 {
    t.apply(p)
}

/// Continuous image coordinate; `u` is the column, `v` the row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelCoord {
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CameraKind {
    #[serde(rename = "pinhole")]
    Pinhole,
    #[serde(rename = "fisheye-equidistant")]
    FisheyeEquidistant,
    #[serde(rename = "equirectangular")]
    Equirectangular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Pinhole {
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
    },
    /// Image radius proportional to the angle off the optical axis: `r = f·θ`.
    /// Rays beyond `max_theta` are outside the field of view.
    FisheyeEquidistant {
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        max_theta: f64,
    },
    /// Azimuth (positive to the right) maps linearly to columns, elevation
    /// (positive up) linearly to rows, top row = `lat_max`.
    Equirectangular {
        lon_min: f64,
        lon_max: f64,
        lat_min: f64,
        lat_max: f64,
    },
}

/// A parametric camera plus its mounting on the robot.
///
/// `mount` maps robot-frame points into this camera's frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CameraDoc", into = "CameraDoc")]
pub struct CameraModel {
    width: usize,
    height: usize,
    projection: Projection,
    mount: Transform3D,
}

/// JSON layout of a camera model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CameraDoc {
    pub kind: CameraKind,
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub fx: f64,
    #[serde(default)]
    pub fy: f64,
    #[serde(default)]
    pub cx: f64,
    #[serde(default)]
    pub cy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lon_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lon_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lat_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lat_max: Option<f64>,
    #[serde(default)]
    pub mount: Transform3D,
}

/// Default angular extent of an equidistant fisheye when none is given.
pub const DEFAULT_FISHEYE_MAX_THETA: f64 = FRAC_PI_2;

impl TryFrom<CameraDoc> for CameraModel {
    type Error = Error;

    fn try_from(d: CameraDoc) -> Result<Self> {
        let projection = match d.kind {
            CameraKind::Pinhole => Projection::Pinhole {
                fx: d.fx,
                fy: d.fy,
                cx: d.cx,
                cy: d.cy,
            },
            CameraKind::FisheyeEquidistant => Projection::FisheyeEquidistant {
                fx: d.fx,
                fy: d.fy,
                cx: d.cx,
                cy: d.cy,
                max_theta: d.max_theta.unwrap_or(DEFAULT_FISHEYE_MAX_THETA),
            },
            CameraKind::Equirectangular => Projection::Equirectangular {
                lon_min: d.lon_min.unwrap_or(-PI),
                lon_max: d.lon_max.unwrap_or(PI),
                lat_min: d.lat_min.unwrap_or(-FRAC_PI_2),
                lat_max: d.lat_max.unwrap_or(FRAC_PI_2),
            },
        };
        CameraModel::new(d.width, d.height, projection, d.mount)
    }
}

impl From<CameraModel> for CameraDoc {
    fn from(c: CameraModel) -> Self {
        let mut doc = CameraDoc {
            kind: c.kind(),
            width: c.width,
            height: c.height,
            fx: 0.0,
            fy: 0.0,
            cx: 0.0,
            cy: 0.0,
            max_theta: None,
            lon_min: None,
            lon_max: None,
            lat_min: None,
            lat_max: None,
            mount: c.mount,
        };
        match c.projection {
            Projection::Pinhole { fx, fy, cx, cy } => {
                (doc.fx, doc.fy, doc.cx, doc.cy) = (fx, fy, cx, cy);
            }
            Projection::FisheyeEquidistant {
                fx,
                fy,
                cx,
                cy,
                max_theta,
            } => {
                (doc.fx, doc.fy, doc.cx, doc.cy) = (fx, fy, cx, cy);
                doc.max_theta = Some(max_theta);
            }
            Projection::Equirectangular {
                lon_min,
                lon_max,
                lat_min,
                lat_max,
            } => {
                doc.lon_min = Some(lon_min);
                doc.lon_max = Some(lon_max);
                doc.lat_min = Some(lat_min);
                doc.lat_max = Some(lat_max);
            }
        }
        doc
    }
}

fn check_intrinsics(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<()> {
    if !(fx.is_finite() && fy.is_finite() && cx.is_finite() && cy.is_finite()) {
        return Err(Error::InvalidCamera("non-finite intrinsics".into()));
    }
    if fx <= 0.0 || fy <= 0.0 {
        return Err(Error::InvalidCamera(format!(
            "focal lengths must be positive (fx={fx}, fy={fy})"
        )));
    }
    Ok(())
}

impl CameraModel {
    pub fn new(
        width: usize,
        height: usize,
        projection: Projection,
        mount: Transform3D,
    ) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::InvalidCamera(format!(
                "raster must be at least 2x2, got {width}x{height}"
            )));
        }
        match projection {
            Projection::Pinhole { fx, fy, cx, cy } => check_intrinsics(fx, fy, cx, cy)?,
            Projection::FisheyeEquidistant {
                fx,
                fy,
                cx,
                cy,
                max_theta,
            } => {
                check_intrinsics(fx, fy, cx, cy)?;
                if !(max_theta > 0.0 && max_theta < PI) {
                    return Err(Error::InvalidCamera(format!(
                        "fisheye max_theta must lie in (0, pi), got {max_theta}"
                    )));
                }
            }
            Projection::Equirectangular {
                lon_min,
                lon_max,
                lat_min,
                lat_max,
            } => {
                let ok = lon_min.is_finite()
                    && lat_min.is_finite()
                    && lon_min < lon_max
                    && lon_max - lon_min <= 2.0 * PI + 1e-12
                    && lon_min >= -PI - 1e-12
                    && lon_max <= PI + 1e-12
                    && lat_min < lat_max
                    && lat_min >= -FRAC_PI_2
                    && lat_max <= FRAC_PI_2;
                if !ok {
                    return Err(Error::InvalidCamera(format!(
                        "bad equirectangular bounds lon [{lon_min}, {lon_max}] lat [{lat_min}, {lat_max}]"
                    )));
                }
            }
        }
        Ok(Self {
            width,
            height,
            projection,
            mount,
        })
    }

    pub fn pinhole(
        width: usize,
        height: usize,
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
    ) -> Result<Self> {
        Self::new(
            width,
            height,
            Projection::Pinhole { fx, fy, cx, cy },
            Transform3D::identity(),
        )
    }

    pub fn fisheye(
        width: usize,
        height: usize,
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        max_theta: f64,
    ) -> Result<Self> {
        Self::new(
            width,
            height,
            Projection::FisheyeEquidistant {
                fx,
                fy,
                cx,
                cy,
                max_theta,
            },
            Transform3D::identity(),
        )
    }

    /// Full-sphere equirectangular camera.
    pub fn equirectangular(width: usize, height: usize) -> Result<Self> {
        Self::equirectangular_bounded(width, height, -PI, PI, -FRAC_PI_2, FRAC_PI_2)
    }

    /// Equirectangular camera restricted to an azimuth/elevation window, e.g. the
    /// front hemisphere when the rear view is occluded by the robot body.
    pub fn equirectangular_bounded(
        width: usize,
        height: usize,
        lon_min: f64,
        lon_max: f64,
        lat_min: f64,
        lat_max: f64,
    ) -> Result<Self> {
        Self::new(
            width,
            height,
            Projection::Equirectangular {
                lon_min,
                lon_max,
                lat_min,
                lat_max,
            },
            Transform3D::identity(),
        )
    }

    pub fn with_mount(mut self, mount: Transform3D) -> Self {
        self.mount = mount;
        self
    }

    /// Same projection model resampled to a different raster size.
    pub fn scaled_to(&self, width: usize, height: usize) -> Result<Self> {
        let sx = width as f64 / self.width as f64;
        let sy = height as f64 / self.height as f64;
        // Pixel centres sit at integers, so the principal point maps through (c + 0.5)·s - 0.5.
        let map = |c: f64, s: f64| (c + 0.5) * s - 0.5;
        let projection = match self.projection {
            Projection::Pinhole { fx, fy, cx, cy } => Projection::Pinhole {
                fx: fx * sx,
                fy: fy * sy,
                cx: map(cx, sx),
                cy: map(cy, sy),
            },
            Projection::FisheyeEquidistant {
                fx,
                fy,
                cx,
                cy,
                max_theta,
            } => Projection::FisheyeEquidistant {
                fx: fx * sx,
                fy: fy * sy,
                cx: map(cx, sx),
                cy: map(cy, sy),
                max_theta,
            },
            eq @ Projection::Equirectangular { .. } => eq,
        };
        Self::new(width, height, projection, self.mount)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn projection(&self) -> &Projection {
        &self.projection
    }

    pub fn mount(&self) -> &Transform3D {
        &self.mount
    }

    pub fn kind(&self) -> CameraKind {
        match self.projection {
            Projection::Pinhole { .. } => CameraKind::Pinhole,
            Projection::FisheyeEquidistant { .. } => CameraKind::FisheyeEquidistant,
            Projection::Equirectangular { .. } => CameraKind::Equirectangular,
        }
    }

    /// True when the continuous coordinate falls inside some pixel's footprint.
    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= -0.5 && u < self.width as f64 - 0.5 && v >= -0.5 && v < self.height as f64 - 0.5
    }

    /// Projects a camera-frame point to continuous pixel coordinates, or `None` when
    /// the point is outside the field of view.
    pub fn project(&self, p: &Point3) -> Result<Option<PixelCoord>> {
        if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite point {p:?}")));
        }
        let px = match self.projection {
            Projection::Pinhole { fx, fy, cx, cy } => {
                if p.z <= 0.0 {
                    return Ok(None);
                }
                PixelCoord {
                    u: fx * p.x / p.z + cx,
                    v: fy * p.y / p.z + cy,
                }
            }
            Projection::FisheyeEquidistant {
                fx,
                fy,
                cx,
                cy,
                max_theta,
            } => {
                let rho = p.x.hypot(p.y);
                if rho == 0.0 {
                    if p.z <= 0.0 {
                        return Ok(None);
                    }
                    PixelCoord { u: cx, v: cy }
                } else {
                    let theta = rho.atan2(p.z);
                    if theta > max_theta {
                        return Ok(None);
                    }
                    PixelCoord {
                        u: cx + fx * theta * p.x / rho,
                        v: cy + fy * theta * p.y / rho,
                    }
                }
            }
            Projection::Equirectangular {
                lon_min,
                lon_max,
                lat_min,
                lat_max,
            } => {
                let horiz = p.x.hypot(p.z);
                if horiz == 0.0 && p.y == 0.0 {
                    return Ok(None);
                }
                let lon = p.x.atan2(p.z);
                let lat = (-p.y).atan2(horiz);
                if lon < lon_min || lon > lon_max || lat < lat_min || lat > lat_max {
                    return Ok(None);
                }
                PixelCoord {
                    u: (lon - lon_min) / (lon_max - lon_min) * self.width as f64 - 0.5,
                    v: (lat_max - lat) / (lat_max - lat_min) * self.height as f64 - 0.5,
                }
            }
        };
        Ok(self.contains(px.u, px.v).then_some(px))
    }

    /// Viewing ray through a continuous pixel coordinate.
    ///
    /// For pinhole cameras the ray is scaled to unit `z`; otherwise it has unit length.
    /// Returns `None` outside the valid image region.
    pub fn ray(&self, u: f64, v: f64) -> Option<Point3> {
        if !self.contains(u, v) {
            return None;
        }
        match self.projection {
            Projection::Pinhole { fx, fy, cx, cy } => {
                Some(Vector3::new((u - cx) / fx, (v - cy) / fy, 1.0))
            }
            Projection::FisheyeEquidistant {
                fx,
                fy,
                cx,
                cy,
                max_theta,
            } => {
                let a = (u - cx) / fx;
                let b = (v - cy) / fy;
                let theta = a.hypot(b);
                if theta > max_theta {
                    return None;
                }
                if theta == 0.0 {
                    return Some(Vector3::z());
                }
                let s = theta.sin() / theta;
                Some(Vector3::new(s * a, s * b, theta.cos()))
            }
            Projection::Equirectangular {
                lon_min,
                lon_max,
                lat_min,
                lat_max,
            } => {
                let lon = lon_min + (u + 0.5) / self.width as f64 * (lon_max - lon_min);
                let lat = lat_max - (v + 0.5) / self.height as f64 * (lat_max - lat_min);
                let (sl, cl) = lon.sin_cos();
                let (sp, cp) = lat.sin_cos();
                Some(Vector3::new(cp * sl, -sp, cp * cl))
            }
        }
    }

    /// Unit-length viewing direction of an integer pixel.
    pub fn unit_ray(&self, u: usize, v: usize) -> Option<Point3> {
        self.ray(u as f64, v as f64).map(|r| r.normalize())
    }

    /// Back-projects an integer pixel at the given depth (axis depth for pinhole,
    /// Euclidean range otherwise) into the camera frame.
    pub fn back_project(&self, u: usize, v: usize, depth: f64) -> Result<Point3> {
        if !(depth.is_finite() && depth > 0.0) {
            return Err(Error::InvalidDepth(depth));
        }
        let ray = self
            .ray(u as f64, v as f64)
            .ok_or(Error::InvalidPixel { u, v })?;
        Ok(ray * depth)
    }

    /// Converts a hit distance along the unit ray into this camera's depth convention.
    pub fn range_to_depth(&self, unit_ray: &Point3, range: f64) -> f64 {
        match self.projection {
            Projection::Pinhole { .. } => unit_ray.z * range,
            _ => range,
        }
    }

    /// Depth of a camera-frame point under this camera's convention.
    pub fn point_depth(&self, p: &Point3) -> f64 {
        match self.projection {
            Projection::Pinhole { .. } => p.z,
            _ => p.norm(),
        }
    }
}

pub fn project(camera: &CameraModel, point: &Point3) -> Result<Option<PixelCoord>> {
    camera.project(point)
}

pub fn back_project(camera: &CameraModel, u: usize, v: usize, depth: f64) -> Result<Point3> {
    camera.back_project(u, v, depth)
}
