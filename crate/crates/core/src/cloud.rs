//! Depth rasters, raster-organized point clouds, the height band mask and the
//! neighbour-spacing weights used by the collision objective.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::geometry::{CameraModel, Point3, Transform3D};

pub const FRAME_CAMERA: &str = "camera";
pub const FRAME_ROBOT: &str = "robot";

/// Dense per-pixel depth. Invalid pixels have no usable depth.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl DepthMap {
    /// Builds a depth map; values that are non-finite or `<= 0` are marked invalid.
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::shape(width * height, values.len()));
        }
        let valid: Vec<bool> = values.iter().map(|d| d.is_finite() && *d > 0.0).collect();
        let values = values
            .into_iter()
            .zip(&valid)
            .map(|(d, ok)| if *ok { d } else { 0.0 })
            .collect();
        Ok(Self {
            width,
            height,
            values,
            valid,
        })
    }

    pub fn invalid(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
            valid: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        let i = v * self.width + u;
        self.valid[i].then_some(self.values[i])
    }

    pub fn set(&mut self, u: usize, v: usize, depth: Option<f64>) {
        let i = v * self.width + u;
        match depth {
            Some(d) if d.is_finite() && d > 0.0 => {
                self.values[i] = d;
                self.valid[i] = true;
            }
            _ => {
                self.values[i] = 0.0;
                self.valid[i] = false;
            }
        }
    }

    pub fn is_valid(&self, u: usize, v: usize) -> bool {
        self.valid[v * self.width + u]
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Invalidates pixels whose viewing ray points backwards (camera-frame `z < 0`),
    /// e.g. the rear half of a spherical image occluded by the robot body.
    pub fn mask_rear_hemisphere(&mut self, camera: &CameraModel) {
        for v in 0..self.height {
            for u in 0..self.width {
                if camera.ray(u as f64, v as f64).is_none_or(|r| r.z < 0.0) {
                    self.set(u, v, None);
                }
            }
        }
    }

    /// Writes the `EXDM` binary layout: magic, u32 width, u32 height, then
    /// row-major little-endian f32 values with invalid pixels stored as 0.
    pub fn write_exdm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(b"EXDM")?;
        w.write_all(&(self.width as u32).to_le_bytes())?;
        w.write_all(&(self.height as u32).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.values.len() * 4);
        for (d, ok) in self.values.iter().zip(&self.valid) {
            let value = if *ok { *d as f32 } else { 0.0 };
            buf.extend_from_slice(&value.to_le_bytes());
        }
        w.write_all(&buf)
    }

    pub fn read_exdm<R: Read>(mut r: R) -> Result<Self> {
        let bad = |reason: &str| Error::Format {
            format: "EXDM",
            reason: reason.to_string(),
        };
        let mut header = [0u8; 12];
        r.read_exact(&mut header)
            .map_err(|_| bad("truncated header"))?;
        if &header[0..4] != b"EXDM" {
            return Err(bad("missing EXDM magic"));
        }
        let width = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let height = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let n = width
            .checked_mul(height)
            .ok_or_else(|| bad("raster too large"))?;
        let mut body = vec![0u8; n * 4];
        r.read_exact(&mut body)
            .map_err(|_| bad("truncated pixel data"))?;
        let values = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        DepthMap::new(width, height, values)
    }
}

/// Raster-organized point cloud; invalid pixels carry no point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    width: usize,
    height: usize,
    frame: String,
    points: Vec<Option<Point3>>,
}

impl PointCloud {
    pub fn new(
        width: usize,
        height: usize,
        frame: impl Into<String>,
        points: Vec<Option<Point3>>,
    ) -> Result<Self> {
        if points.len() != width * height {
            return Err(Error::shape(width * height, points.len()));
        }
        Ok(Self {
            width,
            height,
            frame: frame.into(),
            points,
        })
    }

    /// Unorganized cloud stored as a single row; neighbour weights are then all zero.
    pub fn from_points(frame: impl Into<String>, points: Vec<Point3>) -> Self {
        let n = points.len();
        Self {
            width: n,
            height: if n == 0 { 0 } else { 1 },
            frame: frame.into(),
            points: points.into_iter().map(Some).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn frame(&self) -> &str {
        &self.frame
    }

    pub fn get(&self, u: usize, v: usize) -> Option<&Point3> {
        self.points[v * self.width + u].as_ref()
    }

    pub fn points(&self) -> &[Option<Point3>] {
        &self.points
    }

    pub fn valid_points(&self) -> impl Iterator<Item = &Point3> {
        self.points.iter().flatten()
    }

    pub fn valid_count(&self) -> usize {
        self.points.iter().filter(|p| p.is_some()).count()
    }
}

/// Back-projects every valid depth pixel into the camera frame.
pub fn depth_to_cloud(camera: &CameraModel, depth: &DepthMap) -> Result<PointCloud> {
    if camera.width() != depth.width() || camera.height() != depth.height() {
        return Err(Error::shape(
            format!("{}x{}", camera.width(), camera.height()),
            format!("{}x{}", depth.width(), depth.height()),
        ));
    }
    let mut points = Vec::with_capacity(depth.width() * depth.height());
    for v in 0..depth.height() {
        for u in 0..depth.width() {
            // Pixels outside the lens' image region stay invalid.
            points.push(
                depth
                    .get(u, v)
                    .and_then(|d| camera.back_project(u, v, d).ok()),
            );
        }
    }
    PointCloud::new(depth.width(), depth.height(), FRAME_CAMERA, points)
}

pub fn transform_cloud(
    cloud: &PointCloud,
    t: &Transform3D,
    frame: impl Into<String>,
) -> PointCloud {
    PointCloud {
        width: cloud.width,
        height: cloud.height,
        frame: frame.into(),
        points: cloud
            .points
            .iter()
            .map(|p| p.map(|p| t.apply(&p)))
            .collect(),
    }
}

/// Validity mask of points inside the closed height band `[h_min, h_max]`
/// (cloud must be in a Z-up frame).
pub fn height_mask(cloud: &PointCloud, h_min: f64, h_max: f64) -> Result<Vec<bool>> {
    if h_min.is_nan() || h_max.is_nan() || h_min >= h_max {
        return Err(Error::InvalidBand { h_min, h_max });
    }
    Ok(cloud
        .points
        .iter()
        .map(|p| p.is_some_and(|p| p.z >= h_min && p.z <= h_max))
        .collect())
}

/// Approximate surface area represented by each pixel: the product of the 3D distances
/// between its horizontal and its vertical neighbours. Border pixels and pixels with any
/// missing neighbour get weight 0.
pub fn sparsity_weights(cloud: &PointCloud) -> Vec<f64> {
    let (w, h) = (cloud.width, cloud.height);
    let mut weights = vec![0.0; w * h];
    if w < 3 || h < 3 {
        return weights;
    }
    let at = |u: usize, v: usize| cloud.points[v * w + u];
    for v in 1..h - 1 {
        for u in 1..w - 1 {
            if at(u, v).is_none() {
                continue;
            }
            if let (Some(l), Some(r), Some(t), Some(b)) =
                (at(u - 1, v), at(u + 1, v), at(u, v - 1), at(u, v + 1))
            {
                weights[v * w + u] = (l - r).norm() * (t - b).norm();
            }
        }
    }
    weights
}
