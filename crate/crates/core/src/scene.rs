//! Synthetic scenes built from analytic primitives, rendered by raycasting to get
//! ground-truth colour and depth for any camera model.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{depth_to_cloud, transform_cloud, DepthMap, PointCloud, FRAME_ROBOT};
use crate::error::{Error, Result};
use crate::geometry::{CameraModel, Point3, Pose2D, Transform3D};
use crate::viewsynth::{ColorImage, Rgb};

pub const BACKGROUND: Rgb = [150, 180, 215];
pub const DEFAULT_MAX_RANGE: f64 = 12.0;

const AMBIENT: f64 = 0.35;
const HIT_EPS: f64 = 1e-9;

fn light_dir() -> Vector3<f64> {
    Vector3::new(0.3, 0.5, 0.8).normalize()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Primitive {
    /// Axis-aligned box.
    Box {
        center: [f64; 3],
        size: [f64; 3],
        albedo: Rgb,
    },
    /// Vertical cylinder spanning `[z_min, z_max]`.
    Cylinder {
        center: [f64; 2],
        radius: f64,
        z_min: f64,
        z_max: f64,
        albedo: Rgb,
    },
    /// Infinite horizontal plane at `height`.
    Ground { height: f64, albedo: Rgb },
}

#[derive(Debug, Clone, Copy)]
struct Hit {
    t: f64,
    normal: Vector3<f64>,
}

impl Primitive {
    pub fn albedo(&self) -> Rgb {
        match self {
            Primitive::Box { albedo, .. }
            | Primitive::Cylinder { albedo, .. }
            | Primitive::Ground { albedo, .. } => *albedo,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Primitive::Box { center, size, .. } => {
                center.iter().all(|c| c.is_finite())
                    && size.iter().all(|s| s.is_finite() && *s > 0.0)
            }
            Primitive::Cylinder {
                center,
                radius,
                z_min,
                z_max,
                ..
            } => center.iter().all(|c| c.is_finite()) && *radius > 0.0 && z_min < z_max,
            Primitive::Ground { height, .. } => height.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid primitive {self:?}")))
        }
    }

    fn intersect(&self, o: &Point3, d: &Vector3<f64>) -> Option<Hit> {
        match *self {
            Primitive::Box { center, size, .. } => {
                let mut t_near = f64::NEG_INFINITY;
                let mut t_far = f64::INFINITY;
                let mut axis = 0;
                for a in 0..3 {
                    let lo = center[a] - size[a] / 2.0;
                    let hi = center[a] + size[a] / 2.0;
                    if d[a] == 0.0 {
                        if o[a] < lo || o[a] > hi {
                            return None;
                        }
                        continue;
                    }
                    let (mut t0, mut t1) = ((lo - o[a]) / d[a], (hi - o[a]) / d[a]);
                    if t0 > t1 {
                        std::mem::swap(&mut t0, &mut t1);
                    }
                    if t0 > t_near {
                        t_near = t0;
                        axis = a;
                    }
                    t_far = t_far.min(t1);
                }
                if t_near > t_far || t_near <= HIT_EPS {
                    return None;
                }
                let mut normal = Vector3::zeros();
                normal[axis] = -d[axis].signum();
                Some(Hit { t: t_near, normal })
            }
            Primitive::Cylinder {
                center,
                radius,
                z_min,
                z_max,
                ..
            } => {
                let mut best: Option<Hit> = None;
                let mut consider = |h: Hit| {
                    if h.t > HIT_EPS && best.is_none_or(|b| h.t < b.t) {
                        best = Some(h);
                    }
                };
                let (ox, oy) = (o.x - center[0], o.y - center[1]);
                let a = d.x * d.x + d.y * d.y;
                if a > 0.0 {
                    let b = 2.0 * (ox * d.x + oy * d.y);
                    let c = ox * ox + oy * oy - radius * radius;
                    let disc = b * b - 4.0 * a * c;
                    if disc >= 0.0 {
                        let sq = disc.sqrt();
                        for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                            let z = o.z + t * d.z;
                            if z >= z_min && z <= z_max {
                                let (px, py) = (ox + t * d.x, oy + t * d.y);
                                consider(Hit {
                                    t,
                                    normal: Vector3::new(px, py, 0.0) / radius,
                                });
                                break;
                            }
                        }
                    }
                }
                if d.z != 0.0 {
                    for (zc, nz) in [(z_max, 1.0), (z_min, -1.0)] {
                        let t = (zc - o.z) / d.z;
                        let (px, py) = (ox + t * d.x, oy + t * d.y);
                        if px * px + py * py <= radius * radius {
                            consider(Hit {
                                t,
                                normal: Vector3::new(0.0, 0.0, nz),
                            });
                        }
                    }
                }
                best
            }
            Primitive::Ground { height, .. } => {
                if d.z == 0.0 {
                    return None;
                }
                let t = (height - o.z) / d.z;
                (t > HIT_EPS).then(|| Hit {
                    t,
                    normal: Vector3::new(0.0, 0.0, if o.z >= height { 1.0 } else { -1.0 }),
                })
            }
        }
    }

    /// Planar distance from `(x, y)` to the footprint; `None` for the ground plane or
    /// when the primitive lies entirely outside the height band.
    pub fn planar_clearance(&self, x: f64, y: f64, band: (f64, f64)) -> Option<f64> {
        match *self {
            Primitive::Box { center, size, .. } => {
                let (z0, z1) = (center[2] - size[2] / 2.0, center[2] + size[2] / 2.0);
                if z1 < band.0 || z0 > band.1 {
                    return None;
                }
                let dx = ((x - center[0]).abs() - size[0] / 2.0).max(0.0);
                let dy = ((y - center[1]).abs() - size[1] / 2.0).max(0.0);
                Some(dx.hypot(dy))
            }
            Primitive::Cylinder {
                center,
                radius,
                z_min,
                z_max,
                ..
            } => {
                if z_max < band.0 || z_min > band.1 {
                    return None;
                }
                Some(((x - center[0]).hypot(y - center[1]) - radius).max(0.0))
            }
            Primitive::Ground { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDescription {
    pub primitives: Vec<Primitive>,
    pub start: Pose2D,
    pub goal: Pose2D,
    /// Demonstration path from start to goal; topological graph nodes are sampled from it.
    #[serde(default)]
    pub subgoals: Vec<Pose2D>,
}

impl SceneDescription {
    pub fn validate(&self) -> Result<()> {
        for p in &self.primitives {
            p.validate()?;
        }
        if let (Some(first), Some(last)) = (self.subgoals.first(), self.subgoals.last()) {
            if first.distance(&self.start) > 1e-6 || last.distance(&self.goal) > 1e-6 {
                return Err(Error::InvalidPath(
                    "subgoals must run from start to goal".into(),
                ));
            }
        }
        Ok(())
    }

    /// Nearest planar distance to any obstacle overlapping the height band.
    pub fn obstacle_clearance(&self, x: f64, y: f64, band: (f64, f64)) -> f64 {
        self.primitives
            .iter()
            .filter_map(|p| p.planar_clearance(x, y, band))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let scene: SceneDescription = serde_json::from_str(s)?;
        scene.validate()?;
        Ok(scene)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput {
    pub color: ColorImage,
    pub depth: DepthMap,
}

fn shade(albedo: Rgb, normal: &Vector3<f64>, dir: &Vector3<f64>) -> Rgb {
    let n = if normal.dot(dir) > 0.0 {
        -normal
    } else {
        *normal
    };
    let k = AMBIENT + (1.0 - AMBIENT) * n.dot(&light_dir()).max(0.0);
    albedo.map(|c| (c as f64 * k).round().clamp(0.0, 255.0) as u8)
}

/// Nearest hit along a world-frame ray: distance and primitive index.
pub fn cast_ray(
    scene: &SceneDescription,
    origin: &Point3,
    dir: &Vector3<f64>,
    max_range: f64,
) -> Option<(f64, usize)> {
    nearest_hit(scene, origin, dir, max_range).map(|(h, i)| (h.t, i))
}

fn nearest_hit(
    scene: &SceneDescription,
    origin: &Point3,
    dir: &Vector3<f64>,
    max_range: f64,
) -> Option<(Hit, usize)> {
    let mut best: Option<(Hit, usize)> = None;
    for (i, p) in scene.primitives.iter().enumerate() {
        if let Some(h) = p.intersect(origin, dir) {
            if h.t <= max_range && best.is_none_or(|(b, _)| h.t < b.t) {
                best = Some((h, i));
            }
        }
    }
    best
}

/// Renders colour and depth. `camera_pose` maps camera-frame points into the world.
pub fn raycast(
    scene: &SceneDescription,
    camera: &CameraModel,
    camera_pose: &Transform3D,
    max_range: f64,
) -> Result<RenderOutput> {
    if max_range.is_nan() || max_range <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "max_range must be positive, got {max_range}"
        )));
    }
    let (w, h) = (camera.width(), camera.height());
    let origin = *camera_pose.translation();
    let rows: Vec<Vec<(Rgb, Option<f64>)>> = (0..h)
        .into_par_iter()
        .map(|v| {
            (0..w)
                .map(|u| {
                    let Some(ray) = camera.unit_ray(u, v) else {
                        return (BACKGROUND, None);
                    };
                    let dir = camera_pose.rotation() * ray;
                    match nearest_hit(scene, &origin, &dir, max_range) {
                        Some((hit, i)) => (
                            shade(scene.primitives[i].albedo(), &hit.normal, &dir),
                            Some(camera.range_to_depth(&ray, hit.t)),
                        ),
                        None => (BACKGROUND, None),
                    }
                })
                .collect()
        })
        .collect();
    let mut color = Vec::with_capacity(w * h);
    let mut depth = DepthMap::invalid(w, h);
    for (v, row) in rows.into_iter().enumerate() {
        for (u, (c, d)) in row.into_iter().enumerate() {
            color.push(c);
            depth.set(u, v, d);
        }
    }
    Ok(RenderOutput {
        color: ColorImage::new(w, h, color)?,
        depth,
    })
}

/// World pose of the camera for a robot at `robot_pose`.
pub fn camera_world_pose(robot_pose: &Pose2D, camera: &CameraModel) -> Transform3D {
    robot_pose.to_transform().compose(&camera.mount().inverse())
}

pub fn render_from_robot(
    scene: &SceneDescription,
    robot_pose: &Pose2D,
    camera: &CameraModel,
    max_range: f64,
) -> Result<RenderOutput> {
    raycast(
        scene,
        camera,
        &camera_world_pose(robot_pose, camera),
        max_range,
    )
}

/// What the robot's camera sees, as a point cloud in the robot frame.
pub fn scene_cloud(
    scene: &SceneDescription,
    robot_pose: &Pose2D,
    camera: &CameraModel,
    max_range: f64,
) -> Result<PointCloud> {
    if !robot_pose.is_finite() {
        return Err(Error::InvalidInput("robot pose must be finite".into()));
    }
    let render = render_from_robot(scene, robot_pose, camera, max_range)?;
    let cloud = depth_to_cloud(camera, &render.depth)?;
    Ok(transform_cloud(
        &cloud,
        &camera.mount().inverse(),
        FRAME_ROBOT,
    ))
}

/// Spherical camera with the rear hemisphere dropped, mounted on top of the robot.
pub fn default_nav_camera() -> CameraModel {
    CameraModel::equirectangular_bounded(128, 64, -FRAC_PI_2, FRAC_PI_2, -FRAC_PI_3, FRAC_PI_3)
        .expect("valid camera")
        .with_mount(Transform3D::camera_mount([0.0, 0.0, 0.5], 0.0, 0.0))
}

/// Difficulty knobs for [`generate_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteParams {
    pub length: f64,
    pub obstacle_count: usize,
    pub obstacle_size: (f64, f64),
    /// Maximum lateral offset of an obstacle from the straight path.
    pub lateral_spread: f64,
    /// Disk radius that must fit along some start-to-goal corridor.
    pub clearance: f64,
    /// Obstacles keep at least this distance from every `node_period`-th demonstration
    /// pose (and the last), so graph nodes stay reachable.
    pub subgoal_margin: f64,
    pub node_period: usize,
    /// Minimum distance between obstacle centres, keeping them from merging into walls.
    pub min_separation: f64,
    pub corridor_half_width: f64,
    pub path_step: f64,
    pub max_attempts: usize,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            length: 6.0,
            obstacle_count: 2,
            obstacle_size: (0.15, 0.25),
            lateral_spread: 0.5,
            clearance: 0.6,
            subgoal_margin: 0.25,
            node_period: 4,
            min_separation: 1.5,
            corridor_half_width: 2.0,
            path_step: 0.25,
            max_attempts: 200,
        }
    }
}

const PALETTE: [Rgb; 6] = [
    [200, 60, 50],
    [60, 150, 70],
    [60, 90, 200],
    [210, 170, 40],
    [150, 70, 170],
    [40, 170, 180],
];

/// Ground, two side walls and an end wall around a straight course of `length` metres.
pub fn corridor(length: f64, half_width: f64) -> Vec<Primitive> {
    let wall_len = length + 3.0;
    vec![
        Primitive::Ground {
            height: 0.0,
            albedo: [120, 110, 100],
        },
        Primitive::Box {
            center: [length / 2.0, half_width + 0.05, 0.5],
            size: [wall_len, 0.1, 1.0],
            albedo: [190, 190, 180],
        },
        Primitive::Box {
            center: [length / 2.0, -half_width - 0.05, 0.5],
            size: [wall_len, 0.1, 1.0],
            albedo: [170, 170, 190],
        },
        Primitive::Box {
            center: [length + 1.55, 0.0, 0.5],
            size: [0.1, 2.0 * half_width + 0.2, 1.0],
            albedo: [180, 150, 120],
        },
    ]
}

/// Straight demonstration path with poses every `step` metres (last pose at the goal).
pub fn straight_path(start: &Pose2D, goal: &Pose2D, step: f64) -> Vec<Pose2D> {
    let dist = start.distance(goal);
    let n = ((dist / step).ceil() as usize).max(1);
    let heading = (goal.y - start.y).atan2(goal.x - start.x);
    (0..=n)
        .map(|i| {
            let s = i as f64 / n as f64;
            let theta = if i == n { goal.theta } else { heading };
            Pose2D::new(
                start.x + s * (goal.x - start.x),
                start.y + s * (goal.y - start.y),
                if i == 0 { start.theta } else { theta },
            )
        })
        .collect()
}

/// Whether a disk of `radius` can travel from start to goal, by BFS over a grid of
/// cells whose centres keep `radius` clearance from every obstacle.
pub fn corridor_exists(scene: &SceneDescription, radius: f64, band: (f64, f64), cell: f64) -> bool {
    let xs: Vec<f64> = [scene.start.x, scene.goal.x].into();
    let ys: Vec<f64> = [scene.start.y, scene.goal.y].into();
    let pad = 3.0;
    let x0 = xs.iter().cloned().fold(f64::INFINITY, f64::min) - pad;
    let x1 = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + pad;
    let y0 = ys.iter().cloned().fold(f64::INFINITY, f64::min) - pad;
    let y1 = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + pad;
    let nx = ((x1 - x0) / cell).ceil() as usize + 1;
    let ny = ((y1 - y0) / cell).ceil() as usize + 1;
    let idx = |x: f64, y: f64| {
        let i = ((x - x0) / cell).round() as usize;
        let j = ((y - y0) / cell).round() as usize;
        j * nx + i
    };
    let free: Vec<bool> = (0..nx * ny)
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            scene.obstacle_clearance(x0 + i as f64 * cell, y0 + j as f64 * cell, band) >= radius
        })
        .collect();
    let (s, g) = (
        idx(scene.start.x, scene.start.y),
        idx(scene.goal.x, scene.goal.y),
    );
    if !free[s] || !free[g] {
        return false;
    }
    let mut seen = vec![false; nx * ny];
    let mut queue = VecDeque::from([s]);
    seen[s] = true;
    while let Some(k) = queue.pop_front() {
        if k == g {
            return true;
        }
        let (i, j) = ((k % nx) as isize, (k / nx) as isize);
        for (di, dj) in [
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ] {
            let (ni, nj) = (i + di, j + dj);
            if ni < 0 || nj < 0 || ni >= nx as isize || nj >= ny as isize {
                continue;
            }
            let nk = nj as usize * nx + ni as usize;
            if free[nk] && !seen[nk] {
                seen[nk] = true;
                queue.push_back(nk);
            }
        }
    }
    false
}

pub const CORRIDOR_CELL: f64 = 0.05;
/// Height band treated as obstacles when certifying corridors.
pub const OBSTACLE_BAND: (f64, f64) = (0.2, 0.65);

fn scene_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn generate_one(seed: u64, params: &SuiteParams) -> Result<SceneDescription> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Pose2D::origin();
    let goal = Pose2D::new(params.length, 0.0, 0.0);
    let path = straight_path(&start, &goal, params.path_step);
    let base = corridor(params.length, params.corridor_half_width);
    for _ in 0..params.max_attempts.max(1) {
        let mut primitives = base.clone();
        let mut centres: Vec<(f64, f64)> = Vec::new();
        for _ in 0..params.obstacle_count {
            let x = rng.random_range(1.2..(params.length - 1.2).max(1.21));
            let y = rng.random_range(-params.lateral_spread..=params.lateral_spread);
            centres.push((x, y));
            let size = rng.random_range(params.obstacle_size.0..=params.obstacle_size.1);
            let height = rng.random_range(0.5..1.0);
            let albedo = PALETTE[rng.random_range(0..PALETTE.len())];
            primitives.push(if rng.random_bool(0.5) {
                Primitive::Cylinder {
                    center: [x, y],
                    radius: size,
                    z_min: 0.0,
                    z_max: height,
                    albedo,
                }
            } else {
                Primitive::Box {
                    center: [x, y, height / 2.0],
                    size: [2.0 * size, 2.0 * size, height],
                    albedo,
                }
            });
        }
        let scene = SceneDescription {
            primitives,
            start,
            goal,
            subgoals: path.clone(),
        };
        let spread_ok = centres.iter().enumerate().all(|(i, a)| {
            centres[..i]
                .iter()
                .all(|b| (a.0 - b.0).hypot(a.1 - b.1) >= params.min_separation)
        });
        let last = path.len() - 1;
        let margin_ok = spread_ok
            && path
                .iter()
                .enumerate()
                .filter(|(i, _)| i % params.node_period.max(1) == 0 || *i == last)
                .all(|(_, p)| {
                    scene.obstacle_clearance(p.x, p.y, OBSTACLE_BAND) >= params.subgoal_margin
                });
        if margin_ok && corridor_exists(&scene, params.clearance, OBSTACLE_BAND, CORRIDOR_CELL) {
            return Ok(scene);
        }
    }
    Err(Error::Generation(format!(
        "no scene with a {:.2} m corridor after {} attempts",
        params.clearance, params.max_attempts
    )))
}

/// Deterministic scene suite; each scene is seeded independently from `(seed, index)`.
pub fn generate_suite(
    seed: u64,
    count: usize,
    params: &SuiteParams,
) -> Result<Vec<SceneDescription>> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be positive".into()));
    }
    (0..count)
        .into_par_iter()
        .map(|i| generate_one(scene_seed(seed, i), params))
        .collect()
}

/// Two pillars forming a narrow gap on the straight line to a goal behind them, with
/// open floor on either side.
pub fn narrow_gap_fixture() -> SceneDescription {
    let start = Pose2D::origin();
    let goal = Pose2D::new(3.2, 0.0, 0.0);
    let mut primitives = vec![Primitive::Ground {
        height: 0.0,
        albedo: [120, 110, 100],
    }];
    for y in [0.45, -0.45] {
        primitives.push(Primitive::Cylinder {
            center: [1.6, y],
            radius: 0.15,
            z_min: 0.0,
            z_max: 0.9,
            albedo: [200, 60, 50],
        });
    }
    SceneDescription {
        primitives,
        start,
        goal,
        subgoals: straight_path(&start, &goal, 0.25),
    }
}

/// A wide wall across the course with a single gap, the goal lying beyond it on the
/// line through the gap centre.
pub fn wall_with_gap_fixture() -> SceneDescription {
    let start = Pose2D::origin();
    let goal = Pose2D::new(2.0, 0.6, 0.0);
    let albedo = [180, 150, 120];
    SceneDescription {
        primitives: vec![
            Primitive::Ground {
                height: 0.0,
                albedo: [120, 110, 100],
            },
            // Gap spans y in [-0.15, 0.75].
            Primitive::Box {
                center: [1.0, -1.65, 0.5],
                size: [0.1, 3.0, 1.0],
                albedo,
            },
            Primitive::Box {
                center: [1.0, 2.25, 0.5],
                size: [0.1, 3.0, 1.0],
                albedo,
            },
        ],
        start,
        goal,
        subgoals: straight_path(&start, &goal, 0.25),
    }
}

/// Robot penned in by walls closer than the safety radius on every side.
pub fn blocked_start_fixture() -> SceneDescription {
    let start = Pose2D::origin();
    let goal = Pose2D::new(3.0, 0.0, 0.0);
    let inner = 0.18;
    let t = 0.05;
    let albedo = [90, 90, 160];
    let side = 2.0 * (inner + t);
    let mut primitives = vec![Primitive::Ground {
        height: 0.0,
        albedo: [120, 110, 100],
    }];
    for (cx, cy, sx, sy) in [
        (inner + t / 2.0, 0.0, t, side),
        (-inner - t / 2.0, 0.0, t, side),
        (0.0, inner + t / 2.0, side, t),
        (0.0, -inner - t / 2.0, side, t),
    ] {
        primitives.push(Primitive::Box {
            center: [cx, cy, 0.4],
            size: [sx, sy, 0.8],
            albedo,
        });
    }
    SceneDescription {
        primitives,
        start,
        goal,
        subgoals: straight_path(&start, &goal, 0.25),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frontal_plane(z: f64) -> SceneDescription {
        SceneDescription {
            primitives: vec![Primitive::Box {
                center: [0.0, 0.0, z + 0.5],
                size: [100.0, 100.0, 1.0],
                albedo: [100, 100, 100],
            }],
            start: Pose2D::origin(),
            goal: Pose2D::origin(),
            subgoals: vec![],
        }
    }

    #[test]
    fn pinhole_sees_plane_at_two_metres() {
        let cam = CameraModel::pinhole(32, 32, 16.0, 16.0, 16.0, 16.0).unwrap();
        let out = raycast(&frontal_plane(2.0), &cam, &Transform3D::identity(), 10.0).unwrap();
        assert!((out.depth.get(16, 16).unwrap() - 2.0).abs() < 1e-12);
        // Axis depth is constant across a frontal plane.
        assert!((out.depth.get(0, 5).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn empty_scene_renders_nothing() {
        let scene = SceneDescription {
            primitives: vec![],
            start: Pose2D::origin(),
            goal: Pose2D::origin(),
            subgoals: vec![],
        };
        let cam = CameraModel::equirectangular(16, 8).unwrap();
        let out = raycast(&scene, &cam, &Transform3D::identity(), 10.0).unwrap();
        assert_eq!(out.depth.valid_count(), 0);
        assert!(out.color.pixels().iter().all(|c| *c == BACKGROUND));
    }

    #[test]
    fn max_range_must_be_positive() {
        let cam = CameraModel::pinhole(4, 4, 2.0, 2.0, 2.0, 2.0).unwrap();
        assert!(raycast(&frontal_plane(1.0), &cam, &Transform3D::identity(), 0.0).is_err());
    }

    #[test]
    fn cylinder_ray_hits_side_and_cap() {
        let cyl = Primitive::Cylinder {
            center: [3.0, 0.0],
            radius: 0.5,
            z_min: 0.0,
            z_max: 1.0,
            albedo: [0; 3],
        };
        let side = cyl
            .intersect(&Vector3::new(0.0, 0.0, 0.5), &Vector3::x())
            .unwrap();
        assert!((side.t - 2.5).abs() < 1e-12);
        let down = cyl
            .intersect(&Vector3::new(3.0, 0.1, 2.0), &-Vector3::z())
            .unwrap();
        assert!((down.t - 1.0).abs() < 1e-12);
        assert_eq!(down.normal, Vector3::z());
    }

    #[test]
    fn planar_clearance_of_primitives() {
        let b = Primitive::Box {
            center: [2.0, 0.0, 0.5],
            size: [1.0, 1.0, 1.0],
            albedo: [0; 3],
        };
        assert!((b.planar_clearance(0.0, 0.0, OBSTACLE_BAND).unwrap() - 1.5).abs() < 1e-12);
        assert!((b.planar_clearance(3.5, 1.5, OBSTACLE_BAND).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let low = Primitive::Box {
            center: [2.0, 0.0, 0.05],
            size: [1.0, 1.0, 0.1],
            albedo: [0; 3],
        };
        assert!(low.planar_clearance(0.0, 0.0, OBSTACLE_BAND).is_none());
    }

    #[test]
    fn suite_is_deterministic_and_certified() {
        let params = SuiteParams::default();
        let a = generate_suite(7, 4, &params).unwrap();
        let b = generate_suite(7, 4, &params).unwrap();
        assert_eq!(a, b);
        for s in &a {
            assert!(corridor_exists(
                s,
                params.clearance,
                OBSTACLE_BAND,
                CORRIDOR_CELL
            ));
        }
        assert_ne!(a, generate_suite(8, 4, &params).unwrap());
    }

    #[test]
    fn obstacle_free_suite_always_feasible() {
        let params = SuiteParams {
            obstacle_count: 0,
            max_attempts: 1,
            ..SuiteParams::default()
        };
        assert_eq!(generate_suite(1, 3, &params).unwrap().len(), 3);
    }

    #[test]
    fn infeasible_suite_reports_generation_error() {
        let params = SuiteParams {
            clearance: 3.0,
            max_attempts: 3,
            ..SuiteParams::default()
        };
        assert!(matches!(
            generate_suite(1, 1, &params),
            Err(Error::Generation(_))
        ));
        assert!(generate_suite(1, 0, &params).is_err());
    }

    #[test]
    fn scene_json_round_trip() {
        let s = narrow_gap_fixture();
        assert_eq!(
            SceneDescription::from_json(&s.to_json().unwrap()).unwrap(),
            s
        );
    }
}
