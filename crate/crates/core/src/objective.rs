//! Velocity rollout and the robot-conditioned trajectory objective:
//! goal reaching, cylinder-vs-point-cloud collision, smoothness and traversability.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cloud::{height_mask, sparsity_weights, PointCloud};
use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Pose2D};

pub const DEFAULT_HORIZON: usize = 8;
pub const DEFAULT_DT: f64 = 0.33;

/// Robot body model and velocity limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotParams {
    /// Cylinder radius used by the collision cost (shapes the commanded path).
    pub r_s: f64,
    /// Radius used for traversability and the safety check.
    pub r_s_prime: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub v_max: f64,
    pub omega_max: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            r_s: 0.3,
            r_s_prime: 0.2,
            h_min: 0.2,
            h_max: 0.65,
            v_max: 0.5,
            omega_max: 1.0,
        }
    }
}

/// Range of radii the objective is meant to be conditioned on.
pub const RADIUS_RANGE: (f64, f64) = (0.0, 1.0);
/// Range of angular velocity limits the objective is meant to be conditioned on.
pub const OMEGA_RANGE: (f64, f64) = (0.5, 1.5);

impl RobotParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.r_s,
            self.r_s_prime,
            self.h_min,
            self.h_max,
            self.v_max,
            self.omega_max,
        ];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(
                "robot parameters must be finite".into(),
            ));
        }
        if self.r_s < 0.0 || self.r_s_prime < 0.0 {
            return Err(Error::InvalidInput("radii must be non-negative".into()));
        }
        if self.v_max <= 0.0 || self.omega_max <= 0.0 {
            return Err(Error::InvalidInput(
                "velocity limits must be positive".into(),
            ));
        }
        if self.h_min >= self.h_max {
            return Err(Error::InvalidBand {
                h_min: self.h_min,
                h_max: self.h_max,
            });
        }
        Ok(())
    }

    /// Whether `r_s` and `omega_max` lie in the conditioning ranges.
    pub fn within_conditioning_range(&self) -> bool {
        (RADIUS_RANGE.0..=RADIUS_RANGE.1).contains(&self.r_s)
            && (OMEGA_RANGE.0..=OMEGA_RANGE.1).contains(&self.omega_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub w_g: f64,
    pub w_d: f64,
    pub w_t: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self {
            w_g: 5e3,
            w_d: 0.025,
            w_t: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Command {
    pub v: f64,
    pub omega: f64,
}

impl Command {
    pub fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub commands: Vec<Command>,
    pub waypoints: Vec<Pose2D>,
    pub traversability: Vec<f64>,
}

impl Trajectory {
    /// CSV rows `step,v,omega,x,y,theta,t` with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "step,v,omega,x,y,theta,t")?;
        for (i, (c, p)) in self.commands.iter().zip(&self.waypoints).enumerate() {
            let t = self.traversability.get(i).copied().unwrap_or(f64::NAN);
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                i + 1,
                c.v,
                c.omega,
                p.x,
                p.y,
                p.theta,
                t
            )?;
        }
        Ok(())
    }
}

/// Forward-Euler unicycle integration from the origin. Position uses the heading
/// before the step's rotation is applied. Returns one pose per command.
pub fn rollout(commands: &[Command], dt: f64) -> Result<Vec<Pose2D>> {
    rollout_from(&Pose2D::origin(), commands, dt)
}

pub fn rollout_from(start: &Pose2D, commands: &[Command], dt: f64) -> Result<Vec<Pose2D>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidInput(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if let Some(c) = commands
        .iter()
        .find(|c| !(c.v.is_finite() && c.omega.is_finite()))
    {
        return Err(Error::InvalidInput(format!("non-finite command {c:?}")));
    }
    let (mut x, mut y, mut theta) = (start.x, start.y, start.theta);
    let mut out = Vec::with_capacity(commands.len());
    for c in commands {
        x += c.v * theta.cos() * dt;
        y += c.v * theta.sin() * dt;
        theta += c.omega * dt;
        out.push(Pose2D {
            x,
            y,
            theta: normalize_angle(theta),
        });
    }
    Ok(out)
}

/// Height-band points of a robot-frame cloud flattened to the ground plane, with
/// their neighbour-spacing weights. This is the form the collision cost consumes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeoCloud {
    pub xy: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl GeoCloud {
    pub fn new(cloud: &PointCloud, h_min: f64, h_max: f64) -> Result<Self> {
        let mask = height_mask(cloud, h_min, h_max)?;
        let weights_all = sparsity_weights(cloud);
        let mut xy = Vec::new();
        let mut weights = Vec::new();
        for ((p, m), w) in cloud.points().iter().zip(&mask).zip(&weights_all) {
            if let (Some(p), true) = (p, m) {
                xy.push([p.x, p.y]);
                weights.push(*w);
            }
        }
        Ok(Self { xy, weights })
    }

    pub fn for_robot(cloud: &PointCloud, params: &RobotParams) -> Result<Self> {
        Self::new(cloud, params.h_min, params.h_max)
    }

    pub fn len(&self) -> usize {
        self.xy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xy.is_empty()
    }

    /// Rigidly moves the points in the plane.
    pub fn transformed(&self, pose: &Pose2D) -> GeoCloud {
        GeoCloud {
            xy: self
                .xy
                .iter()
                .map(|p| {
                    let (x, y) = pose.transform_point(p[0], p[1]);
                    [x, y]
                })
                .collect(),
            weights: self.weights.clone(),
        }
    }

    /// Smallest planar distance from `(x, y)` to any point, `INFINITY` when empty.
    pub fn clearance(&self, x: f64, y: f64) -> f64 {
        self.xy
            .iter()
            .map(|p| (p[0] - x).hypot(p[1] - y))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Which (waypoint, point) pairs fall strictly inside the robot radius.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoMask {
    pub n_points: usize,
    pub inside: Vec<bool>,
}

impl GeoMask {
    pub fn compute(waypoints: &[Pose2D], geo: &GeoCloud, r_s: f64) -> Self {
        let mut inside = Vec::with_capacity(waypoints.len() * geo.len());
        for wp in waypoints {
            for p in &geo.xy {
                inside.push((p[0] - wp.x).hypot(p[1] - wp.y) < r_s);
            }
        }
        Self {
            n_points: geo.len(),
            inside,
        }
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|m| **m).count()
    }
}

/// Collision cost and its gradient with respect to waypoint positions, for a fixed mask.
pub(crate) fn geo_cost_masked(
    waypoints: &[Pose2D],
    geo: &GeoCloud,
    r_s: f64,
    mask: &GeoMask,
    mut grad_xy: Option<&mut [[f64; 2]]>,
) -> f64 {
    let count = mask.count();
    if count == 0 {
        return 0.0;
    }
    let norm = count as f64;
    let mut total = 0.0;
    for (k, wp) in waypoints.iter().enumerate() {
        let row = &mask.inside[k * mask.n_points..(k + 1) * mask.n_points];
        let (mut gx, mut gy) = (0.0, 0.0);
        for ((p, w), m) in geo.xy.iter().zip(&geo.weights).zip(row) {
            if !*m {
                continue;
            }
            let (dx, dy) = (p[0] - wp.x, p[1] - wp.y);
            let d = dx.hypot(dy);
            let pen = r_s - d;
            total += w * pen * pen;
            if d > 0.0 {
                // d/dx_k (r - d)² = 2 (r - d) (dx / d)
                let s = 2.0 * w * pen / d;
                gx += s * dx;
                gy += s * dy;
            }
        }
        if let Some(g) = grad_xy.as_deref_mut() {
            g[k][0] += gx / norm;
            g[k][1] += gy / norm;
        }
    }
    total / norm
}

/// Mean weighted squared penetration of height-band points into the robot cylinder at
/// each waypoint. Zero when no point is inside.
pub fn geo_cost(waypoints: &[Pose2D], geo: &GeoCloud, r_s: f64) -> f64 {
    let mask = GeoMask::compute(waypoints, geo, r_s);
    geo_cost_masked(waypoints, geo, r_s, &mask, None)
}

/// Collision cost of a trajectory against a robot-frame point cloud.
pub fn j_geo(waypoints: &[Pose2D], cloud: &PointCloud, params: &RobotParams) -> Result<f64> {
    let geo = GeoCloud::for_robot(cloud, params)?;
    Ok(geo_cost(waypoints, &geo, params.r_s))
}

/// Squared planar distance from the last waypoint to the goal position.
pub fn j_pose(waypoints: &[Pose2D], goal: &Pose2D) -> Result<f64> {
    let last = waypoints
        .last()
        .ok_or_else(|| Error::InvalidInput("empty waypoint list".into()))?;
    Ok((goal.x - last.x).powi(2) + (goal.y - last.y).powi(2))
}

/// Sum of squared consecutive differences of both velocity channels.
pub fn j_diff(commands: &[Command]) -> f64 {
    commands
        .windows(2)
        .map(|w| (w[1].v - w[0].v).powi(2) + (w[1].omega - w[0].omega).powi(2))
        .sum()
}

pub fn j_trav(predicted: &[f64], ground_truth: &[f64]) -> Result<f64> {
    if predicted.len() != ground_truth.len() {
        return Err(Error::shape(ground_truth.len(), predicted.len()));
    }
    Ok(predicted
        .iter()
        .zip(ground_truth)
        .map(|(p, g)| (g - p).powi(2))
        .sum())
}

/// 0 where a height-band point lies strictly within `radius` of the waypoint, else 1.
pub fn traversability_from(waypoints: &[Pose2D], geo: &GeoCloud, radius: f64) -> Vec<f64> {
    waypoints
        .iter()
        .map(|wp| {
            if geo.clearance(wp.x, wp.y) < radius {
                0.0
            } else {
                1.0
            }
        })
        .collect()
}

/// Geometric traversability labels at the safety radius `r_s_prime`.
pub fn traversability_gt(
    waypoints: &[Pose2D],
    cloud: &PointCloud,
    params: &RobotParams,
) -> Result<Vec<f64>> {
    let geo = GeoCloud::for_robot(cloud, params)?;
    Ok(traversability_from(waypoints, &geo, params.r_s_prime))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub j_pose: f64,
    pub j_geo: f64,
    pub j_diff: f64,
    pub j_trav: f64,
    pub total: f64,
}

impl ObjectiveBreakdown {
    pub fn from_terms(
        j_pose: f64,
        j_geo: f64,
        j_diff: f64,
        j_trav: f64,
        w: &ObjectiveWeights,
    ) -> Self {
        Self {
            j_pose,
            j_geo,
            j_diff,
            j_trav,
            total: j_pose + w.w_g * j_geo + w.w_d * j_diff + w.w_t * j_trav,
        }
    }
}

/// Full weighted objective for one command sequence.
#[allow(clippy::too_many_arguments)]
pub fn total_objective(
    commands: &[Command],
    dt: f64,
    goal: &Pose2D,
    cloud: &PointCloud,
    params: &RobotParams,
    weights: &ObjectiveWeights,
    gt_trav: &[f64],
    predicted_trav: &[f64],
) -> Result<ObjectiveBreakdown> {
    let waypoints = rollout(commands, dt)?;
    let jp = j_pose(&waypoints, goal)?;
    let jg = j_geo(&waypoints, cloud, params)?;
    let jd = j_diff(commands);
    let jt = j_trav(predicted_trav, gt_trav)?;
    Ok(ObjectiveBreakdown::from_terms(jp, jg, jd, jt, weights))
}
