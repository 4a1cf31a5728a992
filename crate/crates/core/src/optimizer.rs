//! Direct trajectory optimization: minimizes the trajectory objective over the command
//! sequence with Adam, keeping velocities inside their limits through a scaled tanh.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Pose2D;
use crate::objective::{
    geo_cost_masked, j_diff, j_pose, rollout, traversability_from, Command, GeoCloud, GeoMask,
    ObjectiveBreakdown, ObjectiveWeights, RobotParams, Trajectory, DEFAULT_DT, DEFAULT_HORIZON,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub max_iters: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Relative decrease of the best objective over [`CONVERGENCE_WINDOW`] iterations
    /// below which a restart stops.
    pub convergence_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Map linear velocity to `[0, v_max]` instead of `[-v_max, v_max]`.
    pub forward_only: bool,
}

pub const CONVERGENCE_WINDOW: usize = 20;
pub const DEFAULT_SEED: u64 = 0x5EED_E8A6;

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            max_iters: 500,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            convergence_tol: 1e-6,
            restarts: 4,
            seed: DEFAULT_SEED,
            forward_only: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidInput("learning_rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::InvalidInput(
                "beta1 and beta2 must lie in [0, 1)".into(),
            ));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidInput(
                "at least one restart is required".into(),
            ));
        }
        Ok(())
    }
}

/// One trajectory optimization problem, expressed in the robot frame at the current pose.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub goal: Pose2D,
    pub geo: GeoCloud,
    pub params: RobotParams,
    pub weights: ObjectiveWeights,
    pub dt: f64,
    pub horizon: usize,
}

impl Instance {
    pub fn new(
        goal: Pose2D,
        geo: GeoCloud,
        params: RobotParams,
        weights: ObjectiveWeights,
    ) -> Self {
        Self {
            goal,
            geo,
            params,
            weights,
            dt: DEFAULT_DT,
            horizon: DEFAULT_HORIZON,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !self.goal.is_finite() {
            return Err(Error::InvalidInput("goal must be finite".into()));
        }
        if self.horizon == 0 || !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidInput(
                "horizon and dt must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Maps unconstrained parameters `[v_1, ω_1, v_2, ω_2, …]` to bounded commands.
pub fn parameterize(raw: &[f64], v_max: f64, omega_max: f64, forward_only: bool) -> Vec<Command> {
    raw.chunks_exact(2)
        .map(|p| {
            let tv = p[0].tanh();
            let v = if forward_only {
                v_max * (tv + 1.0) / 2.0
            } else {
                v_max * tv
            };
            Command::new(v, omega_max * p[1].tanh())
        })
        .collect()
}

/// Inverse of [`parameterize`], with targets pulled slightly inside the limits.
pub fn unparameterize(
    commands: &[Command],
    v_max: f64,
    omega_max: f64,
    forward_only: bool,
) -> Vec<f64> {
    const EDGE: f64 = 0.98;
    commands
        .iter()
        .flat_map(|c| {
            let sv = if forward_only {
                2.0 * c.v / v_max - 1.0
            } else {
                c.v / v_max
            };
            let sw = c.omega / omega_max;
            [sv.clamp(-EDGE, EDGE).atanh(), sw.clamp(-EDGE, EDGE).atanh()]
        })
        .collect()
}

/// The differentiable objective `J_pose + w_g·J_geo + w_d·J_diff` over raw parameters.
/// Traversability supervision has no predicted counterpart here and is left out.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryObjective<'a> {
    pub instance: &'a Instance,
    pub forward_only: bool,
}

impl<'a> TrajectoryObjective<'a> {
    pub fn new(instance: &'a Instance, forward_only: bool) -> Self {
        Self {
            instance,
            forward_only,
        }
    }

    pub fn commands(&self, raw: &[f64]) -> Vec<Command> {
        let p = &self.instance.params;
        parameterize(raw, p.v_max, p.omega_max, self.forward_only)
    }

    pub fn mask_at(&self, raw: &[f64]) -> Result<GeoMask> {
        let wps = rollout(&self.commands(raw), self.instance.dt)?;
        Ok(GeoMask::compute(
            &wps,
            &self.instance.geo,
            self.instance.params.r_s,
        ))
    }

    pub fn breakdown(&self, raw: &[f64]) -> Result<ObjectiveBreakdown> {
        let mask = self.mask_at(raw)?;
        self.breakdown_with_mask(raw, &mask)
    }

    /// Objective with the collision mask held fixed, as seen by the gradient.
    pub fn breakdown_with_mask(&self, raw: &[f64], mask: &GeoMask) -> Result<ObjectiveBreakdown> {
        let inst = self.instance;
        let commands = self.commands(raw);
        let wps = rollout(&commands, inst.dt)?;
        let jp = j_pose(&wps, &inst.goal)?;
        let jg = geo_cost_masked(&wps, &inst.geo, inst.params.r_s, mask, None);
        let jd = j_diff(&commands);
        let b = ObjectiveBreakdown::from_terms(jp, jg, jd, 0.0, &inst.weights);
        if !b.total.is_finite() {
            return Err(Error::Evaluation(format!("non-finite objective {b:?}")));
        }
        Ok(b)
    }

    pub fn value(&self, raw: &[f64]) -> Result<f64> {
        Ok(self.breakdown(raw)?.total)
    }

    /// Objective value and its exact gradient (reverse mode through the rollout), with
    /// the collision mask frozen at `raw`.
    pub fn value_and_gradient(&self, raw: &[f64]) -> Result<(f64, Vec<f64>)> {
        let inst = self.instance;
        let p = &inst.params;
        let n = raw.len() / 2;
        let dt = inst.dt;
        let commands = self.commands(raw);
        let wps = rollout(&commands, dt)?;
        let mask = GeoMask::compute(&wps, &inst.geo, p.r_s);

        // dJ/d(x_k, y_k)
        let mut g_xy = vec![[0.0; 2]; n];
        let jg = geo_cost_masked(&wps, &inst.geo, p.r_s, &mask, Some(&mut g_xy));
        for g in g_xy.iter_mut() {
            g[0] *= inst.weights.w_g;
            g[1] *= inst.weights.w_g;
        }
        let jp = j_pose(&wps, &inst.goal)?;
        if let Some(last) = wps.last() {
            g_xy[n - 1][0] += 2.0 * (last.x - inst.goal.x);
            g_xy[n - 1][1] += 2.0 * (last.y - inst.goal.y);
        }
        let jd = j_diff(&commands);
        let total = jp + inst.weights.w_g * jg + inst.weights.w_d * jd;
        if !total.is_finite() {
            return Err(Error::Evaluation(format!("non-finite objective {total}")));
        }

        // Headings before each step; positions use the pre-update heading.
        let mut headings = Vec::with_capacity(n);
        let mut theta = 0.0;
        for c in &commands {
            headings.push(theta);
            theta += c.omega * dt;
        }

        let mut d_cmd = vec![Command::default(); n];
        let (mut ax, mut ay, mut ath) = (0.0, 0.0, 0.0);
        for k in (0..n).rev() {
            ax += g_xy[k][0];
            ay += g_xy[k][1];
            let (s, c) = headings[k].sin_cos();
            d_cmd[k].v = (ax * c + ay * s) * dt;
            d_cmd[k].omega = ath * dt;
            ath += commands[k].v * dt * (-ax * s + ay * c);
        }
        for k in 0..n.saturating_sub(1) {
            let dv = 2.0 * inst.weights.w_d * (commands[k + 1].v - commands[k].v);
            let dw = 2.0 * inst.weights.w_d * (commands[k + 1].omega - commands[k].omega);
            d_cmd[k + 1].v += dv;
            d_cmd[k].v -= dv;
            d_cmd[k + 1].omega += dw;
            d_cmd[k].omega -= dw;
        }

        let v_scale = if self.forward_only {
            p.v_max / 2.0
        } else {
            p.v_max
        };
        let mut grad = Vec::with_capacity(raw.len());
        for (k, d) in d_cmd.iter().enumerate() {
            let tv = raw[2 * k].tanh();
            let tw = raw[2 * k + 1].tanh();
            grad.push(d.v * v_scale * (1.0 - tv * tv));
            grad.push(d.omega * p.omega_max * (1.0 - tw * tw));
        }
        Ok((total, grad))
    }
}

/// Smallest denominator used by [`check_gradient`] callers: central differences of an
/// objective of order 10 carry roughly `1e-9` of rounding noise at `h = 1e-5`, so
/// components much smaller than this are compared in absolute terms.
pub const GRADIENT_FLOOR: f64 = 1e-4;

/// Central-difference comparison of the analytic gradient, with the collision mask frozen
/// at `raw`. Returns the per-component relative errors
/// `|analytic - numeric| / max(|analytic|, |numeric|, floor)`.
pub fn check_gradient(
    objective: &TrajectoryObjective,
    raw: &[f64],
    h: f64,
    floor: f64,
) -> Result<Vec<f64>> {
    let (_, analytic) = objective.value_and_gradient(raw)?;
    let mask = objective.mask_at(raw)?;
    let mut x = raw.to_vec();
    let mut errs = Vec::with_capacity(raw.len());
    for i in 0..raw.len() {
        x[i] = raw[i] + h;
        let fp = objective.breakdown_with_mask(&x, &mask)?.total;
        x[i] = raw[i] - h;
        let fm = objective.breakdown_with_mask(&x, &mask)?.total;
        x[i] = raw[i];
        let numeric = (fp - fm) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(floor);
        errs.push((analytic[i] - numeric).abs() / denom);
    }
    Ok(errs)
}

/// Commands that first turn in place toward the goal, then drive straight at constant
/// speed so that the last waypoint lands on it (subject to limits).
pub fn straight_line_commands(
    goal: &Pose2D,
    params: &RobotParams,
    dt: f64,
    horizon: usize,
) -> Vec<Command> {
    let dist = goal.x.hypot(goal.y);
    let bearing = if dist > 1e-9 {
        goal.y.atan2(goal.x)
    } else {
        0.0
    };
    let turn_rate = 0.9 * params.omega_max;
    let turn_steps = if bearing.abs() < 1e-9 {
        0
    } else {
        ((bearing.abs() / (turn_rate * dt)).ceil() as usize).min(horizon.saturating_sub(1))
    };
    let drive_steps = horizon - turn_steps;
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..turn_steps {
        let omega = (bearing / (turn_steps as f64 * dt)).clamp(-turn_rate, turn_rate);
        out.push(Command::new(0.0, omega));
    }
    let v = (dist / (drive_steps as f64 * dt)).min(0.95 * params.v_max);
    for _ in 0..drive_steps {
        out.push(Command::new(v, 0.0));
    }
    out
}

fn initial_raw(instance: &Instance, config: &OptimizerConfig, restart: usize) -> Vec<f64> {
    let p = &instance.params;
    let base = straight_line_commands(&instance.goal, p, instance.dt, instance.horizon);
    let mut raw = unparameterize(&base, p.v_max, p.omega_max, config.forward_only);
    if restart == 0 {
        return raw;
    }
    // Alternate detour side; the bias grows every second restart.
    let side = if restart % 2 == 1 { 1.0 } else { -1.0 };
    let amplitude = 0.6 * restart.div_ceil(2) as f64;
    let half = instance.horizon.div_ceil(2);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(restart as u64));
    for k in 0..instance.horizon {
        let profile = if k < half { 1.0 } else { -1.0 };
        raw[2 * k + 1] += side * amplitude * profile + rng.random_range(-0.3..0.3);
        raw[2 * k] += rng.random_range(-0.3..0.3);
    }
    raw
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub trajectory: Trajectory,
    pub final_objective: f64,
    pub breakdown: ObjectiveBreakdown,
    /// Objective of the unperturbed straight-line initialization.
    pub initial_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restart: usize,
    /// Best-so-far objective after each iteration of the winning restart.
    pub history: Vec<f64>,
}

struct RestartOutcome {
    raw: Vec<f64>,
    best: f64,
    initial: f64,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

fn run_restart(
    objective: &TrajectoryObjective,
    config: &OptimizerConfig,
    mut raw: Vec<f64>,
) -> Result<RestartOutcome> {
    let n = raw.len();
    let (mut value, mut grad) = objective.value_and_gradient(&raw)?;
    let initial = value;
    let mut best = value;
    let mut best_raw = raw.clone();
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut history = vec![best];
    let mut converged = false;
    let mut iterations = 0;
    for t in 1..=config.max_iters {
        iterations = t;
        if grad.iter().all(|g| *g == 0.0) {
            converged = true;
            break;
        }
        let bc1 = 1.0 - config.beta1.powi(t as i32);
        let bc2 = 1.0 - config.beta2.powi(t as i32);
        for i in 0..n {
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
            raw[i] -= config.learning_rate * (m[i] / bc1) / ((v[i] / bc2).sqrt() + config.epsilon);
        }
        (value, grad) = objective.value_and_gradient(&raw)?;
        if value < best {
            best = value;
            best_raw.copy_from_slice(&raw);
        }
        history.push(best);
        if t >= CONVERGENCE_WINDOW {
            let old = history[t - CONVERGENCE_WINDOW];
            if old - best <= config.convergence_tol * old.abs().max(1e-12) {
                converged = true;
                break;
            }
        }
    }
    Ok(RestartOutcome {
        raw: best_raw,
        best,
        initial,
        iterations,
        converged,
        history,
    })
}

/// Multi-restart Adam over the command sequence; returns the best restart.
pub fn optimize(instance: &Instance, config: &OptimizerConfig) -> Result<OptimizationResult> {
    instance.validate()?;
    config.validate()?;
    let objective = TrajectoryObjective::new(instance, config.forward_only);
    let mut best: Option<(usize, RestartOutcome)> = None;
    let mut initial_objective = f64::NAN;
    let mut failures = Vec::new();
    for r in 0..config.restarts {
        let raw = initial_raw(instance, config, r);
        match run_restart(&objective, config, raw) {
            Ok(out) => {
                if r == 0 {
                    initial_objective = out.initial;
                }
                if best.as_ref().is_none_or(|(_, b)| out.best < b.best) {
                    best = Some((r, out));
                }
            }
            Err(e) => failures.push(format!("restart {r}: {e}")),
        }
    }
    let (restart, out) = best.ok_or_else(|| Error::OptimizationFailure(failures.join("; ")))?;
    if initial_objective.is_nan() {
        initial_objective = out.initial;
    }
    let p = &instance.params;
    let commands = parameterize(&out.raw, p.v_max, p.omega_max, config.forward_only);
    let waypoints = rollout(&commands, instance.dt)?;
    let traversability = traversability_from(&waypoints, &instance.geo, p.r_s_prime);
    let breakdown = objective.breakdown(&out.raw)?;
    Ok(OptimizationResult {
        trajectory: Trajectory {
            commands,
            waypoints,
            traversability,
        },
        final_objective: out.best,
        breakdown,
        initial_objective,
        iterations: out.iterations,
        converged: out.converged,
        restart,
        history: out.history,
    })
}

/// One optimization per angular velocity limit.
pub fn omega_sweep(
    instance: &Instance,
    config: &OptimizerConfig,
    omega_values: &[f64],
) -> Result<Vec<OptimizationResult>> {
    omega_values
        .iter()
        .map(|&w| {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "omega_max must be positive, got {w}"
                )));
            }
            let mut inst = instance.clone();
            inst.params.omega_max = w;
            optimize(&inst, config)
        })
        .collect()
}
