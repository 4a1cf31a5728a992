//! Closed-loop navigation over a topological graph: localize against upcoming nodes,
//! optimize a short trajectory toward the next one, and pivot in place whenever the
//! first waypoint is not traversable.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraModel, Pose2D};
use crate::objective::{
    rollout_from, traversability_from, Command, GeoCloud, ObjectiveWeights, RobotParams,
    DEFAULT_DT, DEFAULT_HORIZON,
};
use crate::optimizer::{optimize, Instance, OptimizerConfig};
use crate::scene::{
    default_nav_camera, render_from_robot, scene_cloud, RenderOutput, SceneDescription,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavConfig {
    /// Number of upcoming nodes considered when localizing.
    pub lookahead: usize,
    pub d_l: f64,
    pub theta_l: f64,
    pub dt: f64,
    pub horizon: usize,
    /// Physical footprint used for collision ground truth.
    pub body_radius: f64,
    /// Vertical extent of the body; primitives outside it cannot collide.
    pub collision_band: (f64, f64),
    pub max_steps: usize,
    pub sample_period: usize,
    pub max_range: f64,
    pub camera: CameraModel,
    pub optimizer: OptimizerConfig,
    pub weights: ObjectiveWeights,
}

impl Default for NavConfig {
    fn default() -> Self {
        Self {
            lookahead: 5,
            d_l: 0.4,
            theta_l: 0.5,
            dt: DEFAULT_DT,
            horizon: DEFAULT_HORIZON,
            body_radius: 0.15,
            collision_band: (0.0, 0.65),
            max_steps: 500,
            sample_period: 4,
            max_range: 8.0,
            camera: default_nav_camera(),
            optimizer: nav_optimizer(),
            weights: ObjectiveWeights::default(),
        }
    }
}

/// Optimizer settings that converge within a control period.
pub fn nav_optimizer() -> OptimizerConfig {
    OptimizerConfig {
        learning_rate: 0.05,
        max_iters: 150,
        restarts: 3,
        forward_only: true,
        ..OptimizerConfig::default()
    }
}

impl NavConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lookahead == 0 || self.sample_period == 0 || self.horizon == 0 {
            return Err(Error::InvalidInput(
                "lookahead, sample_period and horizon must be positive".into(),
            ));
        }
        let positive = [self.d_l, self.theta_l, self.dt, self.max_range];
        if positive.iter().any(|x| !(x.is_finite() && *x > 0.0))
            || self.body_radius.is_nan()
            || self.body_radius < 0.0
        {
            return Err(Error::InvalidInput(
                "navigation thresholds must be positive".into(),
            ));
        }
        self.optimizer.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNode {
    pub pose: Pose2D,
    pub observation: RenderOutput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologicalGraph {
    pub nodes: Vec<GraphNode>,
    pub camera: CameraModel,
    pub max_range: f64,
}

/// Serialized graph: node poses plus the camera that rendered them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub camera: CameraModel,
    pub max_range: f64,
    pub poses: Vec<Pose2D>,
}

impl TopologicalGraph {
    /// Index of the final node.
    pub fn goal_index(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            camera: self.camera,
            max_range: self.max_range,
            poses: self.nodes.iter().map(|n| n.pose).collect(),
        }
    }

    /// Rebuilds the graph, re-rendering each node's observation in `scene`.
    pub fn from_doc(scene: &SceneDescription, doc: &GraphDoc) -> Result<Self> {
        if doc.poses.len() < 2 {
            return Err(Error::InvalidPath(
                "a graph needs at least two nodes".into(),
            ));
        }
        let nodes = doc
            .poses
            .iter()
            .map(|p| {
                Ok(GraphNode {
                    pose: *p,
                    observation: render_from_robot(scene, p, &doc.camera, doc.max_range)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            nodes,
            camera: doc.camera,
            max_range: doc.max_range,
        })
    }
}

/// Samples every `sample_period`-th pose of a demonstration path, always keeping the last.
pub fn build_graph(
    scene: &SceneDescription,
    path: &[Pose2D],
    camera: &CameraModel,
    sample_period: usize,
    max_range: f64,
) -> Result<TopologicalGraph> {
    if path.len() < 2 {
        return Err(Error::InvalidPath(format!(
            "path has {} poses, need at least 2",
            path.len()
        )));
    }
    if sample_period == 0 {
        return Err(Error::InvalidInput("sample_period must be positive".into()));
    }
    let last = path.len() - 1;
    if path[0].distance(&scene.start) > 1e-6 || path[last].distance(&scene.goal) > 1e-6 {
        return Err(Error::InvalidPath(
            "path must run from the scene start to its goal".into(),
        ));
    }
    let mut indices: Vec<usize> = (0..last).step_by(sample_period).collect();
    indices.push(last);
    let doc = GraphDoc {
        camera: *camera,
        max_range,
        poses: indices.iter().map(|&i| path[i]).collect(),
    };
    TopologicalGraph::from_doc(scene, &doc)
}

/// Graph over the scene's own demonstration path.
pub fn scene_graph(scene: &SceneDescription, cfg: &NavConfig) -> Result<TopologicalGraph> {
    build_graph(
        scene,
        &scene.subgoals,
        &cfg.camera,
        cfg.sample_period,
        cfg.max_range,
    )
}

/// Pose of `node` as seen from `robot`, taken from simulator ground truth.
pub fn ground_truth_oracle(robot: &Pose2D, node: &GraphNode) -> Pose2D {
    robot.relative(&node.pose)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavState {
    pub pose: Pose2D,
    pub n_c: usize,
    pub step: usize,
    pub collided: bool,
    pub arrived: bool,
}

impl NavState {
    pub fn new(pose: Pose2D) -> Self {
        Self {
            pose,
            n_c: 0,
            step: 0,
            collided: false,
            arrived: false,
        }
    }
}

/// Furthest node among the next `lookahead` that the robot is close to in position
/// and heading; `n_c` is returned unchanged when none qualifies.
pub fn localize<F>(state: &NavState, graph: &TopologicalGraph, cfg: &NavConfig, oracle: F) -> usize
where
    F: Fn(&Pose2D, &GraphNode) -> Pose2D,
{
    let goal = graph.goal_index();
    let mut n_c = state.n_c;
    for n_l in 1..=cfg.lookahead {
        let idx = state.n_c + n_l;
        if idx > goal {
            break;
        }
        let rel = oracle(&state.pose, &graph.nodes[idx]);
        if rel.x.hypot(rel.y) < cfg.d_l && rel.theta.abs() < cfg.theta_l {
            n_c = idx;
        }
    }
    n_c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Pose at which the command was chosen.
    pub pose: Pose2D,
    pub command: Command,
    pub n_c: usize,
    pub t1: f64,
    pub pivot: bool,
}

/// One control period. Returns `None` when localization finds the goal reached.
pub fn step(
    state: &mut NavState,
    graph: &TopologicalGraph,
    scene: &SceneDescription,
    params: &RobotParams,
    cfg: &NavConfig,
) -> Result<Option<StepRecord>> {
    state.n_c = localize(state, graph, cfg, ground_truth_oracle);
    if state.n_c == graph.goal_index() {
        state.arrived = true;
        return Ok(None);
    }
    let target = ground_truth_oracle(&state.pose, &graph.nodes[state.n_c + 1]);
    let cloud = scene_cloud(scene, &state.pose, &cfg.camera, cfg.max_range)?;
    let geo = GeoCloud::for_robot(&cloud, params)?;
    let instance = Instance {
        goal: target,
        geo,
        params: *params,
        weights: cfg.weights,
        dt: cfg.dt,
        horizon: cfg.horizon,
    };
    let mut opt = cfg.optimizer;
    opt.seed = opt.seed.wrapping_add(state.step as u64);
    let result = optimize(&instance, &opt)?;
    let first = result.trajectory.commands[0];
    let t1 = traversability_from(
        &result.trajectory.waypoints[..1],
        &instance.geo,
        params.r_s_prime,
    )[0];
    let pivot = t1 <= 0.5;
    let command = if pivot {
        Command::new(0.0, first.omega)
    } else {
        first
    };
    let record = StepRecord {
        step: state.step,
        pose: state.pose,
        command,
        n_c: state.n_c,
        t1,
        pivot,
    };
    state.pose = rollout_from(&state.pose, &[command], cfg.dt)?[0];
    state.step += 1;
    let clearance = scene.obstacle_clearance(state.pose.x, state.pose.y, cfg.collision_band);
    if clearance < cfg.body_radius {
        state.collided = true;
    }
    Ok(Some(record))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavMetrics {
    pub task_completion: f64,
    pub goal_arrival: bool,
    pub collision_free: bool,
    pub path_length: f64,
    pub steps: usize,
    /// Smallest true obstacle clearance along the executed path.
    pub min_clearance: Option<f64>,
    pub aborted: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub metrics: NavMetrics,
    pub trace: Vec<StepRecord>,
    pub final_state: NavState,
}

impl Episode {
    /// CSV rows `step,x,y,theta,v,omega,n_c,t1,pivot_flag` with a header line.
    pub fn write_trace<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "step,x,y,theta,v,omega,n_c,t1,pivot_flag")?;
        for r in &self.trace {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                r.step,
                r.pose.x,
                r.pose.y,
                r.pose.theta,
                r.command.v,
                r.command.omega,
                r.n_c,
                r.t1,
                u8::from(r.pivot)
            )?;
        }
        Ok(())
    }
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Steps until the goal node is reached, a collision occurs or the step budget runs out.
/// Optimizer failures end the episode and are reported in `aborted`.
pub fn run_episode(
    scene: &SceneDescription,
    graph: &TopologicalGraph,
    params: &RobotParams,
    cfg: &NavConfig,
) -> Result<Episode> {
    cfg.validate()?;
    params.validate()?;
    let mut state = NavState::new(scene.start);
    let mut trace = Vec::new();
    let mut path_length = 0.0;
    let mut min_clearance =
        scene.obstacle_clearance(state.pose.x, state.pose.y, cfg.collision_band);
    let mut aborted = None;
    while state.step < cfg.max_steps && !state.collided {
        let before = state.pose;
        match step(&mut state, graph, scene, params, cfg) {
            Ok(Some(rec)) => {
                path_length += before.distance(&state.pose);
                min_clearance = min_clearance.min(scene.obstacle_clearance(
                    state.pose.x,
                    state.pose.y,
                    cfg.collision_band,
                ));
                trace.push(rec);
            }
            Ok(None) => break,
            Err(e) => {
                aborted = Some(e.to_string());
                break;
            }
        }
    }
    if !state.arrived && !state.collided && aborted.is_none() {
        // The final command may have brought the robot onto the goal.
        state.n_c = localize(&state, graph, cfg, ground_truth_oracle);
        state.arrived = state.n_c == graph.goal_index();
    }
    let metrics = NavMetrics {
        task_completion: state.n_c as f64 / graph.goal_index() as f64,
        goal_arrival: state.arrived,
        collision_free: !state.collided,
        path_length,
        steps: state.step,
        min_clearance: finite_or_none(min_clearance),
        aborted,
    };
    Ok(Episode {
        metrics,
        trace,
        final_state: state,
    })
}
