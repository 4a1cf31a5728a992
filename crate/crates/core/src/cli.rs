//! Command-line front end. Every subcommand is deterministic given `--seed`.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cloud::{DepthMap, PointCloud};
use crate::error::{Error, Result};
use crate::geometry::{CameraModel, Point3, Pose2D};
use crate::navsim::{build_graph, run_episode, GraphDoc, NavConfig, TopologicalGraph};
use crate::objective::{GeoCloud, ObjectiveWeights, RobotParams};
use crate::optimizer::{
    check_gradient, optimize, Instance, OptimizerConfig, TrajectoryObjective, DEFAULT_SEED,
    GRADIENT_FLOOR,
};
use crate::scene::{generate_suite, render_from_robot, scene_cloud, SceneDescription, SuiteParams};
use crate::suite::{evaluate_suite, ParamGrid};
use crate::viewsynth::{
    relative_camera_transform, synthesize_view_with, ColorImage, SynthesisOptions,
};

pub const THREADS_ENV: &str = "EXAUG_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "exaug",
    version,
    about = "View synthesis, trajectory optimization and navigation on synthetic scenes"
)]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; EXAUG_THREADS takes precedence when set.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Increase log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize the view from a displaced camera.
    Warp(WarpArgs),
    /// Optimize one trajectory toward a goal in a scene.
    Optimize(OptimizeArgs),
    /// Generate or render synthetic scenes.
    #[command(subcommand)]
    Scene(SceneCommand),
    /// Run one navigation episode.
    Nav(NavArgs),
    /// Run navigation over a directory of scenes and a parameter grid.
    EvalSuite(EvalArgs),
    /// Gradient checks and round-trip checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Subcommand)]
pub enum SceneCommand {
    /// Write a seeded suite of scenes with certified corridors.
    Generate(GenerateArgs),
    /// Raycast colour and depth from a robot pose.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct WarpArgs {
    #[arg(long)]
    pub src_image: PathBuf,
    #[arg(long)]
    pub src_depth: PathBuf,
    #[arg(long)]
    pub src_cam: PathBuf,
    #[arg(long)]
    pub dst_cam: PathBuf,
    /// Target robot pose `x,y,theta` in the source robot frame.
    #[arg(long, value_parser = parse_pose)]
    pub pose: Pose2D,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub working_scale: f64,
}

#[derive(Debug, Args, Clone)]
pub struct RobotArgs {
    #[arg(long = "rs", default_value_t = RobotParams::default().r_s)]
    pub r_s: f64,
    #[arg(long = "rs-prime", default_value_t = RobotParams::default().r_s_prime)]
    pub r_s_prime: f64,
    #[arg(long, default_value_t = RobotParams::default().omega_max)]
    pub omega_max: f64,
    #[arg(long, default_value_t = RobotParams::default().v_max)]
    pub v_max: f64,
}

impl RobotArgs {
    fn params(&self) -> Result<RobotParams> {
        let p = RobotParams {
            r_s: self.r_s,
            r_s_prime: self.r_s_prime,
            omega_max: self.omega_max,
            v_max: self.v_max,
            ..RobotParams::default()
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// World-frame goal `x,y[,theta]`; defaults to the scene goal.
    #[arg(long, value_parser = parse_pose)]
    pub goal: Option<Pose2D>,
    /// World-frame robot pose; defaults to the scene start.
    #[arg(long, value_parser = parse_pose)]
    pub pose: Option<Pose2D>,
    /// Camera JSON; defaults to the navigation camera.
    #[arg(long)]
    pub cam: Option<PathBuf>,
    #[command(flatten)]
    pub robot: RobotArgs,
    #[arg(long, default_value_t = OptimizerConfig::default().learning_rate)]
    pub lr: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().max_iters)]
    pub iters: usize,
    #[arg(long, default_value_t = OptimizerConfig::default().restarts)]
    pub restarts: usize,
    #[arg(long)]
    pub forward_only: bool,
    #[arg(long, default_value_t = 8.0)]
    pub max_range: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = SuiteParams::default().obstacle_count)]
    pub obstacles: usize,
    /// Disk radius the certified corridor must admit.
    #[arg(long, default_value_t = SuiteParams::default().clearance)]
    pub clearance: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub cam: Option<PathBuf>,
    /// World-frame robot pose; defaults to the scene start.
    #[arg(long, value_parser = parse_pose)]
    pub pose: Option<Pose2D>,
    #[arg(long, default_value_t = 8.0)]
    pub max_range: f64,
    #[arg(long)]
    pub out_color: PathBuf,
    #[arg(long)]
    pub out_depth: PathBuf,
}

#[derive(Debug, Args)]
pub struct NavArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// Graph JSON; built from the scene's subgoals when omitted.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub robot: RobotArgs,
    #[arg(long, default_value_t = NavConfig::default().max_steps)]
    pub max_steps: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Also write the graph that was used.
    #[arg(long)]
    pub write_graph: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of scene JSON files, evaluated in file-name order.
    #[arg(long)]
    pub suite: PathBuf,
    /// Grid axes as comma lists. An omitted axis uses the default value; a flag given
    /// without values makes the grid empty.
    #[arg(long = "rs", value_delimiter = ',', num_args = 0..)]
    pub r_s: Option<Vec<f64>>,
    #[arg(long = "rs-prime", value_delimiter = ',', num_args = 0..)]
    pub r_s_prime: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub omega_max: Option<Vec<f64>>,
    #[arg(long, default_value_t = NavConfig::default().max_steps)]
    pub max_steps: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
}

/// `x,y` or `x,y,theta`.
pub fn parse_pose(s: &str) -> std::result::Result<Pose2D, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    let pose = match parts.as_slice() {
        [x, y] => Pose2D::new(*x, *y, 0.0),
        [x, y, t] => Pose2D::new(*x, *y, *t),
        _ => return Err(format!("expected x,y[,theta], got {s:?}")),
    };
    if pose.is_finite() {
        Ok(pose)
    } else {
        Err(format!("pose must be finite, got {s:?}"))
    }
}

enum Outcome {
    Ok,
    Failed(String),
}

struct Ctx {
    seed: u64,
    out_dir: Option<PathBuf>,
}

impl Ctx {
    fn output(&self, p: &Path) -> PathBuf {
        match &self.out_dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_slice(&read_file(path)?)?)
}

fn read_scene(path: &Path) -> Result<SceneDescription> {
    let scene: SceneDescription = read_json(path)?;
    scene.validate()?;
    Ok(scene)
}

fn read_camera(path: Option<&Path>) -> Result<CameraModel> {
    match path {
        Some(p) => read_json(p),
        None => Ok(NavConfig::default().camera),
    }
}

/// Checks output locations before any work starts: parents are created and no output
/// may name an existing directory.
fn prepare_outputs(paths: &[PathBuf]) -> Result<()> {
    for p in paths {
        if p.is_dir() {
            return Err(Error::InvalidInput(format!(
                "output {} is a directory",
                p.display()
            )));
        }
        if let Some(d) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
        }
    }
    Ok(())
}

/// Writes through a temporary file in the destination directory, then renames.
pub fn write_atomic(
    path: &Path,
    write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        write(&mut buf).map_err(|e| Error::io(path, e))?;
        buf.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_atomic(path, |w| writeln!(w, "{text}"))
}

fn cmd_warp(ctx: &Ctx, a: &WarpArgs) -> Result<Outcome> {
    let img = ColorImage::read_ppm(BufReader::new(&read_file(&a.src_image)?[..]))?;
    let depth = DepthMap::read_exdm(&read_file(&a.src_depth)?[..])?;
    let src: CameraModel = read_json(&a.src_cam)?;
    let dst: CameraModel = read_json(&a.dst_cam)?;
    prepare_outputs(&[ctx.output(&a.out)])?;
    let t = relative_camera_transform(&src, &dst, &a.pose);
    let opts = SynthesisOptions {
        working_scale: a.working_scale,
    };
    let out = synthesize_view_with(&img, &depth, &src, &dst, &t, &opts)?;
    write_atomic(&ctx.output(&a.out), |w| out.image.write_ppm(w))?;
    info!("wrote {}x{} view", dst.width(), dst.height());
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct OptimizeReport<'a> {
    goal_robot_frame: Pose2D,
    params: RobotParams,
    config: OptimizerConfig,
    cloud_points: usize,
    result: &'a crate::optimizer::OptimizationResult,
}

fn cmd_optimize(ctx: &Ctx, a: &OptimizeArgs) -> Result<Outcome> {
    let scene = read_scene(&a.scene)?;
    let cam = read_camera(a.cam.as_deref())?;
    let params = a.robot.params()?;
    let pose = a.pose.unwrap_or(scene.start);
    let goal = pose.relative(&a.goal.unwrap_or(scene.goal));
    let mut outputs = vec![ctx.output(&a.out)];
    outputs.extend(a.report.iter().map(|r| ctx.output(r)));
    prepare_outputs(&outputs)?;
    let cloud: PointCloud = scene_cloud(&scene, &pose, &cam, a.max_range)?;
    let geo = GeoCloud::for_robot(&cloud, &params)?;
    let cloud_points = geo.len();
    let instance = Instance::new(goal, geo, params, ObjectiveWeights::default());
    let config = OptimizerConfig {
        learning_rate: a.lr,
        max_iters: a.iters,
        restarts: a.restarts,
        seed: ctx.seed,
        forward_only: a.forward_only,
        ..OptimizerConfig::default()
    };
    let result = match optimize(&instance, &config) {
        Ok(r) => r,
        Err(e @ Error::OptimizationFailure(_)) => return Ok(Outcome::Failed(e.to_string())),
        Err(e) => return Err(e),
    };
    write_atomic(&ctx.output(&a.out), |w| result.trajectory.write_csv(w))?;
    if let Some(r) = &a.report {
        write_json(
            &ctx.output(r),
            &OptimizeReport {
                goal_robot_frame: goal,
                params,
                config,
                cloud_points,
                result: &result,
            },
        )?;
    }
    info!(
        "objective {:.6} -> {:.6}",
        result.initial_objective, result.final_objective
    );
    Ok(Outcome::Ok)
}

fn cmd_generate(ctx: &Ctx, a: &GenerateArgs) -> Result<Outcome> {
    let params = SuiteParams {
        obstacle_count: a.obstacles,
        clearance: a.clearance,
        ..SuiteParams::default()
    };
    let scenes = match generate_suite(ctx.seed, a.count, &params) {
        Ok(s) => s,
        Err(e @ Error::Generation(_)) => return Ok(Outcome::Failed(e.to_string())),
        Err(e) => return Err(e),
    };
    let dir = ctx.output(&a.out);
    for (i, s) in scenes.iter().enumerate() {
        write_json(&dir.join(format!("scene_{i:03}.json")), s)?;
    }
    info!("wrote {} scenes to {}", scenes.len(), dir.display());
    Ok(Outcome::Ok)
}

fn cmd_render(ctx: &Ctx, a: &RenderArgs) -> Result<Outcome> {
    let scene = read_scene(&a.scene)?;
    let cam = read_camera(a.cam.as_deref())?;
    let pose = a.pose.unwrap_or(scene.start);
    prepare_outputs(&[ctx.output(&a.out_color), ctx.output(&a.out_depth)])?;
    let out = render_from_robot(&scene, &pose, &cam, a.max_range)?;
    write_atomic(&ctx.output(&a.out_color), |w| out.color.write_ppm(w))?;
    write_atomic(&ctx.output(&a.out_depth), |w| out.depth.write_exdm(w))?;
    Ok(Outcome::Ok)
}

fn nav_config(ctx: &Ctx, max_steps: usize) -> NavConfig {
    let mut cfg = NavConfig {
        max_steps,
        ..NavConfig::default()
    };
    cfg.optimizer.seed = ctx.seed;
    cfg
}

fn cmd_nav(ctx: &Ctx, a: &NavArgs) -> Result<Outcome> {
    let scene = read_scene(&a.scene)?;
    let params = a.robot.params()?;
    let cfg = nav_config(ctx, a.max_steps);
    let graph = match &a.graph {
        Some(p) => TopologicalGraph::from_doc(&scene, &read_json::<GraphDoc>(p)?)?,
        None => build_graph(
            &scene,
            &scene.subgoals,
            &cfg.camera,
            cfg.sample_period,
            cfg.max_range,
        )?,
    };
    let mut outputs = vec![ctx.output(&a.out)];
    outputs.extend(a.trace.iter().chain(&a.write_graph).map(|p| ctx.output(p)));
    prepare_outputs(&outputs)?;
    if let Some(p) = &a.write_graph {
        write_json(&ctx.output(p), &graph.to_doc())?;
    }
    let episode = run_episode(&scene, &graph, &params, &cfg)?;
    write_json(&ctx.output(&a.out), &episode.metrics)?;
    if let Some(t) = &a.trace {
        write_atomic(&ctx.output(t), |w| episode.write_trace(w))?;
    }
    let m = &episode.metrics;
    info!(
        "GA {} CF {} TC {:.2} in {} steps",
        m.goal_arrival, m.collision_free, m.task_completion, m.steps
    );
    if let Some(reason) = &m.aborted {
        return Ok(Outcome::Failed(format!("episode aborted: {reason}")));
    }
    if !(m.goal_arrival && m.collision_free) {
        return Ok(Outcome::Failed(format!(
            "goal_arrival={} collision_free={}",
            m.goal_arrival, m.collision_free
        )));
    }
    Ok(Outcome::Ok)
}

/// Scene files (`*.json`) of a suite directory in file-name order.
pub fn load_suite(dir: &Path) -> Result<Vec<SceneDescription>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| read_scene(p)).collect()
}

fn cmd_eval(ctx: &Ctx, a: &EvalArgs) -> Result<Outcome> {
    let scenes = load_suite(&a.suite)?;
    let base = RobotParams::default();
    let axis = |v: &Option<Vec<f64>>, default: f64| v.clone().unwrap_or_else(|| vec![default]);
    let grid = ParamGrid {
        r_s: axis(&a.r_s, base.r_s),
        r_s_prime: axis(&a.r_s_prime, base.r_s_prime),
        omega_max: axis(&a.omega_max, base.omega_max),
    };
    for p in grid.expand(&base) {
        p.validate()?;
    }
    prepare_outputs(&[ctx.output(&a.out)])?;
    let cfg = nav_config(ctx, a.max_steps);
    let report = evaluate_suite(&scenes, &grid, &base, &cfg)?;
    write_json(&ctx.output(&a.out), &report)?;
    info!(
        "{} episodes over {} scenes",
        report.episodes.len(),
        report.scenes
    );
    Ok(Outcome::Ok)
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.random_range(1..400);
    let points: Vec<Point3> = (0..n)
        .map(|_| {
            Point3::new(
                rng.random_range(-0.5..2.0),
                rng.random_range(-1.5..1.5),
                0.4,
            )
        })
        .collect();
    let cloud = PointCloud::from_points(crate::cloud::FRAME_ROBOT, points);
    let params = RobotParams {
        r_s: rng.random_range(0.1..1.0),
        ..RobotParams::default()
    };
    let mut geo = GeoCloud::for_robot(&cloud, &params).expect("valid band");
    // Single-row clouds have no spacing weights; use random ones.
    geo.weights = (0..geo.len()).map(|_| rng.random_range(0.0..0.1)).collect();
    let goal = Pose2D::new(
        rng.random_range(-1.0..2.0),
        rng.random_range(-1.0..1.0),
        0.0,
    );
    Instance::new(goal, geo, params, ObjectiveWeights::default())
}

fn cmd_selftest(ctx: &Ctx, a: &SelftestArgs) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut failures = Vec::new();

    let mut worst: f64 = 0.0;
    for _ in 0..a.instances {
        let inst = random_instance(&mut rng);
        let obj = TrajectoryObjective::new(&inst, false);
        let raw: Vec<f64> = (0..2 * inst.horizon)
            .map(|_| rng.random_range(-1.5..1.5))
            .collect();
        let errs = check_gradient(&obj, &raw, 1e-5, GRADIENT_FLOOR)?;
        worst = errs.iter().copied().fold(worst, f64::max);
    }
    println!(
        "gradient check: worst relative error {worst:.3e} over {} instances",
        a.instances
    );
    if worst >= 1e-4 {
        failures.push("gradient check".to_string());
    }

    let cams = [
        CameraModel::pinhole(64, 48, 40.0, 40.0, 31.5, 23.5)?,
        CameraModel::fisheye(
            64,
            64,
            20.0,
            20.0,
            31.5,
            31.5,
            crate::geometry::DEFAULT_FISHEYE_MAX_THETA,
        )?,
        CameraModel::equirectangular(64, 32)?,
    ];
    let mut cam_err: f64 = 0.0;
    for cam in &cams {
        for _ in 0..200 {
            let (u, v) = (
                rng.random_range(0..cam.width()),
                rng.random_range(0..cam.height()),
            );
            let Ok(p) = cam.back_project(u, v, rng.random_range(0.5..5.0)) else {
                continue;
            };
            match cam.project(&p)? {
                Some(px) => cam_err = cam_err.max((px.u - u as f64).hypot(px.v - v as f64)),
                None => cam_err = f64::INFINITY,
            }
        }
    }
    println!("camera round trip: worst error {cam_err:.3e} px");
    if cam_err.is_nan() || cam_err >= 1e-6 {
        failures.push("camera round trip".to_string());
    }

    let img = ColorImage::new(
        5,
        3,
        (0..15)
            .map(|i| [i as u8, 2 * i as u8, 255 - i as u8])
            .collect(),
    )?;
    let mut buf = Vec::new();
    img.write_ppm(&mut buf)
        .map_err(|e| Error::io("<memory>", e))?;
    let ppm_ok = ColorImage::read_ppm(&buf[..])? == img;
    let depth = DepthMap::new(3, 2, vec![1.5, 0.0, 2.25, 7.0, f64::NAN, 0.5])?;
    let mut buf = Vec::new();
    depth
        .write_exdm(&mut buf)
        .map_err(|e| Error::io("<memory>", e))?;
    let exdm_ok = DepthMap::read_exdm(&buf[..])? == depth;
    println!("ppm round trip: {}", if ppm_ok { "ok" } else { "FAILED" });
    println!("exdm round trip: {}", if exdm_ok { "ok" } else { "FAILED" });
    if !ppm_ok {
        failures.push("ppm round trip".into());
    }
    if !exdm_ok {
        failures.push("exdm round trip".into());
    }

    if failures.is_empty() {
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::Failed(format!(
            "selftest failed: {}",
            failures.join(", ")
        )))
    }
}

fn thread_count(flag: Option<usize>) -> std::result::Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| format!("{THREADS_ENV} must be a non-negative integer, got {v:?}")),
        Err(_) => Ok(flag),
    }
}

/// Parses arguments, runs the subcommand and maps the outcome to an exit code:
/// 0 success, 1 navigation or optimization failure, 2 usage or input error.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .try_init();

    let threads = match thread_count(cli.threads) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let ctx = Ctx {
        seed: cli.seed,
        out_dir: cli.out_dir.clone(),
    };
    let result = pool.install(|| match &cli.command {
        Command::Warp(a) => cmd_warp(&ctx, a),
        Command::Optimize(a) => cmd_optimize(&ctx, a),
        Command::Scene(SceneCommand::Generate(a)) => cmd_generate(&ctx, a),
        Command::Scene(SceneCommand::Render(a)) => cmd_render(&ctx, a),
        Command::Nav(a) => cmd_nav(&ctx, a),
        Command::EvalSuite(a) => cmd_eval(&ctx, a),
        Command::Selftest(a) => cmd_selftest(&ctx, a),
    });
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
