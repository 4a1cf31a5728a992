//! Runs one closed-loop navigation episode on a generated scene and prints the trace.
//!
//! ```bash
//! cargo run --release --example navigate -- 7
//! ```

use exaug::navsim::{run_episode, scene_graph, NavConfig};
use exaug::objective::RobotParams;
use exaug::scene::{generate_suite, SuiteParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(7);
    let scene = generate_suite(seed, 1, &SuiteParams::default())?.remove(0);
    let cfg = NavConfig::default();
    let graph = scene_graph(&scene, &cfg)?;
    let params = RobotParams::default();
    let episode = run_episode(&scene, &graph, &params, &cfg)?;
    for r in episode.trace.iter().step_by(5) {
        println!(
            "step {:>3}  pose ({:5.2}, {:5.2}, {:5.2})  cmd ({:.2}, {:5.2})  node {}{}",
            r.step,
            r.pose.x,
            r.pose.y,
            r.pose.theta,
            r.command.v,
            r.command.omega,
            r.n_c,
            if r.pivot { "  pivot" } else { "" }
        );
    }
    println!("{}", serde_json::to_string_pretty(&episode.metrics)?);
    Ok(())
}
