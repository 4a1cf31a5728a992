//! Evaluates a small generated suite over two robot radii and prints the summary rows.
//!
//! ```bash
//! cargo run --release --example eval_suite
//! ```

use exaug::navsim::NavConfig;
use exaug::objective::RobotParams;
use exaug::scene::{generate_suite, SuiteParams};
use exaug::suite::{evaluate_suite, ParamGrid};

fn main() -> exaug::Result<()> {
    let scenes = generate_suite(3, 4, &SuiteParams::default())?;
    let grid = ParamGrid {
        r_s: vec![0.2, 0.3],
        r_s_prime: vec![0.2],
        omega_max: vec![1.0],
    };
    let report = evaluate_suite(
        &scenes,
        &grid,
        &RobotParams::default(),
        &NavConfig::default(),
    )?;
    for g in &report.groups {
        println!(
            "r_s {:.1}: TC {:.2}  GA {:.2}  CF {:.2}  min clearance {:.3}",
            g.r_s,
            g.task_completion,
            g.goal_arrival_rate,
            g.collision_free_rate,
            g.min_clearance.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
