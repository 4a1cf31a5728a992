//! Optimizes a trajectory toward a goal behind a wall with one gap and prints the
//! commands, waypoints and per-term objective.
//!
//! ```bash
//! cargo run --release --example optimize_trajectory
//! ```

use exaug::navsim::nav_optimizer;
use exaug::objective::{GeoCloud, ObjectiveWeights, RobotParams};
use exaug::optimizer::{optimize, Instance};
use exaug::scene::{default_nav_camera, scene_cloud, wall_with_gap_fixture, OBSTACLE_BAND};

fn main() -> exaug::Result<()> {
    let scene = wall_with_gap_fixture();
    let params = RobotParams::default();
    let cloud = scene_cloud(&scene, &scene.start, &default_nav_camera(), 8.0)?;
    let geo = GeoCloud::for_robot(&cloud, &params)?;
    let goal = scene.start.relative(&scene.goal);
    let instance = Instance::new(goal, geo, params, ObjectiveWeights::default());
    let result = optimize(&instance, &nav_optimizer())?;

    println!(
        "restart {} after {} iterations (converged: {})",
        result.restart, result.iterations, result.converged
    );
    println!(
        "objective {:.4} -> {:.4}",
        result.initial_objective, result.final_objective
    );
    let b = result.breakdown;
    println!(
        "j_pose {:.4}  j_geo {:.3e}  j_diff {:.4}",
        b.j_pose, b.j_geo, b.j_diff
    );
    println!("step      v  omega       x       y  clearance");
    for (i, (c, p)) in result
        .trajectory
        .commands
        .iter()
        .zip(&result.trajectory.waypoints)
        .enumerate()
    {
        let clr = scene.obstacle_clearance(p.x, p.y, OBSTACLE_BAND);
        println!(
            "{:>4} {:6.3} {:6.3} {:7.3} {:7.3} {clr:10.3}",
            i + 1,
            c.v,
            c.omega,
            p.x,
            p.y
        );
    }
    result
        .trajectory
        .write_csv(std::io::stdout().lock())
        .map_err(|e| exaug::Error::InvalidInput(e.to_string()))?;
    Ok(())
}
