//! Sweeps the angular velocity limit on a wall-with-gap scene and reports how sharply
//! each robot turns.
//!
//! ```bash
//! cargo run --release --example omega_sweep
//! ```

use exaug::navsim::nav_optimizer;
use exaug::objective::{GeoCloud, ObjectiveWeights, RobotParams};
use exaug::optimizer::{omega_sweep, Instance};
use exaug::scene::{default_nav_camera, scene_cloud, wall_with_gap_fixture};

fn main() -> exaug::Result<()> {
    let scene = wall_with_gap_fixture();
    let params = RobotParams::default();
    let cloud = scene_cloud(&scene, &scene.start, &default_nav_camera(), 8.0)?;
    let geo = GeoCloud::for_robot(&cloud, &params)?;
    let instance = Instance::new(
        scene.start.relative(&scene.goal),
        geo,
        params,
        ObjectiveWeights::default(),
    );
    let limits = [0.5, 1.0, 1.5];
    for (w, r) in limits
        .iter()
        .zip(omega_sweep(&instance, &nav_optimizer(), &limits)?)
    {
        let peak = r
            .trajectory
            .commands
            .iter()
            .map(|c| c.omega.abs())
            .fold(0.0, f64::max);
        let last = r.trajectory.waypoints.last().expect("non-empty horizon");
        println!(
            "omega_max {w:.1}: peak |omega| {peak:.3}, objective {:.4}, end ({:.2}, {:.2})",
            r.final_objective, last.x, last.y
        );
    }
    Ok(())
}
