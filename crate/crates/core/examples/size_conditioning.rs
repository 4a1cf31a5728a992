//! Same scene, same goal, two robot radii: the larger robot keeps further from the
//! pillars of a narrow gap.
//!
//! ```bash
//! cargo run --release --example size_conditioning
//! ```

use exaug::objective::{j_geo, GeoCloud, ObjectiveWeights, RobotParams};
use exaug::optimizer::{optimize, Instance, OptimizerConfig};
use exaug::scene::{default_nav_camera, narrow_gap_fixture, scene_cloud, OBSTACLE_BAND};

fn main() -> exaug::Result<()> {
    let scene = narrow_gap_fixture();
    let cloud = scene_cloud(&scene, &scene.start, &default_nav_camera(), 8.0)?;
    let goal = scene.start.relative(&scene.goal);
    for r_s in [0.2, 1.0] {
        let params = RobotParams {
            r_s,
            ..RobotParams::default()
        };
        let geo = GeoCloud::for_robot(&cloud, &params)?;
        let result = optimize(
            &Instance::new(goal, geo, params, ObjectiveWeights::default()),
            &OptimizerConfig::default(),
        )?;
        let wps = &result.trajectory.waypoints;
        let clearance = wps
            .iter()
            .map(|p| scene.obstacle_clearance(p.x, p.y, OBSTACLE_BAND))
            .fold(f64::INFINITY, f64::min);
        let last = wps.last().expect("non-empty horizon");
        println!(
            "r_s {r_s:.1}: min clearance {clearance:.3} m, j_geo {:.3e}, end ({:.2}, {:.2})",
            j_geo(wps, &cloud, &params)?,
            last.x,
            last.y
        );
    }
    Ok(())
}
