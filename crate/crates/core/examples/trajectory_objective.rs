//! Evaluates every term of the trajectory objective for a straight command sequence
//! that passes a post, with two robot radii.
//!
//! ```bash
//! cargo run --example trajectory_objective
//! ```

use exaug::geometry::Pose2D;
use exaug::objective::{
    j_geo, j_trav, rollout, total_objective, traversability_gt, Command, ObjectiveWeights,
    RobotParams,
};
use exaug::scene::{default_nav_camera, scene_cloud, Primitive, SceneDescription};

fn main() -> exaug::Result<()> {
    let scene = SceneDescription {
        primitives: vec![
            Primitive::Ground {
                height: 0.0,
                albedo: [120, 110, 100],
            },
            Primitive::Cylinder {
                center: [0.9, 0.35],
                radius: 0.1,
                z_min: 0.0,
                z_max: 1.0,
                albedo: [60, 90, 200],
            },
        ],
        start: Pose2D::origin(),
        goal: Pose2D::new(1.3, 0.0, 0.0),
        subgoals: vec![],
    };
    let cloud = scene_cloud(&scene, &scene.start, &default_nav_camera(), 8.0)?;
    let commands = vec![Command::new(0.5, 0.0); 8];
    let waypoints = rollout(&commands, 0.33)?;
    let goal = Pose2D::new(1.3, 0.0, 0.0);
    for r_s in [0.2, 0.5] {
        let params = RobotParams {
            r_s,
            ..RobotParams::default()
        };
        let gt = traversability_gt(&waypoints, &cloud, &params)?;
        let b = total_objective(
            &commands,
            0.33,
            &goal,
            &cloud,
            &params,
            &ObjectiveWeights::default(),
            &gt,
            &gt,
        )?;
        println!("r_s = {r_s}");
        println!(
            "  j_pose {:.4}  j_geo {:.3e}  j_diff {:.4}  total {:.4}",
            b.j_pose, b.j_geo, b.j_diff, b.total
        );
        println!(
            "  j_geo (direct) {:.3e}",
            j_geo(&waypoints, &cloud, &params)?
        );
        println!("  traversability at r_s' = {}: {:?}", params.r_s_prime, gt);
        println!(
            "  j_trav of an all-clear prediction: {}",
            j_trav(&vec![1.0; gt.len()], &gt)?
        );
    }
    Ok(())
}
