//! Projects the same robot-frame points through pinhole, fisheye and equirectangular
//! cameras, then back-projects the pixels to recover them.
//!
//! ```bash
//! cargo run --example camera_models
//! ```

use exaug::geometry::{CameraModel, Point3, Transform3D};

fn main() -> exaug::Result<()> {
    let mount = Transform3D::camera_mount([0.0, 0.0, 0.5], 0.0, 0.0);
    let cameras = [
        (
            "pinhole",
            CameraModel::pinhole(160, 120, 100.0, 100.0, 79.5, 59.5)?.with_mount(mount),
        ),
        (
            "fisheye",
            CameraModel::fisheye(
                160,
                160,
                50.0,
                50.0,
                79.5,
                79.5,
                std::f64::consts::FRAC_PI_2,
            )?
            .with_mount(mount),
        ),
        (
            "equirectangular",
            CameraModel::equirectangular(256, 128)?.with_mount(mount),
        ),
    ];
    let robot_points = [
        Point3::new(2.0, 0.0, 0.5),
        Point3::new(2.0, 0.8, 0.2),
        Point3::new(0.5, -1.5, 1.0),
        Point3::new(-1.0, 0.0, 0.5),
    ];
    for (name, cam) in &cameras {
        println!(
            "{name} ({}x{}, {:?})",
            cam.width(),
            cam.height(),
            cam.kind()
        );
        for p in &robot_points {
            let pc = cam.mount().apply(p);
            match cam.project(&pc)? {
                Some(px) => {
                    // Round trip through the nearest pixel centre.
                    let (u, v) = (px.u.round() as usize, px.v.round() as usize);
                    let depth = cam.point_depth(&pc);
                    let back = cam.back_project(u, v, depth)?;
                    let again = cam.project(&back)?.expect("pixel centre reprojects");
                    println!(
                        "  {:>5.2?} -> pixel ({:7.2}, {:7.2}), depth {depth:.3}; centre ({u}, {v}) round trip error {:.1e} px",
                        p.as_slice(),
                        px.u,
                        px.v,
                        (again.u - u as f64).hypot(again.v - v as f64)
                    );
                }
                None => println!("  {:>5.2?} -> not visible", p.as_slice()),
            }
        }
    }
    Ok(())
}
