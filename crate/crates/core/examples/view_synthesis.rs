//! Renders a spherical view, then synthesizes what a pinhole camera would see after the
//! robot moves forward and turns, and compares it with a direct render.
//!
//! ```bash
//! cargo run --example view_synthesis -- /tmp/out
//! ```

use std::fs::File;
use std::path::PathBuf;

use exaug::geometry::{CameraModel, Pose2D, Transform3D};
use exaug::scene::{narrow_gap_fixture, render_from_robot};
use exaug::viewsynth::{relative_camera_transform, synthesize_view_with, SynthesisOptions};

fn main() -> exaug::Result<()> {
    let out_dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "target/view_synthesis".into()),
    );
    std::fs::create_dir_all(&out_dir).map_err(|e| exaug::Error::InvalidInput(e.to_string()))?;

    let scene = narrow_gap_fixture();
    let mount = Transform3D::camera_mount([0.0, 0.0, 0.5], 0.0, 0.0);
    let source_cam = CameraModel::equirectangular(512, 256)?.with_mount(mount);
    let target_cam = CameraModel::pinhole(160, 120, 90.0, 90.0, 79.5, 59.5)?.with_mount(mount);

    let source_pose = scene.start;
    let moved = Pose2D::new(0.4, 0.1, 0.2);
    let target_pose = source_pose.compose(&moved);

    let source = render_from_robot(&scene, &source_pose, &source_cam, 10.0)?;
    let t = relative_camera_transform(&source_cam, &target_cam, &moved);
    let out = synthesize_view_with(
        &source.color,
        &source.depth,
        &source_cam,
        &target_cam,
        &t,
        &SynthesisOptions::default(),
    )?;
    let truth = render_from_robot(&scene, &target_pose, &target_cam, 10.0)?;

    let (mut err, mut n) = (0.0, 0usize);
    for v in 0..target_cam.height() {
        for u in 0..target_cam.width() {
            if out.splatted[v * target_cam.width() + u] && truth.depth.is_valid(u, v) {
                let (a, b) = (out.image.get(u, v), truth.color.get(u, v));
                err += (0..3)
                    .map(|c| (a[c] as f64 - b[c] as f64).abs())
                    .sum::<f64>()
                    / 3.0;
                n += 1;
            }
        }
    }
    println!(
        "synthesized {} of {} pixels from splats",
        n,
        target_cam.width() * target_cam.height()
    );
    println!(
        "mean absolute error vs direct render: {:.2}/255",
        err / n.max(1) as f64
    );

    let save = |name: &str, img: &exaug::viewsynth::ColorImage| -> exaug::Result<()> {
        let path = out_dir.join(name);
        let f = File::create(&path).map_err(|e| exaug::Error::InvalidInput(e.to_string()))?;
        img.write_ppm(std::io::BufWriter::new(f))
            .map_err(|e| exaug::Error::InvalidInput(e.to_string()))?;
        println!("wrote {}", path.display());
        Ok(())
    };
    save("source.ppm", &source.color)?;
    save("synthesized.ppm", &out.image)?;
    save("direct.ppm", &truth.color)?;
    Ok(())
}
