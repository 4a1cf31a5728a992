//! Generates a seeded scene and raycasts colour and depth from its start pose.
//!
//! ```bash
//! cargo run --release --example render_scene -- 42 /tmp/scene
//! ```

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use exaug::scene::{default_nav_camera, generate_suite, render_from_robot, SuiteParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(42);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/render_scene".into()));
    std::fs::create_dir_all(&out)?;

    let scene = generate_suite(seed, 1, &SuiteParams::default())?.remove(0);
    let cam = default_nav_camera();
    let render = render_from_robot(&scene, &scene.start, &cam, 8.0)?;
    render
        .color
        .write_ppm(BufWriter::new(File::create(out.join("color.ppm"))?))?;
    render
        .depth
        .write_exdm(BufWriter::new(File::create(out.join("depth.exdm"))?))?;
    std::fs::write(out.join("scene.json"), scene.to_json()?)?;
    println!(
        "{} primitives, {} of {} pixels hit, written to {}",
        scene.primitives.len(),
        render.depth.valid_count(),
        cam.width() * cam.height(),
        out.display()
    );
    Ok(())
}
