use std::path::Path;
use std::process::{Command, Output};

use exaug::cloud::DepthMap;
use exaug::navsim::NavMetrics;
use exaug::scene::{blocked_start_fixture, narrow_gap_fixture, SceneDescription};
use exaug::suite::SuiteReport;
use exaug::viewsynth::ColorImage;

fn exaug(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exaug"))
        .args(args)
        .env_remove("EXAUG_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_scene(dir: &Path, name: &str, scene: &SceneDescription) -> String {
    let path = dir.join(name);
    std::fs::write(&path, scene.to_json().unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn usage_errors_exit_2_and_help_exits_0() {
    assert_eq!(code(&exaug(&["--help"])), 0);
    assert_eq!(code(&exaug(&["nav", "--help"])), 0);
    assert_eq!(code(&exaug(&["frobnicate"])), 2);
    assert_eq!(
        code(&exaug(&[
            "nav",
            "--scene",
            "/nonexistent/scene.json",
            "--out",
            "/tmp/x.json"
        ])),
        2
    );
    assert_eq!(
        code(&exaug(&[
            "optimize", "--scene", "x.json", "--out", "o.csv", "--pose", "1,nope"
        ])),
        2
    );
}

#[test]
fn bad_thread_variable_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_exaug"))
        .args(["selftest", "--instances", "1"])
        .env("EXAUG_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn selftest_passes() {
    let o = exaug(&["selftest", "--instances", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn render_writes_readable_images() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), "s.json", &narrow_gap_fixture());
    let (c, d) = (dir.path().join("c.ppm"), dir.path().join("d.exdm"));
    let o = exaug(&[
        "scene",
        "render",
        "--scene",
        &scene,
        "--out-color",
        p(&c),
        "--out-depth",
        p(&d),
    ]);
    assert_eq!(code(&o), 0);
    let img = ColorImage::read_ppm(&std::fs::read(&c).unwrap()[..]).unwrap();
    let depth = DepthMap::read_exdm(&std::fs::read(&d).unwrap()[..]).unwrap();
    assert_eq!((img.width(), img.height()), (depth.width(), depth.height()));
    assert!(depth.valid_count() > 0);
}

#[test]
fn identity_warp_reproduces_the_source() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), "s.json", &narrow_gap_fixture());
    let cam = serde_json::json!({
        "kind": "pinhole", "width": 48, "height": 32,
        "fx": 30.0, "fy": 30.0, "cx": 23.5, "cy": 15.5,
        "mount": exaug::geometry::Transform3D::camera_mount([0.0, 0.0, 0.5], 0.0, 0.0)
    });
    let cam_path = dir.path().join("cam.json");
    std::fs::write(&cam_path, cam.to_string()).unwrap();
    let (c, d, w) = (
        dir.path().join("c.ppm"),
        dir.path().join("d.exdm"),
        dir.path().join("w.ppm"),
    );
    let o = exaug(&[
        "scene",
        "render",
        "--scene",
        &scene,
        "--cam",
        p(&cam_path),
        "--out-color",
        p(&c),
        "--out-depth",
        p(&d),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = exaug(&[
        "warp",
        "--src-image",
        p(&c),
        "--src-depth",
        p(&d),
        "--src-cam",
        p(&cam_path),
        "--dst-cam",
        p(&cam_path),
        "--pose",
        "0,0,0",
        "--out",
        p(&w),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let src = ColorImage::read_ppm(&std::fs::read(&c).unwrap()[..]).unwrap();
    let out = ColorImage::read_ppm(&std::fs::read(&w).unwrap()[..]).unwrap();
    let depth = DepthMap::read_exdm(&std::fs::read(&d).unwrap()[..]).unwrap();
    for v in 0..src.height() {
        for u in 0..src.width() {
            if depth.is_valid(u, v) {
                assert_eq!(src.get(u, v), out.get(u, v), "pixel ({u}, {v})");
            }
        }
    }
}

#[test]
fn generate_writes_numbered_scenes_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = exaug(&[
            "--seed",
            "7",
            "scene",
            "generate",
            "--count",
            "3",
            "--out",
            p(d.path()),
        ]);
        assert_eq!(code(&o), 0);
    }
    for i in 0..3 {
        let name = format!("scene_{i:03}.json");
        let x = std::fs::read(a.path().join(&name)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(&name)).unwrap());
        SceneDescription::from_json(std::str::from_utf8(&x).unwrap())
            .unwrap()
            .validate()
            .unwrap();
    }
}

#[test]
fn optimize_writes_trajectory_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), "s.json", &narrow_gap_fixture());
    let (csv, rep) = (dir.path().join("t.csv"), dir.path().join("r.json"));
    let o = exaug(&[
        "optimize",
        "--scene",
        &scene,
        "--iters",
        "50",
        "--restarts",
        "2",
        "--lr",
        "0.05",
        "--out",
        p(&csv),
        "--report",
        p(&rep),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "step,v,omega,x,y,theta,t");
    assert_eq!(text.lines().count(), 9);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert!(
        report["result"]["final_objective"].as_f64().unwrap()
            <= report["result"]["initial_objective"].as_f64().unwrap()
    );
}

#[test]
fn nav_failure_exits_1_with_pivot_only_trace() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), "s.json", &blocked_start_fixture());
    let (out, trace) = (dir.path().join("m.json"), dir.path().join("t.csv"));
    let o = exaug(&[
        "nav",
        "--scene",
        &scene,
        "--max-steps",
        "6",
        "--out",
        p(&out),
        "--trace",
        p(&trace),
    ]);
    assert_eq!(code(&o), 1);
    let m: NavMetrics = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(!m.goal_arrival && m.steps == 6 && m.path_length == 0.0);
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,x,y,theta,v,omega,n_c,t1,pivot_flag"
    );
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!((f[4], f[8]), ("0", "1"), "{line}");
    }
}

#[test]
fn nav_graph_reload_and_suite_row_agree() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite");
    std::fs::create_dir(&suite).unwrap();
    let scene = write_scene(&suite, "a.json", &narrow_gap_fixture());
    let (m1, m2, g) = (
        dir.path().join("m1.json"),
        dir.path().join("m2.json"),
        dir.path().join("g.json"),
    );
    let o = exaug(&[
        "nav",
        "--scene",
        &scene,
        "--out",
        p(&m1),
        "--write-graph",
        p(&g),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = exaug(&["nav", "--scene", &scene, "--graph", p(&g), "--out", p(&m2)]);
    assert_eq!(code(&o), 0);
    let a: NavMetrics = serde_json::from_str(&std::fs::read_to_string(&m1).unwrap()).unwrap();
    let b: NavMetrics = serde_json::from_str(&std::fs::read_to_string(&m2).unwrap()).unwrap();
    assert_eq!(a, b);

    let report = dir.path().join("r.json");
    let o = exaug(&[
        "eval-suite",
        "--suite",
        p(&suite),
        "--rs",
        "0.3",
        "--rs-prime",
        "0.2",
        "--omega-max",
        "1.0",
        "--out",
        p(&report),
    ]);
    assert_eq!(code(&o), 0);
    let r: SuiteReport = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r.episodes.len(), 1);
    assert_eq!(r.episodes[0].metrics, a);
}

#[test]
fn eval_suite_grid_axes() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite");
    std::fs::create_dir(&suite).unwrap();
    write_scene(&suite, "a.json", &narrow_gap_fixture());
    let report = dir.path().join("r.json");
    let read = || -> SuiteReport {
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap()
    };

    // A flag without values empties the grid.
    let o = exaug(&[
        "eval-suite",
        "--suite",
        p(&suite),
        "--rs",
        "--out",
        p(&report),
    ]);
    assert_eq!(code(&o), 0);
    let r = read();
    assert!(r.episodes.is_empty() && r.groups.is_empty());

    // Omitted axes take the default value.
    let o = exaug(&[
        "eval-suite",
        "--suite",
        p(&suite),
        "--rs",
        "0.2,1.0",
        "--max-steps",
        "3",
        "--out",
        p(&report),
    ]);
    assert_eq!(code(&o), 0);
    let r = read();
    let radii: Vec<f64> = r.groups.iter().map(|g| g.r_s).collect();
    assert_eq!(radii, vec![0.2, 1.0]);
    assert!(r
        .groups
        .iter()
        .all(|g| g.r_s_prime == 0.2 && g.omega_max == 1.0 && g.min_clearance.is_some()));
}

#[test]
fn output_naming_a_directory_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), "s.json", &narrow_gap_fixture());
    let t = std::time::Instant::now();
    let o = exaug(&["nav", "--scene", &scene, "--out", p(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(t.elapsed() < std::time::Duration::from_secs(2));
}
