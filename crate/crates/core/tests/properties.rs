mod common;

use std::f64::consts::PI;

use exaug::cloud::{
    depth_to_cloud, height_mask, sparsity_weights, transform_cloud, DepthMap, PointCloud,
    FRAME_ROBOT,
};
use exaug::geometry::{normalize_angle, CameraModel, Pose2D, Transform3D};
use exaug::objective::{
    geo_cost, j_diff, j_geo, j_pose, j_trav, rollout, rollout_from, total_objective, Command,
    GeoCloud, GeoMask, ObjectiveWeights, RobotParams,
};
use exaug::optimizer::{parameterize, unparameterize};
use exaug::scene::{generate_suite, SceneDescription, SuiteParams};
use exaug::viewsynth::{blend, ColorImage};
use nalgebra::Vector3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{ref_rollout, ref_weights};

fn cameras() -> Vec<CameraModel> {
    vec![
        CameraModel::pinhole(64, 48, 50.0, 52.0, 31.5, 23.5).unwrap(),
        CameraModel::fisheye(64, 64, 20.0, 20.0, 31.5, 31.5, 1.5).unwrap(),
        CameraModel::equirectangular(128, 64).unwrap(),
    ]
}

fn transform() -> impl Strategy<Value = Transform3D> {
    (
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
        -PI..PI,
        (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64),
    )
        .prop_filter("axis must not vanish", |(a, _, _)| {
            Vector3::new(a.0, a.1, a.2).norm() > 0.1
        })
        .prop_map(|(a, angle, t)| {
            Transform3D::from_axis_angle(
                Vector3::new(a.0, a.1, a.2),
                angle,
                Vector3::new(t.0, t.1, t.2),
            )
        })
}

proptest! {
    #[test]
    fn back_projected_pixels_project_home(
        cam in 0usize..3,
        fu in 0.0..1.0f64,
        fv in 0.0..1.0f64,
        depth in 0.1..50.0f64,
    ) {
        let cam = &cameras()[cam];
        let u = ((cam.width() - 1) as f64 * fu).round() as usize;
        let v = ((cam.height() - 1) as f64 * fv).round() as usize;
        prop_assume!(cam.ray(u as f64, v as f64).is_some());
        let p = cam.back_project(u, v, depth).unwrap();
        prop_assert!((cam.point_depth(&p) - depth).abs() < 1e-9 * depth.max(1.0));
        let px = cam.project(&p).unwrap().expect("in view");
        prop_assert!((px.u - u as f64).abs() < 1e-6 && (px.v - v as f64).abs() < 1e-6);
    }

    #[test]
    fn transform_composition_is_associative(a in transform(), b in transform(), c in transform(),
                                            p in (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64)) {
        let p = Vector3::new(p.0, p.1, p.2);
        let left = a.compose(&b).compose(&c).apply(&p);
        let right = a.compose(&b.compose(&c)).apply(&p);
        let direct = a.apply(&b.apply(&c.apply(&p)));
        prop_assert!((left - right).norm() < 1e-9);
        prop_assert!((left - direct).norm() < 1e-9);
        prop_assert!((a.inverse().apply(&a.apply(&p)) - p).norm() < 1e-9);
    }

    #[test]
    fn relative_pose_recomposes(x in -5.0..5.0f64, y in -5.0..5.0f64, t in -PI..PI,
                                x2 in -5.0..5.0f64, y2 in -5.0..5.0f64, t2 in -PI..PI) {
        let a = Pose2D::new(x, y, t);
        let b = Pose2D::new(x2, y2, t2);
        let back = a.compose(&a.relative(&b));
        prop_assert!((back.x - b.x).abs() < 1e-9 && (back.y - b.y).abs() < 1e-9);
        prop_assert!(normalize_angle(back.theta - b.theta).abs() < 1e-9);
        // The planar pose and its 3D lift agree.
        let p = Vector3::new(0.3, -0.7, 0.2);
        let (qx, qy) = a.transform_point(p.x, p.y);
        let q = a.to_transform().apply(&p);
        prop_assert!((q - Vector3::new(qx, qy, 0.2)).norm() < 1e-12);
    }

    #[test]
    fn height_mask_grows_with_band(zs in prop::collection::vec(-1.0..2.0f64, 1..60),
                                   lo in -0.5..0.5f64, hi in 0.6..1.5f64, grow in 0.0..0.5f64) {
        let pts: Vec<_> = zs.iter().enumerate().map(|(i, z)| Vector3::new(i as f64, 0.0, *z)).collect();
        let cloud = PointCloud::from_points(FRAME_ROBOT, pts);
        let narrow = height_mask(&cloud, lo, hi).unwrap();
        let wide = height_mask(&cloud, lo - grow, hi + grow).unwrap();
        for ((n, w), z) in narrow.iter().zip(&wide).zip(&zs) {
            prop_assert!(!n || *w);
            prop_assert_eq!(*n, *z >= lo && *z <= hi);
        }
    }

    #[test]
    fn blend_stays_within_channel_range(
        cands in prop::collection::vec(((0u8..=255, 0u8..=255, 0u8..=255), 0.0..2.0f64), 1..5)
    ) {
        let c: Vec<([u8; 3], f64)> = cands.iter().map(|((r, g, b), l)| ([*r, *g, *b], *l)).collect();
        let out = blend(&c).unwrap();
        for (ch, o) in out.iter().enumerate() {
            let lo = c.iter().map(|x| x.0[ch]).min().unwrap();
            let hi = c.iter().map(|x| x.0[ch]).max().unwrap();
            prop_assert!(*o >= lo && *o <= hi);
        }
    }

    #[test]
    fn parameterization_respects_limits(raw in prop::collection::vec(-30.0..30.0f64, 16),
                                        v_max in 0.1..2.0f64, w_max in 0.1..2.0f64, fwd in any::<bool>()) {
        let cmds = parameterize(&raw, v_max, w_max, fwd);
        for c in &cmds {
            prop_assert!(c.v.abs() <= v_max && c.omega.abs() <= w_max);
            if fwd {
                prop_assert!(c.v >= 0.0);
            }
        }
        // Inside the inverse's clamp edge (tanh 0.98) the map inverts.
        let mild: Vec<f64> = raw.iter().map(|r| r / 15.0).collect();
        let again = unparameterize(&parameterize(&mild, v_max, w_max, fwd), v_max, w_max, fwd);
        for (a, b) in mild.iter().zip(&again) {
            prop_assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn rollout_matches_reference(cmds in prop::collection::vec((-1.0..1.0f64, -1.5..1.5f64), 1..12),
                                 dt in 0.05..0.5f64) {
        let commands: Vec<Command> = cmds.iter().map(|(v, w)| Command::new(*v, *w)).collect();
        let got = rollout(&commands, dt).unwrap();
        for (g, r) in got.iter().zip(ref_rollout(&cmds, dt)) {
            prop_assert!((g.x - r.0).abs() < 1e-12 && (g.y - r.1).abs() < 1e-12);
            prop_assert!(normalize_angle(g.theta - r.2).abs() < 1e-12);
        }
    }

    #[test]
    fn sparsity_weights_match_reference(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cloud = common::random_cloud(&mut rng, 12, 9, 0.5, 4.0);
        let got = sparsity_weights(&cloud);
        for (g, r) in got.iter().zip(ref_weights(&cloud)) {
            prop_assert!(*g >= 0.0);
            prop_assert!((g - r).abs() <= 1e-12 * r.max(1.0));
        }
    }

    #[test]
    fn mask_is_strict_and_monotone_in_radius(seed in any::<u64>(), r in 0.0..1.5f64, grow in 0.0..0.5f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cloud = common::random_cloud(&mut rng, 10, 6, 0.3, 2.0);
        let geo = GeoCloud::new(&cloud, 0.0, 1.0).unwrap();
        let wps = rollout(&[Command::new(0.4, 0.3); 4], 0.33).unwrap();
        let small = GeoMask::compute(&wps, &geo, r);
        let big = GeoMask::compute(&wps, &geo, r + grow);
        prop_assert!(small.inside.iter().zip(&big.inside).all(|(s, b)| !s || *b));
        prop_assert_eq!(GeoMask::compute(&wps, &geo, 0.0).count(), 0);
    }

    #[test]
    fn image_and_depth_files_round_trip(w in 2usize..9, h in 2usize..9, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let img = ColorImage::new(w, h, (0..w * h).map(|_| rng.random()).collect()).unwrap();
        let mut buf = Vec::new();
        img.write_ppm(&mut buf).unwrap();
        prop_assert_eq!(ColorImage::read_ppm(&buf[..]).unwrap(), img);

        let vals: Vec<f64> = (0..w * h)
            .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.1f32..20.0) as f64 })
            .collect();
        let depth = DepthMap::new(w, h, vals).unwrap();
        let mut buf = Vec::new();
        depth.write_exdm(&mut buf).unwrap();
        prop_assert_eq!(DepthMap::read_exdm(&buf[..]).unwrap(), depth);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generated_scenes_round_trip_through_json(seed in any::<u64>()) {
        let scenes = generate_suite(seed, 1, &SuiteParams::default()).unwrap();
        let s = &scenes[0];
        let back = SceneDescription::from_json(&s.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, s);
        back.validate().unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cloud_transforms_compose(a in transform(), b in transform(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cloud = common::random_cloud(&mut rng, 8, 6, 0.5, 3.0);
        let twice = transform_cloud(&transform_cloud(&cloud, &a, "x"), &b, "y");
        let once = transform_cloud(&cloud, &b.compose(&a), "y");
        for (p, q) in twice.points().iter().zip(once.points()) {
            match (p, q) {
                (Some(p), Some(q)) => prop_assert!((p - q).norm() < 1e-9),
                (None, None) => {}
                _ => prop_assert!(false, "validity changed"),
            }
        }
    }

    #[test]
    fn raising_the_floor_never_adds_points(seed in any::<u64>(), lo in -0.5..0.5f64, step in 0.0..0.5f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cloud = common::random_cloud(&mut rng, 10, 8, 0.3, 3.0);
        let count = |h: f64| height_mask(&cloud, h, 2.0).unwrap().iter().filter(|m| **m).count();
        prop_assert!(count(lo + step) <= count(lo));
    }

    #[test]
    fn objective_terms_are_frame_independent(
        seed in any::<u64>(),
        sx in -3.0..3.0f64, sy in -3.0..3.0f64, st in -PI..PI,
    ) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cloud = common::random_cloud(&mut rng, 16, 8, 0.2, 2.0);
        let geo = GeoCloud::new(&cloud, 0.2, 0.65).unwrap();
        let cmds: Vec<Command> = (0..8)
            .map(|_| Command::new(rng.random_range(-0.5..0.5), rng.random_range(-1.0..1.0)))
            .collect();
        let goal = Pose2D::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), 0.0);
        let r = rng.random_range(0.1..1.0);
        let start = Pose2D::new(sx, sy, st);

        let local = rollout(&cmds, 0.33).unwrap();
        let world = rollout_from(&start, &cmds, 0.33).unwrap();
        let geo_world = geo.transformed(&start);
        let goal_world = start.compose(&goal);
        let (a, b) = (geo_cost(&local, &geo, r), geo_cost(&world, &geo_world, r));
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        let (a, b) = (j_pose(&local, &goal).unwrap(), j_pose(&world, &goal_world).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn total_is_the_weighted_sum_of_terms(seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cloud = common::random_cloud(&mut rng, 16, 8, 0.2, 2.0);
        let cmds: Vec<Command> = (0..8)
            .map(|_| Command::new(rng.random_range(-0.5..0.5), rng.random_range(-1.0..1.0)))
            .collect();
        let params = RobotParams { r_s: rng.random_range(0.1..1.0), ..RobotParams::default() };
        let w = ObjectiveWeights {
            w_g: rng.random_range(0.0..1e4),
            w_d: rng.random_range(0.0..1.0),
            w_t: rng.random_range(0.0..1.0),
        };
        let goal = Pose2D::new(1.0, 0.5, 0.0);
        let gt: Vec<f64> = (0..8).map(|_| f64::from(rng.random_range(0..2u8))).collect();
        let pred: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..1.0)).collect();
        let b = total_objective(&cmds, 0.33, &goal, &cloud, &params, &w, &gt, &pred).unwrap();
        let wps = rollout(&cmds, 0.33).unwrap();
        let expect = j_pose(&wps, &goal).unwrap()
            + w.w_g * j_geo(&wps, &cloud, &params).unwrap()
            + w.w_d * j_diff(&cmds)
            + w.w_t * j_trav(&pred, &gt).unwrap();
        prop_assert!((b.total - expect).abs() <= 1e-12 * expect.max(1.0));
    }
}

#[test]
fn collision_cost_grows_with_radius_when_the_mask_is_fixed() {
    // Both points are inside either radius, so only the penetration depths change.
    let geo = GeoCloud {
        xy: vec![[0.1, 0.0], [0.0, 0.2]],
        weights: vec![1.0, 0.5],
    };
    let wps = [Pose2D::origin()];
    let costs: Vec<f64> = [0.3, 0.4, 0.6, 1.0]
        .iter()
        .map(|r| geo_cost(&wps, &geo, *r))
        .collect();
    assert!(costs.windows(2).all(|c| c[1] > c[0]), "{costs:?}");
}

#[test]
fn frontal_wall_weights_are_uniform_for_a_pinhole() {
    // Planar wall at constant z-depth: neighbour spacing is depth / focal length everywhere.
    let cam = CameraModel::pinhole(20, 16, 25.0, 25.0, 9.5, 7.5).unwrap();
    let depth = DepthMap::new(20, 16, vec![2.0; 320]).unwrap();
    let cloud = depth_to_cloud(&cam, &depth).unwrap();
    let w = sparsity_weights(&cloud);
    let expect = (2.0 * 2.0 / 25.0) * (2.0 * 2.0 / 25.0);
    for v in 1..15 {
        for u in 1..19 {
            assert!((w[v * 20 + u] - expect).abs() < 1e-12);
        }
    }
}
