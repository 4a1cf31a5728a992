//! Scalar reference implementations shared by the integration tests. They are written
//! independently of the library code and favour obviousness over speed.

#![allow(dead_code)]

use exaug::cloud::{
    depth_to_cloud, transform_cloud, DepthMap, PointCloud, FRAME_CAMERA, FRAME_ROBOT,
};
use exaug::geometry::{CameraModel, Pose2D, Transform3D};
use exaug::viewsynth::{ColorImage, Rgb};
use nalgebra::Vector3;
use rand::Rng;

/// Forward Euler, position advanced with the heading before the rotation.
pub fn ref_rollout(cmds: &[(f64, f64)], dt: f64) -> Vec<(f64, f64, f64)> {
    let (mut x, mut y, mut th) = (0.0f64, 0.0f64, 0.0f64);
    cmds.iter()
        .map(|&(v, w)| {
            x += v * dt * th.cos();
            y += v * dt * th.sin();
            th += w * dt;
            (x, y, th)
        })
        .collect()
}

/// Product of 3D neighbour spacings, zero on the border or next to a hole.
pub fn ref_weights(cloud: &PointCloud) -> Vec<f64> {
    let (w, h) = (cloud.width(), cloud.height());
    let mut out = vec![0.0; w * h];
    for v in 0..h {
        for u in 0..w {
            if u == 0 || v == 0 || u + 1 == w || v + 1 == h {
                continue;
            }
            let p = |a: usize, b: usize| cloud.get(a, b).copied();
            let (Some(_), Some(l), Some(r), Some(t), Some(b)) =
                (p(u, v), p(u - 1, v), p(u + 1, v), p(u, v - 1), p(u, v + 1))
            else {
                continue;
            };
            let dx = ((l.x - r.x).powi(2) + (l.y - r.y).powi(2) + (l.z - r.z).powi(2)).sqrt();
            let dy = ((t.x - b.x).powi(2) + (t.y - b.y).powi(2) + (t.z - b.z).powi(2)).sqrt();
            out[v * w + u] = dx * dy;
        }
    }
    out
}

/// Triple loop over waypoints and cloud pixels: height mask, strict radius mask,
/// spacing weights, normalised by the number of (waypoint, point) pairs inside.
pub fn ref_j_geo(wps: &[(f64, f64)], cloud: &PointCloud, r: f64, h_min: f64, h_max: f64) -> f64 {
    let weights = ref_weights(cloud);
    let mut sum = 0.0;
    let mut count = 0usize;
    for &(x, y) in wps {
        for v in 0..cloud.height() {
            for u in 0..cloud.width() {
                let Some(p) = cloud.get(u, v) else { continue };
                if p.z < h_min || p.z > h_max {
                    continue;
                }
                let d = ((p.x - x).powi(2) + (p.y - y).powi(2)).sqrt();
                if d < r {
                    count += 1;
                    sum += weights[v * cloud.width() + u] * (r - d) * (r - d);
                }
            }
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Random robot-frame cloud seen by a small equirectangular camera at 0.4 m height,
/// with ranges in `[r_min, r_max]` and some holes.
pub fn random_cloud<R: Rng>(rng: &mut R, w: usize, h: usize, r_min: f64, r_max: f64) -> PointCloud {
    let cam = CameraModel::equirectangular_bounded(w, h, -1.4, 1.4, -0.6, 0.6)
        .unwrap()
        .with_mount(Transform3D::camera_mount([0.0, 0.0, 0.4], 0.0, 0.0));
    // Smooth range field so neighbour spacings stay meaningful.
    let (a, b, c) = (
        rng.random_range(0.0..1.0),
        rng.random_range(0.5..3.0),
        rng.random_range(0.0..6.0),
    );
    let values = (0..w * h)
        .map(|i| {
            if rng.random_bool(0.05) {
                return 0.0;
            }
            let s = (i % w) as f64 / w as f64;
            let t = 0.5 + 0.5 * (b * s * 6.0 + c).sin();
            r_min + (r_max - r_min) * (a * t + (1.0 - a) * rng.random_range(0.0..1.0) * 0.3)
        })
        .collect();
    let depth = DepthMap::new(w, h, values).unwrap();
    let cloud = depth_to_cloud(&cam, &depth).unwrap();
    transform_cloud(&cloud, &cam.mount().inverse(), FRAME_ROBOT)
}

fn ref_blend(c: &[(Rgb, f64)]) -> Option<Rgb> {
    if c.is_empty() {
        return None;
    }
    if c.len() == 1 {
        return Some(c[0].0);
    }
    let zero: Vec<Rgb> = c.iter().filter(|x| x.1 == 0.0).map(|x| x.0).collect();
    let mut out = [0u8; 3];
    for ch in 0..3 {
        let val = if !zero.is_empty() {
            zero.iter().map(|z| z[ch] as f64).sum::<f64>() / zero.len() as f64
        } else {
            let s: f64 = c.iter().map(|x| x.1).sum();
            let mut num = 0.0;
            let mut den = 0.0;
            for (col, l) in c {
                let wgt = (s - l) / s;
                num += wgt * col[ch] as f64;
                den += wgt;
            }
            num / den
        };
        out[ch] = val.round().clamp(0.0, 255.0) as u8;
    }
    Some(out)
}

fn snap(x: f64) -> f64 {
    if (x - x.round()).abs() <= 1e-9 {
        x.round()
    } else {
        x
    }
}

/// Brute-force painter's algorithm: for every target pixel and each of the four
/// rounding combinations, the nearest point wins; among equal distances the later
/// source pixel wins. Returns the blended image and the filled mask.
pub fn ref_splat_merge(
    img: &ColorImage,
    cloud_t: &PointCloud,
    target: &CameraModel,
) -> (Vec<Rgb>, Vec<bool>) {
    let (tw, th) = (target.width(), target.height());
    let mut proj = Vec::new();
    for v in 0..cloud_t.height() {
        for u in 0..cloud_t.width() {
            let Some(p) = cloud_t.get(u, v) else { continue };
            if let Some(px) = target.project(p).unwrap() {
                proj.push((p.norm(), v * cloud_t.width() + u, snap(px.u), snap(px.v)));
            }
        }
    }
    let mut out = vec![[0u8; 3]; tw * th];
    let mut filled = vec![false; tw * th];
    for ty in 0..th {
        for tx in 0..tw {
            let mut cands = Vec::new();
            for layer in 0..4 {
                let mut best: Option<(f64, usize, f64)> = None;
                for &(n, idx, u, v) in &proj {
                    let cu = if layer < 2 { u.ceil() } else { u.floor() };
                    let cv = if layer % 2 == 0 { v.ceil() } else { v.floor() };
                    if cu != tx as f64 || cv != ty as f64 {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((bn, bi, _)) => n < bn || (n == bn && idx > bi),
                    };
                    if better {
                        best = Some((n, idx, (cu - u).hypot(cv - v)));
                    }
                }
                if let Some((_, idx, dist)) = best {
                    cands.push((img.pixels()[idx], dist));
                }
            }
            if let Some(c) = ref_blend(&cands) {
                out[ty * tw + tx] = c;
                filled[ty * tw + tx] = true;
            }
        }
    }
    (out, filled)
}

/// Hole filling by exhaustive scans in the four axis directions, falling back to the
/// four nearest filled pixels overall (ties broken by raster index).
pub fn ref_fill(img: &[Rgb], filled: &[bool], w: usize, h: usize) -> Vec<Rgb> {
    let mut out = img.to_vec();
    let dist = |a: (usize, usize), b: (usize, usize)| {
        (a.0 as f64 - b.0 as f64).hypot(a.1 as f64 - b.1 as f64)
    };
    for y in 0..h {
        for x in 0..w {
            if filled[y * w + x] {
                continue;
            }
            let mut near = Vec::new();
            if let Some(u) = (0..x).rev().find(|&u| filled[y * w + u]) {
                near.push((u, y));
            }
            if let Some(u) = (x + 1..w).find(|&u| filled[y * w + u]) {
                near.push((u, y));
            }
            if let Some(v) = (0..y).rev().find(|&v| filled[v * w + x]) {
                near.push((x, v));
            }
            if let Some(v) = (y + 1..h).find(|&v| filled[v * w + x]) {
                near.push((x, v));
            }
            if near.is_empty() {
                let mut all: Vec<(f64, usize)> = (0..w * h)
                    .filter(|&j| filled[j])
                    .map(|j| (dist((x, y), (j % w, j / w)), j))
                    .collect();
                all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
                near = all.iter().take(4).map(|&(_, j)| (j % w, j / w)).collect();
            }
            let cands: Vec<(Rgb, f64)> = near
                .iter()
                .map(|&(u, v)| (img[v * w + u], dist((x, y), (u, v))))
                .collect();
            out[y * w + x] = ref_blend(&cands).unwrap();
        }
    }
    out
}

pub fn mean_abs_error(a: &[Rgb], b: &[Rgb], mask: &[bool]) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for ((x, y), m) in a.iter().zip(b).zip(mask) {
        if *m {
            for ch in 0..3 {
                sum += (x[ch] as f64 - y[ch] as f64).abs();
            }
            n += 3;
        }
    }
    sum / n.max(1) as f64
}

pub fn pose(x: f64, y: f64, th: f64) -> Pose2D {
    Pose2D::new(x, y, th)
}

pub fn v3(x: f64, y: f64, z: f64) -> Vector3<f64> {
    Vector3::new(x, y, z)
}

/// Random 16×16 pinhole source with holes, moved by a random rigid transform.
pub fn random_warp_instance<R: Rng>(rng: &mut R) -> (ColorImage, PointCloud, CameraModel) {
    let src = CameraModel::pinhole(16, 16, 14.0, 14.0, 7.5, 7.5).unwrap();
    let img = ColorImage::new(16, 16, (0..256).map(|_| rng.random()).collect()).unwrap();
    let depth = DepthMap::new(
        16,
        16,
        (0..256)
            .map(|_| {
                if rng.random_bool(0.1) {
                    0.0
                } else {
                    rng.random_range(1.0..4.0)
                }
            })
            .collect(),
    )
    .unwrap();
    let cloud = depth_to_cloud(&src, &depth).unwrap();
    let t = Transform3D::from_axis_angle(
        v3(
            rng.random_range(-0.2..0.2),
            1.0,
            rng.random_range(-0.2..0.2),
        ),
        rng.random_range(-0.3..0.3),
        v3(
            rng.random_range(-0.4..0.4),
            rng.random_range(-0.2..0.2),
            rng.random_range(-0.5..0.5),
        ),
    );
    (img, transform_cloud(&cloud, &t, FRAME_CAMERA), src)
}
