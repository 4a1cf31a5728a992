//! Novel view synthesis from a colour image and its depth.
//!
//! The pipeline back-projects source pixels, moves them into the target camera frame,
//! and splats each point into the four integer pixels around its continuous
//! projection, far points first so nearer ones overwrite them. The four intermediate
//! layers are merged with distance-based weights and remaining holes are filled from
//! the nearest filled pixels.

use std::io::{BufRead, BufReader, Read, Write};

use crate::cloud::{depth_to_cloud, transform_cloud, DepthMap, PointCloud};
use crate::error::{Error, Result};
use crate::geometry::{CameraModel, Pose2D, Transform3D};

pub type Rgb = [u8; 3];

/// Projections closer than this to an integer coordinate snap onto it.
pub const INTEGER_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    data: Vec<Rgb>,
}

impl ColorImage {
    pub fn new(width: usize, height: usize, data: Vec<Rgb>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(
                "image dimensions must be positive".into(),
            ));
        }
        if data.len() != width * height {
            return Err(Error::shape(width * height, data.len()));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, color: Rgb) -> Self {
        assert!(width > 0 && height > 0);
        Self {
            width,
            height,
            data: vec![color; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, u: usize, v: usize) -> Rgb {
        self.data[v * self.width + u]
    }

    pub fn set(&mut self, u: usize, v: usize, c: Rgb) {
        self.data[v * self.width + u] = c;
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.data
    }

    /// Binary PPM (`P6`, maxval 255).
    pub fn write_ppm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        let bytes: Vec<u8> = self.data.iter().flatten().copied().collect();
        w.write_all(&bytes)
    }

    pub fn read_ppm<R: Read>(r: R) -> Result<Self> {
        let bad = |reason: String| Error::Format {
            format: "PPM",
            reason,
        };
        let mut r = BufReader::new(r);
        let mut tokens = Vec::with_capacity(4);
        while tokens.len() < 4 {
            let buf = r.fill_buf().map_err(|e| bad(e.to_string()))?;
            let Some(&b) = buf.first() else {
                return Err(bad("truncated header".into()));
            };
            if b == b'#' {
                let mut comment = Vec::new();
                r.read_until(b'\n', &mut comment)
                    .map_err(|e| bad(e.to_string()))?;
                continue;
            }
            if b.is_ascii_whitespace() {
                r.consume(1);
                continue;
            }
            let mut tok = Vec::new();
            loop {
                let buf = r.fill_buf().map_err(|e| bad(e.to_string()))?;
                match buf.first() {
                    Some(&c) if !c.is_ascii_whitespace() => {
                        tok.push(c);
                        r.consume(1);
                    }
                    _ => break,
                }
            }
            tokens.push(String::from_utf8_lossy(&tok).into_owned());
        }
        // Exactly one whitespace byte separates maxval from the raster.
        r.consume(1);
        if tokens[0] != "P6" {
            return Err(bad(format!("unsupported magic {:?}", tokens[0])));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| bad(format!("bad header field {s:?}")))
        };
        let (width, height, maxval) = (parse(&tokens[1])?, parse(&tokens[2])?, parse(&tokens[3])?);
        if maxval != 255 {
            return Err(bad(format!("only maxval 255 is supported, got {maxval}")));
        }
        let mut body = vec![0u8; width * height * 3];
        r.read_exact(&mut body)
            .map_err(|_| bad("truncated pixel data".into()))?;
        let data = body.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        ColorImage::new(width, height, data)
    }
}

/// One intermediate layer: per target pixel, the colour written last, the depth of
/// the point that wrote it, and its distance to the continuous projection.
#[derive(Debug, Clone, PartialEq)]
pub struct SplatLayer {
    pub color: Vec<Rgb>,
    pub depth: Vec<f64>,
    pub dist: Vec<f64>,
}

impl SplatLayer {
    fn new(n: usize) -> Self {
        Self {
            color: vec![[0; 3]; n],
            depth: vec![f64::INFINITY; n],
            dist: vec![0.0; n],
        }
    }

    pub fn is_written(&self, i: usize) -> bool {
        self.depth[i].is_finite()
    }
}

/// The four intermediate images, one per (ceil|floor) × (ceil|floor) candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct SplatBuffer {
    pub width: usize,
    pub height: usize,
    /// Order: (⌈u⌉,⌈v⌉), (⌈u⌉,⌊v⌋), (⌊u⌋,⌈v⌉), (⌊u⌋,⌊v⌋).
    pub layers: [SplatLayer; 4],
}

fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= INTEGER_SNAP {
        r
    } else {
        x
    }
}

/// Scatters source colours into the target raster.
///
/// Points are visited by decreasing distance from the target camera centre; equal
/// distances keep row-major source order. Each point overwrites the four integer
/// neighbours of its projection in the corresponding layer.
pub fn splat(
    source: &ColorImage,
    cloud_t: &PointCloud,
    target: &CameraModel,
) -> Result<SplatBuffer> {
    if source.width != cloud_t.width() || source.height != cloud_t.height() {
        return Err(Error::shape(
            format!("{}x{}", source.width, source.height),
            format!("{}x{}", cloud_t.width(), cloud_t.height()),
        ));
    }
    let (tw, th) = (target.width(), target.height());
    let mut projected = Vec::new();
    for (idx, p) in cloud_t.points().iter().enumerate() {
        let Some(p) = p else { continue };
        if let Some(px) = target.project(p)? {
            projected.push((p.norm(), idx, snap(px.u), snap(px.v)));
        }
    }
    // Stable sort keeps raster order among equal depths.
    projected.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut layers = std::array::from_fn(|_| SplatLayer::new(tw * th));
    for (depth, idx, u, v) in projected {
        let color = source.data[idx];
        let (uc, uf, vc, vf) = (u.ceil(), u.floor(), v.ceil(), v.floor());
        let candidates = [(uc, vc), (uc, vf), (uf, vc), (uf, vf)];
        for (layer, (cu, cv)) in layers.iter_mut().zip(candidates) {
            if cu < 0.0 || cv < 0.0 || cu >= tw as f64 || cv >= th as f64 {
                continue;
            }
            let i = cv as usize * tw + cu as usize;
            layer.color[i] = color;
            layer.depth[i] = depth;
            layer.dist[i] = (cu - u).hypot(cv - v);
        }
    }
    Ok(SplatBuffer {
        width: tw,
        height: th,
        layers,
    })
}

/// Blends candidate colours with weights `(Σl − l_s) / Σl`.
///
/// A candidate at distance exactly zero takes all the weight (shared equally if several
/// are at zero); a lone candidate is used as is.
pub fn blend(candidates: &[(Rgb, f64)]) -> Option<Rgb> {
    match candidates {
        [] => return None,
        [(c, _)] => return Some(*c),
        _ => {}
    }
    let exact: Vec<&Rgb> = candidates
        .iter()
        .filter(|(_, l)| *l == 0.0)
        .map(|(c, _)| c)
        .collect();
    let mut acc = [0.0f64; 3];
    let norm = if !exact.is_empty() {
        for c in &exact {
            for ch in 0..3 {
                acc[ch] += c[ch] as f64;
            }
        }
        exact.len() as f64
    } else {
        let total: f64 = candidates.iter().map(|(_, l)| l).sum();
        let mut wsum = 0.0;
        for (c, l) in candidates {
            let w = (total - l) / total;
            wsum += w;
            for ch in 0..3 {
                acc[ch] += w * c[ch] as f64;
            }
        }
        wsum
    };
    Some(acc.map(|a| (a / norm).round().clamp(0.0, 255.0) as u8))
}

/// Merges the four layers into one image plus a mask of pixels that received any colour.
pub fn merge(buffer: &SplatBuffer) -> (ColorImage, Vec<bool>) {
    let n = buffer.width * buffer.height;
    let mut data = vec![[0u8; 3]; n];
    let mut filled = vec![false; n];
    let mut cands = Vec::with_capacity(4);
    for i in 0..n {
        cands.clear();
        for layer in &buffer.layers {
            if layer.is_written(i) {
                cands.push((layer.color[i], layer.dist[i]));
            }
        }
        if let Some(c) = blend(&cands) {
            data[i] = c;
            filled[i] = true;
        }
    }
    let image = ColorImage {
        width: buffer.width,
        height: buffer.height,
        data,
    };
    (image, filled)
}

/// Nearest filled pixel in each of the four axis directions, per pixel.
fn cardinal_neighbours(w: usize, h: usize, filled: &[bool]) -> Vec<[Option<usize>; 4]> {
    let mut out = vec![[None; 4]; w * h];
    for v in 0..h {
        let mut last = None;
        for u in 0..w {
            out[v * w + u][0] = last;
            if filled[v * w + u] {
                last = Some(v * w + u);
            }
        }
        last = None;
        for u in (0..w).rev() {
            out[v * w + u][1] = last;
            if filled[v * w + u] {
                last = Some(v * w + u);
            }
        }
    }
    for u in 0..w {
        let mut last = None;
        for v in 0..h {
            out[v * w + u][2] = last;
            if filled[v * w + u] {
                last = Some(v * w + u);
            }
        }
        last = None;
        for v in (0..h).rev() {
            out[v * w + u][3] = last;
            if filled[v * w + u] {
                last = Some(v * w + u);
            }
        }
    }
    out
}

/// Fills every unfilled pixel with a distance-weighted blend of the nearest filled
/// pixel to its left, right, above and below. Pixels with no filled pixel on either
/// axis fall back to the four nearest filled pixels overall.
pub fn fill_blanks(image: &ColorImage, filled: &[bool]) -> Result<ColorImage> {
    let (w, h) = (image.width, image.height);
    if filled.len() != w * h {
        return Err(Error::shape(w * h, filled.len()));
    }
    if !filled.iter().any(|f| *f) {
        return Err(Error::EmptySynthesis);
    }
    let neighbours = cardinal_neighbours(w, h, filled);
    let mut out = image.clone();
    let mut filled_list: Option<Vec<usize>> = None;
    let dist = |a: usize, b: usize| {
        let (au, av) = ((a % w) as f64, (a / w) as f64);
        let (bu, bv) = ((b % w) as f64, (b / w) as f64);
        (au - bu).hypot(av - bv)
    };
    for i in 0..w * h {
        if filled[i] {
            continue;
        }
        let mut near: Vec<usize> = neighbours[i].iter().flatten().copied().collect();
        if near.is_empty() {
            let list =
                filled_list.get_or_insert_with(|| (0..w * h).filter(|&j| filled[j]).collect());
            let mut by_dist: Vec<(f64, usize)> = list.iter().map(|&j| (dist(i, j), j)).collect();
            by_dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            near = by_dist.into_iter().take(4).map(|(_, j)| j).collect();
        }
        let cands: Vec<(Rgb, f64)> = near.iter().map(|&j| (image.data[j], dist(i, j))).collect();
        out.data[i] = blend(&cands).expect("at least one filled neighbour");
    }
    Ok(out)
}

/// Bilinear resampling with pixel centres aligned.
pub fn resample_bilinear(image: &ColorImage, width: usize, height: usize) -> ColorImage {
    if width == image.width && height == image.height {
        return image.clone();
    }
    let sx = image.width as f64 / width as f64;
    let sy = image.height as f64 / height as f64;
    let mut data = Vec::with_capacity(width * height);
    for v in 0..height {
        let fy = ((v as f64 + 0.5) * sy - 0.5).clamp(0.0, (image.height - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(image.height - 1);
        let ty = fy - y0 as f64;
        for u in 0..width {
            let fx = ((u as f64 + 0.5) * sx - 0.5).clamp(0.0, (image.width - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(image.width - 1);
            let tx = fx - x0 as f64;
            let mut c = [0u8; 3];
            for (ch, out) in c.iter_mut().enumerate() {
                let p = |x: usize, y: usize| image.get(x, y)[ch] as f64;
                let top = p(x0, y0) * (1.0 - tx) + p(x1, y0) * tx;
                let bot = p(x0, y1) * (1.0 - tx) + p(x1, y1) * tx;
                *out = (top * (1.0 - ty) + bot * ty).round().clamp(0.0, 255.0) as u8;
            }
            data.push(c);
        }
    }
    ColorImage {
        width,
        height,
        data,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    /// Splatting raster size as a multiple of the target camera's raster; the result is
    /// resampled to the target size afterwards. `1.0` splats directly at target size.
    pub working_scale: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self { working_scale: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisOutput {
    pub image: ColorImage,
    /// Pixels that received a splatted colour (before hole filling), at target size.
    pub splatted: Vec<bool>,
}

/// Transform taking source-camera points into the target camera, where the target
/// robot sits at `target_robot` in the source robot's frame.
pub fn relative_camera_transform(
    source: &CameraModel,
    target: &CameraModel,
    target_robot: &Pose2D,
) -> Transform3D {
    target
        .mount()
        .compose(&target_robot.to_transform().inverse())
        .compose(&source.mount().inverse())
}

pub fn synthesize_view(
    source_img: &ColorImage,
    source_depth: &DepthMap,
    source_cam: &CameraModel,
    target_cam: &CameraModel,
    t_st: &Transform3D,
) -> Result<ColorImage> {
    synthesize_view_with(
        source_img,
        source_depth,
        source_cam,
        target_cam,
        t_st,
        &SynthesisOptions::default(),
    )
    .map(|o| o.image)
}

pub fn synthesize_view_with(
    source_img: &ColorImage,
    source_depth: &DepthMap,
    source_cam: &CameraModel,
    target_cam: &CameraModel,
    t_st: &Transform3D,
    opts: &SynthesisOptions,
) -> Result<SynthesisOutput> {
    if source_img.width != source_depth.width() || source_img.height != source_depth.height() {
        return Err(Error::shape(
            format!("{}x{}", source_img.width, source_img.height),
            format!("{}x{}", source_depth.width(), source_depth.height()),
        ));
    }
    if !(opts.working_scale.is_finite() && opts.working_scale > 0.0) {
        return Err(Error::InvalidInput(format!(
            "working_scale must be positive, got {}",
            opts.working_scale
        )));
    }
    let ww = ((target_cam.width() as f64 * opts.working_scale).round() as usize).max(2);
    let wh = ((target_cam.height() as f64 * opts.working_scale).round() as usize).max(2);
    let working = target_cam.scaled_to(ww, wh)?;

    let cloud_s = depth_to_cloud(source_cam, source_depth)?;
    let cloud_t = transform_cloud(&cloud_s, t_st, "target-camera");
    let buffer = splat(source_img, &cloud_t, &working)?;
    let (merged, filled) = merge(&buffer);
    let dense = fill_blanks(&merged, &filled)?;
    let image = resample_bilinear(&dense, target_cam.width(), target_cam.height());
    let splatted = if (ww, wh) == (target_cam.width(), target_cam.height()) {
        filled
    } else {
        let mask = ColorImage {
            width: ww,
            height: wh,
            data: filled
                .iter()
                .map(|f| if *f { [255; 3] } else { [0; 3] })
                .collect(),
        };
        resample_bilinear(&mask, target_cam.width(), target_cam.height())
            .data
            .iter()
            .map(|c| c[0] == 255)
            .collect()
    };
    Ok(SynthesisOutput { image, splatted })
}
