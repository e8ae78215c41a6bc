//! Oriented FAST keypoints with rotated BRIEF descriptors, summarised as
//! keypoint-spread and descriptor-popcount statistics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::plane::{convolve, gaussian_blur, mean, std_pop, Border, Plane};
use crate::media::GrayFrame;

#[derive(Debug, Clone, PartialEq)]
pub struct OrbConfig {
    pub max_keypoints: usize,
    pub fast_threshold: f64,
    /// Pyramid levels; 1 = single scale.
    pub n_levels: usize,
    pub scale_factor: f64,
    pub harris_k: f64,
    pub pattern_seed: u64,
}

impl Default for OrbConfig {
    fn default() -> Self {
        Self {
            max_keypoints: 500,
            fast_threshold: 20.0,
            n_levels: 1,
            scale_factor: 1.2,
            harris_k: 0.04,
            pattern_seed: 0x0b5e_55ed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    /// Position in level-0 pixel coordinates.
    pub x: f64,
    pub y: f64,
    pub angle: f64,
    pub response: f64,
    pub level: usize,
}

/// 256-bit binary descriptor.
pub type Descriptor = [u64; 4];

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OrbStats {
    pub kp_count: f64,
    pub dist_mean: f64,
    pub dist_std: f64,
    pub desc_mean: f64,
    pub desc_std: f64,
}

const PATCH_RADIUS: isize = 15;
const HARRIS_RADIUS: isize = 3;
const BORDER: usize = PATCH_RADIUS as usize + 2;

// Bresenham circle of radius 3, clockwise from 12 o'clock.
const CIRCLE: [(isize, isize); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

fn longest_run(flags: &[bool; 16]) -> usize {
    let (mut best, mut run) = (0, 0);
    for i in 0..32 {
        if flags[i % 16] {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best.min(16)
}

/// FAST-9 score: 0 if not a corner, else the larger of the bright/dark SAD margins.
fn fast_score(img: &Plane, x: usize, y: usize, t: f64) -> f64 {
    let p = img.at(x, y);
    let mut brighter = [false; 16];
    let mut darker = [false; 16];
    let (mut sad_b, mut sad_d) = (0.0, 0.0);
    for (i, (dx, dy)) in CIRCLE.iter().enumerate() {
        let v = img.at((x as isize + dx) as usize, (y as isize + dy) as usize);
        if v > p + t {
            brighter[i] = true;
            sad_b += v - p - t;
        } else if v < p - t {
            darker[i] = true;
            sad_d += p - v - t;
        }
    }
    let mut score: f64 = 0.0;
    if longest_run(&brighter) >= 9 {
        score = score.max(sad_b);
    }
    if longest_run(&darker) >= 9 {
        score = score.max(sad_d);
    }
    score
}

fn detect_fast(img: &Plane, t: f64) -> Vec<(usize, usize, f64)> {
    let (w, h) = (img.width, img.height);
    if w <= 2 * BORDER || h <= 2 * BORDER {
        return Vec::new();
    }
    let mut scores = vec![0.0; w * h];
    for y in BORDER..h - BORDER {
        for x in BORDER..w - BORDER {
            scores[y * w + x] = fast_score(img, x, y, t);
        }
    }
    let mut out = Vec::new();
    for y in BORDER..h - BORDER {
        for x in BORDER..w - BORDER {
            let s = scores[y * w + x];
            if s <= 0.0 {
                continue;
            }
            let idx = y * w + x;
            let mut keep = true;
            'nms: for ny in y - 1..=y + 1 {
                for nx in x - 1..=x + 1 {
                    let nidx = ny * w + nx;
                    if nidx == idx {
                        continue;
                    }
                    let ns = scores[nidx];
                    // Equal scores: the earlier pixel in raster order wins.
                    if ns > s || (ns == s && nidx < idx) {
                        keep = false;
                        break 'nms;
                    }
                }
            }
            if keep {
                out.push((x, y, s));
            }
        }
    }
    out
}

const SOBEL_X: [f64; 9] = [-1.0, 0.0, 1.0, -2.0, 0.0, 2.0, -1.0, 0.0, 1.0];
const SOBEL_Y: [f64; 9] = [-1.0, -2.0, -1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 1.0];

fn harris_response(ix: &Plane, iy: &Plane, x: usize, y: usize, k: f64) -> f64 {
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for dy in -HARRIS_RADIUS..=HARRIS_RADIUS {
        for dx in -HARRIS_RADIUS..=HARRIS_RADIUS {
            let gx = ix.at_clamped(x as isize + dx, y as isize + dy);
            let gy = iy.at_clamped(x as isize + dx, y as isize + dy);
            a += gx * gx;
            b += gy * gy;
            c += gx * gy;
        }
    }
    a * b - c * c - k * (a + b) * (a + b)
}

/// Intensity-centroid orientation over a disc of radius 15.
fn orientation(img: &Plane, x: usize, y: usize) -> f64 {
    let (mut m10, mut m01) = (0.0, 0.0);
    for dy in -PATCH_RADIUS..=PATCH_RADIUS {
        for dx in -PATCH_RADIUS..=PATCH_RADIUS {
            if dx * dx + dy * dy > PATCH_RADIUS * PATCH_RADIUS {
                continue;
            }
            let v = img.at_clamped(x as isize + dx, y as isize + dy);
            m10 += dx as f64 * v;
            m01 += dy as f64 * v;
        }
    }
    m01.atan2(m10)
}

/// 256 test pairs drawn from an isotropic Gaussian and kept inside the patch disc.
fn brief_pattern(seed: u64) -> Vec<[(f64, f64); 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, (2 * PATCH_RADIUS + 1) as f64 / 5.0).expect("finite sigma");
    let limit = (PATCH_RADIUS - 1) as f64;
    let mut point = || loop {
        let (px, py) = (normal.sample(&mut rng), normal.sample(&mut rng));
        if px * px + py * py <= limit * limit {
            return (px, py);
        }
    };
    (0..256).map(|_| [point(), point()]).collect()
}

fn describe(
    smoothed: &Plane,
    x: usize,
    y: usize,
    angle: f64,
    pattern: &[[(f64, f64); 2]],
) -> Descriptor {
    let (s, c) = angle.sin_cos();
    let sample = |(px, py): (f64, f64)| {
        let rx = (c * px - s * py).round() as isize;
        let ry = (s * px + c * py).round() as isize;
        smoothed.at_clamped(x as isize + rx, y as isize + ry)
    };
    let mut d = [0u64; 4];
    for (bit, pair) in pattern.iter().enumerate() {
        if sample(pair[0]) < sample(pair[1]) {
            d[bit / 64] |= 1 << (bit % 64);
        }
    }
    d
}

fn resize_bilinear(src: &Plane, w: usize, h: usize) -> Plane {
    let sx = src.width as f64 / w as f64;
    let sy = src.height as f64 / h as f64;
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        let fy = ((y as f64 + 0.5) * sy - 0.5).max(0.0);
        let y0 = (fy.floor() as usize).min(src.height - 1);
        let y1 = (y0 + 1).min(src.height - 1);
        let wy = fy - y0 as f64;
        for x in 0..w {
            let fx = ((x as f64 + 0.5) * sx - 0.5).max(0.0);
            let x0 = (fx.floor() as usize).min(src.width - 1);
            let x1 = (x0 + 1).min(src.width - 1);
            let wx = fx - x0 as f64;
            let top = src.at(x0, y0) * (1.0 - wx) + src.at(x1, y0) * wx;
            let bot = src.at(x0, y1) * (1.0 - wx) + src.at(x1, y1) * wx;
            out.data[y * w + x] = top * (1.0 - wy) + bot * wy;
        }
    }
    out
}

/// Runs detection and description; keypoints sorted by descending Harris response.
pub fn detect_and_describe(frame: &GrayFrame, cfg: &OrbConfig) -> Vec<(Keypoint, Descriptor)> {
    let base = Plane::from_gray(frame);
    let pattern = brief_pattern(cfg.pattern_seed);
    let mut found = Vec::new();
    let mut level_img = base.clone();
    for level in 0..cfg.n_levels.max(1) {
        let scale = cfg.scale_factor.powi(level as i32);
        if level > 0 {
            let w = (base.width as f64 / scale).round() as usize;
            let h = (base.height as f64 / scale).round() as usize;
            if w <= 2 * BORDER || h <= 2 * BORDER {
                break;
            }
            level_img = resize_bilinear(&base, w, h);
        }
        let corners = detect_fast(&level_img, cfg.fast_threshold);
        if corners.is_empty() {
            continue;
        }
        let ix = convolve(&level_img, &SOBEL_X, 3, Border::Replicate);
        let iy = convolve(&level_img, &SOBEL_Y, 3, Border::Replicate);
        let smoothed = gaussian_blur(&level_img, 5, 2.0, Border::Replicate);
        for (x, y, _) in corners {
            let angle = orientation(&level_img, x, y);
            let kp = Keypoint {
                x: x as f64 * scale,
                y: y as f64 * scale,
                angle,
                response: harris_response(&ix, &iy, x, y, cfg.harris_k),
                level,
            };
            found.push((kp, describe(&smoothed, x, y, angle, &pattern)));
        }
    }
    found.sort_by(|a, b| {
        b.0.response
            .total_cmp(&a.0.response)
            .then(a.0.level.cmp(&b.0.level))
            .then(a.0.y.total_cmp(&b.0.y))
            .then(a.0.x.total_cmp(&b.0.x))
    });
    found.truncate(cfg.max_keypoints);
    found
}

pub fn orb_stats(frame: &GrayFrame, cfg: &OrbConfig) -> OrbStats {
    let kps = detect_and_describe(frame, cfg);
    if kps.is_empty() {
        return OrbStats::default();
    }
    let mut dists = Vec::with_capacity(kps.len() * (kps.len() - 1) / 2);
    for (i, (a, _)) in kps.iter().enumerate() {
        for (b, _) in &kps[i + 1..] {
            dists.push(((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt());
        }
    }
    let pops: Vec<f64> = kps
        .iter()
        .map(|(_, d)| d.iter().map(|w| w.count_ones()).sum::<u32>() as f64)
        .collect();
    OrbStats {
        kp_count: kps.len() as f64,
        dist_mean: mean(&dists),
        dist_std: std_pop(&dists),
        desc_mean: mean(&pops),
        desc_std: std_pop(&pops),
    }
}
