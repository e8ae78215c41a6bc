//! Multi-scale Laplacian-of-Gaussian blob detection.

use std::f64::consts::{PI, SQRT_2};

use super::plane::{convolve_separable, gaussian_kernel_1d, mean, std_pop, Border, Plane};
use crate::media::GrayFrame;

#[derive(Debug, Clone, PartialEq)]
pub struct BlobConfig {
    pub min_sigma: f64,
    /// `None` = min(width, height) / 8.
    pub max_sigma: Option<f64>,
    pub num_sigma: usize,
    /// Fraction of the strongest response a local maximum must reach.
    pub relative_threshold: f64,
    /// Blobs overlapping more than this fraction of the smaller one are merged.
    pub overlap: f64,
}

impl Default for BlobConfig {
    fn default() -> Self {
        Self {
            min_sigma: 1.0,
            max_sigma: None,
            num_sigma: 10,
            relative_threshold: 0.1,
            overlap: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blob {
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
    pub response: f64,
}

impl Blob {
    pub fn radius(&self) -> f64 {
        self.sigma * SQRT_2
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BlobStats {
    pub count: f64,
    pub size_mean: f64,
    pub size_std: f64,
}

/// Log-spaced scales from `min` to `max` inclusive.
pub fn sigma_schedule(min: f64, max: f64, n: usize) -> Vec<f64> {
    if n <= 1 || max <= min {
        return vec![min];
    }
    let (lmin, lmax) = (min.ln(), max.ln());
    (0..n)
        .map(|i| (lmin + (lmax - lmin) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Scale-normalised negative LoG: bright blobs give positive peaks.
fn neg_log_response(img: &Plane, sigma: f64) -> Plane {
    let radius = (3.0 * sigma).ceil() as usize;
    let k = gaussian_kernel_1d(2 * radius + 1, sigma);
    let g = convolve_separable(img, &k, &k, Border::Replicate);
    let mut out = Plane::zeros(img.width, img.height);
    let s2 = sigma * sigma;
    for y in 0..img.height as isize {
        for x in 0..img.width as isize {
            let lap = g.at_clamped(x - 1, y)
                + g.at_clamped(x + 1, y)
                + g.at_clamped(x, y - 1)
                + g.at_clamped(x, y + 1)
                - 4.0 * g.at_clamped(x, y);
            out.data[y as usize * img.width + x as usize] = -s2 * lap;
        }
    }
    out
}

fn circle_overlap(a: &Blob, b: &Blob) -> f64 {
    let (r1, r2) = (a.radius(), b.radius());
    let d = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
    let small = r1.min(r2);
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        return 1.0;
    }
    let a1 = r1
        * r1
        * ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1))
            .clamp(-1.0, 1.0)
            .acos();
    let a2 = r2
        * r2
        * ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2))
            .clamp(-1.0, 1.0)
            .acos();
    let tri = 0.5
        * ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2))
            .max(0.0)
            .sqrt();
    (a1 + a2 - tri) / (PI * small * small)
}

pub fn detect_blobs(frame: &GrayFrame, cfg: &BlobConfig) -> Vec<Blob> {
    let img = Plane::from_gray(frame);
    let max_sigma = cfg
        .max_sigma
        .unwrap_or(frame.width().min(frame.height()) as f64 / 8.0)
        .max(cfg.min_sigma);
    let sigmas = sigma_schedule(cfg.min_sigma, max_sigma, cfg.num_sigma);
    let stack: Vec<Plane> = sigmas.iter().map(|&s| neg_log_response(&img, s)).collect();
    let peak = stack
        .iter()
        .flat_map(|p| p.data.iter().copied())
        .fold(0.0f64, f64::max);
    if peak <= 1e-9 {
        return Vec::new();
    }
    let threshold = cfg.relative_threshold * peak;
    let (w, h) = (img.width as isize, img.height as isize);
    let n = stack.len() as isize;
    let mut blobs = Vec::new();
    for s in 0..n {
        for y in 0..h {
            for x in 0..w {
                let v = stack[s as usize].at(x as usize, y as usize);
                if v < threshold {
                    continue;
                }
                let me = (s, y, x);
                let mut is_max = true;
                'nb: for ds in -1..=1 {
                    for dy in -1..=1 {
                        for dx in -1..=1 {
                            let (ns, ny, nx) = (s + ds, y + dy, x + dx);
                            if (ds, dy, dx) == (0, 0, 0)
                                || ns < 0
                                || ns >= n
                                || ny < 0
                                || ny >= h
                                || nx < 0
                                || nx >= w
                            {
                                continue;
                            }
                            let nv = stack[ns as usize].at(nx as usize, ny as usize);
                            if nv > v || (nv == v && (ns, ny, nx) < me) {
                                is_max = false;
                                break 'nb;
                            }
                        }
                    }
                }
                if is_max {
                    blobs.push(Blob {
                        x: x as f64,
                        y: y as f64,
                        sigma: sigmas[s as usize],
                        response: v,
                    });
                }
            }
        }
    }
    prune_overlapping(blobs, cfg.overlap)
}

fn prune_overlapping(mut blobs: Vec<Blob>, max_overlap: f64) -> Vec<Blob> {
    // Strongest first; a blob survives unless it overlaps a stronger survivor.
    blobs.sort_by(|a, b| {
        b.sigma
            .total_cmp(&a.sigma)
            .then(b.response.total_cmp(&a.response))
            .then(a.y.total_cmp(&b.y))
            .then(a.x.total_cmp(&b.x))
    });
    let mut kept: Vec<Blob> = Vec::new();
    for b in blobs {
        if kept.iter().all(|k| circle_overlap(k, &b) <= max_overlap) {
            kept.push(b);
        }
    }
    kept.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)));
    kept
}

/// Blob count and mean/std of blob radius (σ·√2).
pub fn blob_stats(frame: &GrayFrame, cfg: &BlobConfig) -> BlobStats {
    let blobs = detect_blobs(frame, cfg);
    if blobs.is_empty() {
        return BlobStats::default();
    }
    let sizes: Vec<f64> = blobs.iter().map(Blob::radius).collect();
    BlobStats {
        count: blobs.len() as f64,
        size_mean: mean(&sizes),
        size_std: std_pop(&sizes),
    }
}
