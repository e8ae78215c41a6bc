//! Synthetic inputs shared by the integration tests.
#![allow(dead_code)]

pub mod gbt_oracle;
pub mod oracles;

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use t2vqa_core::features::{block_features, BrisqueModel, Plane, SvrParams};
use t2vqa_core::media::{write_png, FrameSequence, GrayFrame, RgbFrame};
use t2vqa_core::ratings::{Aspect, Rating, RatingsTable};

/// Smooth random field with a roughly 1/f spectrum, scaled into [30, 225].
pub fn natural_field(seed: u64, w: usize, h: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<(f64, f64, f64, f64)> = (0..48)
        .map(|_| {
            let f: f64 = rng.gen_range(0.5..12.0);
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            (f * theta.cos(), f * theta.sin(), phase, 1.0 / f)
        })
        .collect();
    let mut v = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (u, t) = (x as f64 / w as f64, y as f64 / h as f64);
            v[y * w + x] = waves
                .iter()
                .map(|&(fx, fy, p, a)| a * (std::f64::consts::TAU * (fx * u + fy * t) + p).sin())
                .sum();
        }
    }
    let (lo, hi) = v
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    v.iter()
        .map(|x| 30.0 + 195.0 * (x - lo) / (hi - lo))
        .collect()
}

pub fn natural_gray(seed: u64, w: usize, h: usize) -> GrayFrame {
    let v = natural_field(seed, w, h);
    GrayFrame::new(w, h, v.iter().map(|x| x.round() as u8).collect()).unwrap()
}

pub fn natural_rgb(seed: u64, w: usize, h: usize) -> RgbFrame {
    let base = natural_field(seed, w, h);
    let tint = natural_field(seed ^ 0x9e37_79b9, w, h);
    RgbFrame::from_fn(w, h, |x, y| {
        let b = base[y * w + x];
        let t = (tint[y * w + x] - 127.5) * 0.3;
        [
            (b + t).clamp(0.0, 255.0) as u8,
            b as u8,
            (b - t).clamp(0.0, 255.0) as u8,
        ]
    })
    .unwrap()
}

pub fn add_gaussian_noise(f: &GrayFrame, sigma: f64, seed: u64) -> GrayFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Normal::new(0.0, sigma).unwrap();
    GrayFrame::new(
        f.width(),
        f.height(),
        f.pixels()
            .iter()
            .map(|&p| (p as f64 + n.sample(&mut rng)).round().clamp(0.0, 255.0) as u8)
            .collect(),
    )
    .unwrap()
}

pub fn salt_and_pepper(f: &GrayFrame, fraction: f64, seed: u64) -> GrayFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayFrame::new(
        f.width(),
        f.height(),
        f.pixels()
            .iter()
            .map(|&p| {
                if rng.gen::<f64>() < fraction {
                    if rng.gen() {
                        255
                    } else {
                        0
                    }
                } else {
                    p
                }
            })
            .collect(),
    )
    .unwrap()
}

/// A short clip drifting across a natural field.
pub fn synthetic_video(id: &str, seed: u64, n_frames: usize, w: usize, h: usize) -> FrameSequence {
    let big = natural_rgb(seed, w + n_frames * 2, h);
    let frames = (0..n_frames)
        .map(|i| RgbFrame::from_fn(w, h, |x, y| big.get(x + 2 * i, y)).unwrap())
        .collect();
    FrameSequence::new(id, frames).unwrap()
}

pub fn write_video(dir: &Path, video: &FrameSequence) {
    std::fs::create_dir_all(dir).unwrap();
    for (i, f) in video.frames().iter().enumerate() {
        write_png(f, dir.join(format!("frame_{i:04}.png"))).unwrap();
    }
}

/// An RBF scorer whose support vectors sit on clean-block features with
/// negative weight, so blocks resembling the clean set score low.
pub fn clean_reference_brisque(clean: &[Plane], block: usize) -> BrisqueModel {
    use nalgebra::{DMatrix, DVector};
    let feats: Vec<[f64; 36]> = clean
        .iter()
        .flat_map(|p| block_features(p, block))
        .collect();
    let n = feats.len();
    let mut mean = DVector::zeros(36);
    for f in &feats {
        mean += DVector::from_row_slice(f);
    }
    mean /= n as f64;
    let mut scale = DVector::zeros(36);
    for f in &feats {
        let d = DVector::from_row_slice(f) - &mean;
        scale += d.component_mul(&d);
    }
    let basis = DMatrix::from_diagonal(&scale.map(|s| 1.0 / ((s / n as f64).sqrt() + 1e-3)));
    let sv = DMatrix::from_fn(n, 36, |i, j| {
        let centred = DVector::from_row_slice(&feats[i]) - &mean;
        (&basis * centred)[j]
    });
    BrisqueModel {
        version: 1,
        feature_dim: 36,
        block_size: block,
        pca_mean: mean,
        pca_basis: basis,
        svr: SvrParams {
            gamma: 1.0 / 72.0,
            intercept: 100.0,
            dual_coef: DVector::from_element(n, -100.0 / n as f64),
            support_vectors: sv,
        },
    }
}

const PROMPT_WORDS: [&str; 16] = [
    "a", "small", "red", "fox", "runs", "through", "the", "snowy", "pine", "forest", "under", "a",
    "pale", "winter", "moon", "slowly",
];

/// Integer ratings around a per-model level, with a per-annotator bias and repeat rounds.
/// Prompts cycle through 5, 11 and 16 words.
pub fn synthetic_ratings(
    models: &[(&str, f64)],
    videos_per_model: usize,
    annotators: usize,
    seed: u64,
) -> RatingsTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let bias: Vec<f64> = (0..annotators).map(|_| rng.gen_range(-1.5..1.5)).collect();
    let mut rows = Vec::new();
    for (m, (model, level)) in models.iter().enumerate() {
        for v in 0..videos_per_model {
            let words = [5, 11, 16][(m + v) % 3];
            let prompt = PROMPT_WORDS[..words].join(" ");
            for (a, b) in bias.iter().enumerate() {
                for aspect in Aspect::ALL {
                    let rounds = if rng.gen_bool(0.2) { 2 } else { 1 };
                    for _ in 0..rounds {
                        let s = (level + b + noise.sample(&mut rng))
                            .round()
                            .clamp(1.0, 10.0);
                        rows.push(Rating {
                            video_id: format!("{model}_{v:02}"),
                            model_name: model.to_string(),
                            prompt: prompt.clone(),
                            annotator_id: format!("p{a}"),
                            aspect,
                            score: s,
                        });
                    }
                }
            }
        }
    }
    RatingsTable::new(rows).unwrap()
}

/// The textbook three-group data set used for the Tukey worked example.
pub fn textbook_groups() -> Vec<(String, Vec<f64>)> {
    vec![
        ("a".into(), vec![24.5, 23.5, 26.4, 27.1, 29.9]),
        ("b".into(), vec![28.4, 34.2, 29.5, 32.2, 30.1]),
        ("c".into(), vec![26.1, 28.3, 24.3, 26.2, 27.8]),
    ]
}

/// Independent one-way ANOVA and Tukey-Kramer q for a pair of groups.
pub fn hand_tukey_q(groups: &[(String, Vec<f64>)], i: usize, j: usize) -> f64 {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut ssw = 0.0;
    let mut n = 0;
    for (_, g) in groups {
        let m = mean(g);
        ssw += g.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
        n += g.len();
    }
    let msw = ssw / (n - groups.len()) as f64;
    let (a, b) = (&groups[i].1, &groups[j].1);
    let se = (msw / 2.0 * (1.0 / a.len() as f64 + 1.0 / b.len() as f64)).sqrt();
    (mean(a) - mean(b)).abs() / se
}
