//! Direct loop-based reimplementations of the frame features.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use t2vqa_core::features::{
    contrast_score, entropy_score, inception_score, modified_inception_score, sharpness_score,
    spectral_score, texture_score, ClassProbs, SpectralMode,
};
use t2vqa_core::media::{GrayFrame, RgbFrame};

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-12)
}

pub fn px(f: &GrayFrame, x: isize, y: isize) -> f64 {
    let xc = x.clamp(0, f.width() as isize - 1) as usize;
    let yc = y.clamp(0, f.height() as isize - 1) as usize;
    f.get(xc, yc) as f64
}

pub fn pop_variance(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

pub fn naive_texture(f: &GrayFrame) -> f64 {
    let (w, h) = (f.width() as isize, f.height() as isize);
    let mut k = [[0.0; 5]; 5];
    let mut total = 0.0;
    for (j, row) in k.iter_mut().enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            let (dx, dy) = (i as f64 - 2.0, j as f64 - 2.0);
            *v = (-(dx * dx + dy * dy) / 2.0).exp();
            total += *v;
        }
    }
    let mut blur = vec![0.0; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            for j in -2..=2isize {
                for i in -2..=2isize {
                    s += k[(j + 2) as usize][(i + 2) as usize] / total * px(f, x + i, y + j);
                }
            }
            blur[(y * w + x) as usize] = s;
        }
    }
    let b = |x: isize, y: isize| blur[(y.clamp(0, h - 1) * w + x.clamp(0, w - 1)) as usize];
    let mut mags = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let gx = (b(x + 1, y - 1) + 2.0 * b(x + 1, y) + b(x + 1, y + 1))
                - (b(x - 1, y - 1) + 2.0 * b(x - 1, y) + b(x - 1, y + 1));
            let gy = (b(x - 1, y + 1) + 2.0 * b(x, y + 1) + b(x + 1, y + 1))
                - (b(x - 1, y - 1) + 2.0 * b(x, y - 1) + b(x + 1, y - 1));
            mags.push((gx * gx + gy * gy).sqrt());
        }
    }
    pop_variance(&mags)
}

pub fn naive_sharpness(f: &GrayFrame) -> f64 {
    let (w, h) = (f.width() as isize, f.height() as isize);
    let mut se = 0.0;
    for y in 0..h {
        for x in 0..w {
            let c = px(f, x, y);
            let s = 5.0 * c - px(f, x - 1, y) - px(f, x + 1, y) - px(f, x, y - 1) - px(f, x, y + 1);
            let d = c - s.clamp(0.0, 255.0);
            se += d * d;
        }
    }
    (se / (w * h) as f64).sqrt()
}

pub fn naive_entropy(f: &GrayFrame) -> f64 {
    let n = f.pixels().len() as f64;
    let mut h = 0.0;
    for v in 0..=255u8 {
        let c = f.pixels().iter().filter(|&&p| p == v).count();
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    h
}

pub fn naive_contrast(f: &GrayFrame) -> f64 {
    let v: Vec<f64> = f.pixels().iter().map(|&p| p as f64).collect();
    let m = v.iter().sum::<f64>() / v.len() as f64;
    if m == 0.0 {
        0.0
    } else {
        pop_variance(&v).sqrt() / m
    }
}

pub fn naive_spectral(f: &RgbFrame, fourier: bool) -> f64 {
    let (w, h) = (f.width(), f.height());
    let (mut sum_std, mut sum_mean) = (0.0, 0.0);
    for c in 0..3 {
        let vals: Vec<f64> = if fourier {
            let mut out = Vec::with_capacity(w * h);
            for v in 0..h {
                for u in 0..w {
                    let (mut re, mut im) = (0.0, 0.0);
                    for y in 0..h {
                        for x in 0..w {
                            let a = -2.0
                                * std::f64::consts::PI
                                * (u as f64 * x as f64 / w as f64 + v as f64 * y as f64 / h as f64);
                            let p = f.get(x, y)[c] as f64;
                            re += p * a.cos();
                            im += p * a.sin();
                        }
                    }
                    out.push((re * re + im * im).sqrt());
                }
            }
            out
        } else {
            (0..h)
                .flat_map(|y| (0..w).map(move |x| (x, y)))
                .map(|(x, y)| f.get(x, y)[c] as f64)
                .collect()
        };
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        sum_mean += m;
        sum_std += pop_variance(&vals).sqrt();
    }
    if sum_mean == 0.0 {
        0.0
    } else {
        sum_std / sum_mean
    }
}

pub fn random_gray(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayFrame {
    GrayFrame::from_fn(w, h, |_, _| rng.gen()).unwrap()
}

pub fn random_rgb(rng: &mut ChaCha8Rng, w: usize, h: usize) -> RgbFrame {
    RgbFrame::from_fn(w, h, |_, _| [rng.gen(), rng.gen(), rng.gen()]).unwrap()
}

pub fn naive_mis(frames: &[Vec<f64>]) -> f64 {
    let k = frames[0].len();
    let mut kl = 0.0;
    for c in 0..k {
        let m: f64 = frames.iter().map(|p| p[c]).sum::<f64>() / frames.len() as f64;
        if m > 0.0 {
            kl += m * (m / (1.0 / k as f64)).ln();
        }
    }
    kl.exp()
}

pub fn naive_is(frames: &[Vec<f64>]) -> f64 {
    let k = frames[0].len();
    let marginal: Vec<f64> = (0..k)
        .map(|c| frames.iter().map(|p| p[c]).sum::<f64>() / frames.len() as f64)
        .collect();
    let mut total = 0.0;
    for p in frames {
        for c in 0..k {
            if p[c] > 0.0 {
                total += p[c] * (p[c] / marginal[c]).ln();
            }
        }
    }
    (total / frames.len() as f64).exp()
}

pub fn random_probs(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>().powi(3)).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|v| v / s).collect()
        })
        .collect()
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

/// Texture, sharpness, entropy and contrast on random frames up to 16x16.
pub fn check_gray_features(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &(w, h) in &[(3, 3), (5, 7), (8, 8), (16, 9), (16, 16)] {
        for _ in 0..5 {
            let f = random_gray(&mut rng, w, h);
            let t = texture_score(&f).map_err(|e| e.to_string())?;
            ensure(rel_close(t, naive_texture(&f), 1e-6), || {
                format!("texture {w}x{h}")
            })?;
            ensure(
                rel_close(sharpness_score(&f), naive_sharpness(&f), 1e-6),
                || format!("sharpness {w}x{h}"),
            )?;
            ensure(
                rel_close(entropy_score(&f), naive_entropy(&f), 1e-6),
                || format!("entropy {w}x{h}"),
            )?;
            ensure(
                rel_close(contrast_score(&f), naive_contrast(&f), 1e-6),
                || format!("contrast {w}x{h}"),
            )?;
        }
    }
    // Low-contrast ramps keep the sharpen filter inside [0, 255].
    let f = GrayFrame::from_fn(16, 12, |x, y| (60 + 4 * x + 3 * y) as u8).unwrap();
    ensure(
        rel_close(texture_score(&f).unwrap(), naive_texture(&f), 1e-6),
        || "texture ramp".into(),
    )?;
    ensure(
        rel_close(sharpness_score(&f), naive_sharpness(&f), 1e-6),
        || "sharpness ramp".into(),
    )
}

pub fn check_spectral(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &(w, h) in &[(4, 4), (6, 5), (16, 16)] {
        let f = random_rgb(&mut rng, w, h);
        let fast = spectral_score(&f, SpectralMode::Fourier);
        ensure(rel_close(fast, naive_spectral(&f, true), 1e-6), || {
            format!("fourier {w}x{h}")
        })?;
        let ch = spectral_score(&f, SpectralMode::Channel);
        ensure(rel_close(ch, naive_spectral(&f, false), 1e-6), || {
            format!("channel {w}x{h}")
        })?;
    }
    Ok(())
}

pub fn check_inception(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &(n, k) in &[(1, 2), (4, 10), (8, 1000), (30, 7)] {
        let frames = random_probs(&mut rng, n, k);
        let probs = ClassProbs::new(k, frames.clone()).unwrap();
        let mis = modified_inception_score(&probs).map_err(|e| e.to_string())?;
        ensure((mis - naive_mis(&frames)).abs() <= 1e-9 * mis, || {
            format!("mis n={n} k={k}")
        })?;
        let is = inception_score(&probs).map_err(|e| e.to_string())?;
        ensure((is - naive_is(&frames)).abs() <= 1e-9 * is, || {
            format!("is n={n} k={k}")
        })?;
    }
    Ok(())
}

/// Uniform predictions score 1, confident identical predictions score K.
pub fn check_mis_reference_points() -> Result<(), String> {
    let uniform = ClassProbs::new(1000, vec![vec![1e-3; 1000]; 3]).unwrap();
    let u = modified_inception_score(&uniform).map_err(|e| e.to_string())?;
    ensure((u - 1.0).abs() < 1e-9, || format!("uniform MIS {u}"))?;
    let mut hot = vec![0.0; 1000];
    hot[17] = 1.0;
    let one_hot = ClassProbs::new(1000, vec![hot; 4]).unwrap();
    let o = modified_inception_score(&one_hot).map_err(|e| e.to_string())?;
    ensure((o - 1000.0).abs() < 1e-9, || format!("one-hot MIS {o}"))
}

pub fn feature_oracle_suite() -> Result<(), String> {
    check_gray_features(11)?;
    check_spectral(5)?;
    check_inception(3)?;
    check_mis_reference_points()
}
