//! Natural-scene statistics: MSCN coefficients and the 36-dimensional
//! GGD/AGGD patch descriptor shared by NIQE and BRISQUE.

use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

use super::plane::{gaussian_blur, Border, Plane};

pub const NSS_FEATURE_DIM: usize = 36;
const MSCN_C: f64 = 1.0;
const DEGENERATE_ENERGY: f64 = 1e-10;

/// MSCN map and local standard deviation (the latter used for patch sharpness).
pub struct Mscn {
    pub coeffs: Plane,
    pub local_std: Plane,
}

/// Mean-subtracted contrast-normalised coefficients, 7x7 Gaussian window (σ = 7/6).
pub fn mscn(img: &Plane) -> Mscn {
    let mu = gaussian_blur(img, 7, 7.0 / 6.0, Border::Replicate);
    let sq = img.map(|v| v * v);
    let mu_sq = gaussian_blur(&sq, 7, 7.0 / 6.0, Border::Replicate);
    let local_std = Plane::new(
        img.width,
        img.height,
        mu_sq
            .data
            .iter()
            .zip(&mu.data)
            .map(|(s, m)| (s - m * m).abs().sqrt())
            .collect(),
    );
    let coeffs = Plane::new(
        img.width,
        img.height,
        img.data
            .iter()
            .zip(&mu.data)
            .zip(&local_std.data)
            .map(|((v, m), s)| (v - m) / (s + MSCN_C))
            .collect(),
    );
    Mscn { coeffs, local_std }
}

struct ShapeTable {
    alphas: Vec<f64>,
    /// Γ(1/a)Γ(3/a)/Γ(2/a)²
    ggd: Vec<f64>,
    /// Γ(2/a)²/(Γ(1/a)Γ(3/a))
    aggd: Vec<f64>,
}

fn shape_table() -> &'static ShapeTable {
    static TABLE: OnceLock<ShapeTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let alphas: Vec<f64> = (0..=9800).map(|i| 0.2 + 0.001 * i as f64).collect();
        let ratio: Vec<f64> = alphas
            .iter()
            .map(|&a| (ln_gamma(1.0 / a) + ln_gamma(3.0 / a) - 2.0 * ln_gamma(2.0 / a)).exp())
            .collect();
        let aggd = ratio.iter().map(|r| 1.0 / r).collect();
        ShapeTable {
            alphas,
            ggd: ratio,
            aggd,
        }
    })
}

fn closest_alpha(table: &[f64], target: f64) -> f64 {
    let alphas = &shape_table().alphas;
    let mut best = 0;
    let mut best_err = f64::INFINITY;
    for (i, &r) in table.iter().enumerate() {
        let err = (r - target).abs();
        if err < best_err {
            best_err = err;
            best = i;
        }
    }
    alphas[best]
}

/// Moment-matched generalised Gaussian: (shape α, variance σ²).
pub fn fit_ggd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let sigma_sq = x.iter().map(|v| v * v).sum::<f64>() / n;
    let e_abs = x.iter().map(|v| v.abs()).sum::<f64>() / n;
    let rho = sigma_sq / (e_abs * e_abs);
    (closest_alpha(&shape_table().ggd, rho), sigma_sq)
}

/// Asymmetric GGD fit: (shape α, mean, left variance, right variance).
pub fn fit_aggd(x: &[f64]) -> (f64, f64, f64, f64) {
    let (mut l_sum, mut l_n, mut r_sum, mut r_n) = (0.0, 0usize, 0.0, 0usize);
    for &v in x {
        if v < 0.0 {
            l_sum += v * v;
            l_n += 1;
        } else if v > 0.0 {
            r_sum += v * v;
            r_n += 1;
        }
    }
    let left_std = if l_n > 0 {
        (l_sum / l_n as f64).sqrt()
    } else {
        0.0
    };
    let right_std = if r_n > 0 {
        (r_sum / r_n as f64).sqrt()
    } else {
        0.0
    };
    let gamma_hat = left_std / right_std.max(1e-12);
    let n = x.len() as f64;
    let e_abs = x.iter().map(|v| v.abs()).sum::<f64>() / n;
    let e_sq = x.iter().map(|v| v * v).sum::<f64>() / n;
    let r_hat = e_abs * e_abs / e_sq;
    let g2 = gamma_hat * gamma_hat;
    let r_hat_norm = r_hat * (g2 * gamma_hat + 1.0) * (gamma_hat + 1.0) / ((g2 + 1.0) * (g2 + 1.0));
    let alpha = closest_alpha(&shape_table().aggd, r_hat_norm);
    let mean = (right_std - left_std)
        * (ln_gamma(2.0 / alpha) - ln_gamma(1.0 / alpha)).exp()
        * (ln_gamma(1.0 / alpha) - ln_gamma(3.0 / alpha)).exp().sqrt();
    (alpha, mean, left_std * left_std, right_std * right_std)
}

const SHIFTS: [(isize, isize); 4] = [(1, 0), (0, 1), (1, 1), (-1, 1)];

/// 18 features of one MSCN patch, or `None` when the patch carries no signal.
pub fn patch_features(patch: &Plane) -> Option<[f64; 18]> {
    let energy = patch.data.iter().map(|v| v * v).sum::<f64>() / patch.data.len() as f64;
    if energy < DEGENERATE_ENERGY {
        return None;
    }
    let mut out = [0.0; 18];
    let (alpha, var) = fit_ggd(&patch.data);
    out[0] = alpha;
    out[1] = var;
    for (k, &(dx, dy)) in SHIFTS.iter().enumerate() {
        let mut prods = Vec::with_capacity(patch.data.len());
        for y in 0..patch.height as isize {
            for x in 0..patch.width as isize {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= patch.width as isize || ny >= patch.height as isize {
                    continue;
                }
                prods.push(patch.at(x as usize, y as usize) * patch.at(nx as usize, ny as usize));
            }
        }
        if prods.iter().all(|&p| p == 0.0) {
            return None;
        }
        let (a, m, lv, rv) = fit_aggd(&prods);
        out[2 + 4 * k..6 + 4 * k].copy_from_slice(&[a, m, lv, rv]);
    }
    Some(out)
}

/// Halves each dimension by 2x2 averaging.
pub fn downsample2(img: &Plane) -> Plane {
    let (w, h) = (img.width / 2, img.height / 2);
    let mut out = Plane::zeros(w.max(1), h.max(1));
    for y in 0..h {
        for x in 0..w {
            out.data[y * w + x] = 0.25
                * (img.at(2 * x, 2 * y)
                    + img.at(2 * x + 1, 2 * y)
                    + img.at(2 * x, 2 * y + 1)
                    + img.at(2 * x + 1, 2 * y + 1));
        }
    }
    out
}

/// Per-patch 36-dim descriptors over a non-overlapping grid.
pub struct PatchGrid {
    /// `None` for flat patches.
    pub features: Vec<Option<[f64; NSS_FEATURE_DIM]>>,
    /// Mean local standard deviation of each patch at full scale.
    pub sharpness: Vec<f64>,
}

/// Tiles `img` into `patch`-sized blocks (remainder dropped) and extracts
/// 18 features at full scale plus 18 at half scale for each block.
pub fn patch_grid(img: &Plane, patch: usize) -> PatchGrid {
    let nx = img.width / patch;
    let ny = img.height / patch;
    let full = mscn(img);
    let half_img = downsample2(img);
    let half = mscn(&half_img);
    let hp = (patch / 2).max(1);
    let mut features = Vec::with_capacity(nx * ny);
    let mut sharpness = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let p1 = full.coeffs.crop(i * patch, j * patch, patch, patch);
            let s = full.local_std.crop(i * patch, j * patch, patch, patch);
            sharpness.push(s.data.iter().sum::<f64>() / s.data.len() as f64);
            let p2 = (i * hp + hp <= half.coeffs.width && j * hp + hp <= half.coeffs.height)
                .then(|| half.coeffs.crop(i * hp, j * hp, hp, hp));
            let f = match (patch_features(&p1), p2.as_ref().and_then(patch_features)) {
                (Some(a), Some(b)) => {
                    let mut v = [0.0; NSS_FEATURE_DIM];
                    v[..18].copy_from_slice(&a);
                    v[18..].copy_from_slice(&b);
                    Some(v)
                }
                _ => None,
            };
            features.push(f);
        }
    }
    PatchGrid {
        features,
        sharpness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp, Normal};

    #[test]
    fn ggd_recovers_gaussian_and_laplacian_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g: Vec<f64> = Normal::new(0.0, 2.0)
            .unwrap()
            .sample_iter(&mut rng)
            .take(200_000)
            .collect();
        let (a, v) = fit_ggd(&g);
        assert!((a - 2.0).abs() < 0.05, "{a}");
        assert!((v - 4.0).abs() < 0.05, "{v}");
        // Difference of two unit exponentials is Laplace(0, 1).
        let e = Exp::new(1.0).unwrap();
        let l: Vec<f64> = (0..200_000)
            .map(|_| e.sample(&mut rng) - e.sample(&mut rng))
            .collect();
        let (a, _) = fit_ggd(&l);
        assert!((a - 1.0).abs() < 0.05, "{a}");
    }

    #[test]
    fn aggd_symmetric_has_zero_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g: Vec<f64> = Normal::new(0.0, 1.0)
            .unwrap()
            .sample_iter(&mut rng)
            .take(200_000)
            .collect();
        let (a, m, lv, rv) = fit_aggd(&g);
        assert!((a - 2.0).abs() < 0.05, "{a}");
        assert!(m.abs() < 0.02, "{m}");
        assert!((lv - 1.0).abs() < 0.03 && (rv - 1.0).abs() < 0.03);
    }

    #[test]
    fn constant_image_mscn_is_zero() {
        let img = Plane::new(20, 20, vec![128.0; 400]);
        let m = mscn(&img);
        assert!(m.coeffs.data.iter().all(|v| v.abs() < 1e-9));
        let grid = patch_grid(&img, 10);
        assert_eq!(grid.features.len(), 4);
        assert!(grid.features.iter().all(Option::is_none));
    }
}
