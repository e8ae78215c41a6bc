//! Two-cluster k-means over the CIELAB chroma plane.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::media::{rgb_to_lab, RgbFrame};

pub const DEFAULT_KMEANS_SEED: u64 = 42;
const MAX_ITER: usize = 100;
const TOL: f64 = 1e-4;

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// k-means++ seeding followed by Lloyd iterations, K = 2.
/// Returns centroids and per-point assignments, or `None` when every point coincides.
fn kmeans2(points: &[[f64; 2]], seed: u64) -> Option<([[f64; 2]; 2], Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = points[rng.gen_range(0..points.len())];
    let weights: Vec<f64> = points.iter().map(|&p| dist2(p, first)).collect();
    if weights.iter().all(|&w| w == 0.0) {
        return None;
    }
    let second = points[WeightedIndex::new(&weights).ok()?.sample(&mut rng)];
    let mut centroids = [first, second];
    let mut labels = vec![0usize; points.len()];

    for _ in 0..MAX_ITER {
        for (p, l) in points.iter().zip(labels.iter_mut()) {
            *l = usize::from(dist2(*p, centroids[1]) < dist2(*p, centroids[0]));
        }
        let mut sums = [[0.0f64; 2]; 2];
        let mut counts = [0usize; 2];
        for (p, &l) in points.iter().zip(&labels) {
            sums[l][0] += p[0];
            sums[l][1] += p[1];
            counts[l] += 1;
        }
        let mut shift = 0.0f64;
        for c in 0..2 {
            if counts[c] > 0 {
                let next = [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64];
                shift = shift.max(dist2(next, centroids[c]).sqrt());
                centroids[c] = next;
            }
        }
        if shift < TOL {
            break;
        }
    }
    for (p, l) in points.iter().zip(labels.iter_mut()) {
        *l = usize::from(dist2(*p, centroids[1]) < dist2(*p, centroids[0]));
    }
    Some((centroids, labels))
}

/// Fraction of pixels in the chroma cluster whose centroid has the lower A.
pub fn color_distribution_score(frame: &RgbFrame, seed: u64) -> f64 {
    let points: Vec<[f64; 2]> = rgb_to_lab(frame).iter().map(|lab| [lab.a, lab.b]).collect();
    let Some((centroids, labels)) = kmeans2(&points, seed) else {
        return 1.0;
    };
    if centroids[0] == centroids[1] {
        return 1.0;
    }
    let low = if (centroids[1][0], centroids[1][1]) < (centroids[0][0], centroids[0][1]) {
        1
    } else {
        0
    };
    let n_low = labels.iter().filter(|&&l| l == low).count();
    n_low as f64 / points.len() as f64
}
