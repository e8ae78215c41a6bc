//! Second-order gradient boosting of regression trees under logistic loss.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{Node, Tree};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_child_weight: f64,
    pub subsample: f64,
    /// L2 penalty λ on leaf weights.
    pub l2_reg: f64,
    /// Minimum split gain γ.
    pub min_split_gain: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 3,
            learning_rate: 0.3,
            min_child_weight: 1e-3,
            subsample: 1.0,
            l2_reg: 1.0,
            min_split_gain: 0.0,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_trees < 1 {
            return bad("n_trees must be >= 1".into());
        }
        if self.max_depth < 1 {
            return bad("max_depth must be >= 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad(format!(
                "learning_rate {} outside (0,1]",
                self.learning_rate
            ));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad(format!("subsample {} outside (0,1]", self.subsample));
        }
        if [self.l2_reg, self.min_child_weight, self.min_split_gain]
            .iter()
            .any(|v| v.is_nan() || *v < 0.0)
        {
            return bad("l2_reg, min_child_weight and min_split_gain must be >= 0".into());
        }
        Ok(())
    }
}

/// Parameters that shape a single tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub l2_reg: f64,
    pub min_child_weight: f64,
    pub min_split_gain: f64,
}

impl From<&TrainConfig> for TreeParams {
    fn from(c: &TrainConfig) -> Self {
        Self {
            max_depth: c.max_depth,
            l2_reg: c.l2_reg,
            min_child_weight: c.min_child_weight,
            min_split_gain: c.min_split_gain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    let w = -g / (h + lambda);
    if w.is_finite() {
        w
    } else {
        0.0
    }
}

fn score(g: f64, h: f64, lambda: f64) -> f64 {
    let d = h + lambda;
    if d > 0.0 {
        g * g / d
    } else {
        0.0
    }
}

/// Split gain ½[G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)] − γ.
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, p: &TreeParams) -> f64 {
    0.5 * (score(gl, hl, p.l2_reg) + score(gr, hr, p.l2_reg) - score(gl + gr, hl + hr, p.l2_reg))
        - p.min_split_gain
}

/// Threshold strictly between two adjacent distinct values.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m > lo {
        m
    } else {
        hi
    }
}

/// Exact greedy search over all features. Ties keep the earliest
/// (lowest feature index, then lowest threshold) candidate.
#[allow(clippy::needless_range_loop)]
pub fn best_split(
    x: &[Vec<f64>],
    g: &[f64],
    h: &[f64],
    rows: &[usize],
    p: &TreeParams,
) -> Option<SplitCandidate> {
    let n_features = x.first().map_or(0, Vec::len);
    let g_total: f64 = rows.iter().map(|&r| g[r]).sum();
    let h_total: f64 = rows.iter().map(|&r| h[r]).sum();
    let mut best: Option<SplitCandidate> = None;
    let mut order = rows.to_vec();
    for f in 0..n_features {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let (mut gl, mut hl) = (0.0, 0.0);
        for w in 0..order.len().saturating_sub(1) {
            let r = order[w];
            gl += g[r];
            hl += h[r];
            let (lo, hi) = (x[r][f], x[order[w + 1]][f]);
            if lo == hi {
                continue;
            }
            let (gr, hr) = (g_total - gl, h_total - hl);
            if hl < p.min_child_weight || hr < p.min_child_weight {
                continue;
            }
            let gain = split_gain(gl, hl, gr, hr, p);
            if gain > best.map_or(0.0, |b| b.gain) {
                best = Some(SplitCandidate {
                    feature: f,
                    threshold: midpoint(lo, hi),
                    gain,
                });
            }
        }
    }
    best
}

/// Grows one tree on gradient statistics restricted to `rows`.
pub fn fit_tree(x: &[Vec<f64>], g: &[f64], h: &[f64], rows: &[usize], p: &TreeParams) -> Tree {
    fn grow(
        x: &[Vec<f64>],
        g: &[f64],
        h: &[f64],
        rows: &[usize],
        depth: usize,
        p: &TreeParams,
        nodes: &mut Vec<Node>,
    ) -> usize {
        let id = nodes.len();
        let gs: f64 = rows.iter().map(|&r| g[r]).sum();
        let hs: f64 = rows.iter().map(|&r| h[r]).sum();
        nodes.push(Node::Leaf {
            leaf: leaf_weight(gs, hs, p.l2_reg),
        });
        if depth >= p.max_depth || rows.len() < 2 {
            return id;
        }
        let Some(split) = best_split(x, g, h, rows, p) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| x[i][split.feature] < split.threshold);
        let left = grow(x, g, h, &l, depth + 1, p, nodes);
        let right = grow(x, g, h, &r, depth + 1, p, nodes);
        nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
            gain: split.gain,
        };
        id
    }
    let mut nodes = Vec::new();
    grow(x, g, h, rows, 0, p, &mut nodes);
    Tree { nodes }
}

/// Mean logistic loss of raw margins.
pub fn logistic_loss(margins: &[f64], y: &[f64]) -> f64 {
    margins
        .iter()
        .zip(y)
        .map(|(&m, &t)| {
            // log(1 + e^m) − t·m, stable for large |m|.
            let softplus = if m > 0.0 {
                m + (-m).exp().ln_1p()
            } else {
                m.exp().ln_1p()
            };
            softplus - t * m
        })
        .sum::<f64>()
        / margins.len() as f64
}

/// Boosted ensemble on a complete feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

impl Ensemble {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.base_score + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }
}

fn canonical_order(x: &[Vec<f64>], y: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| {
        x[a].iter()
            .zip(&x[b])
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(y[a].total_cmp(&y[b]))
    });
    idx
}

/// Fits an ensemble to labels `y ∈ {0,1}`. Rows are put in a canonical order
/// first, so the result does not depend on input row order.
pub fn boost(x: &[Vec<f64>], y: &[f64], cfg: &TrainConfig) -> Result<Ensemble> {
    cfg.validate()?;
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let positives = y.iter().filter(|&&t| t == 1.0).count();
    let negatives = y.iter().filter(|&&t| t == 0.0).count();
    if positives + negatives != y.len() {
        return Err(Error::InvalidConfig("labels must be 0 or 1".into()));
    }
    if positives < 2 || negatives < 2 {
        return Err(Error::InsufficientData(format!(
            "need >= 2 examples per class, got {positives} positive / {negatives} negative"
        )));
    }
    if let Some((r, _)) = x
        .iter()
        .enumerate()
        .find(|(_, row)| row.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::InsufficientData(format!(
            "non-finite feature in training row {r}"
        )));
    }

    let order = canonical_order(x, y);
    let x: Vec<Vec<f64>> = order.iter().map(|&i| x[i].clone()).collect();
    let y: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let n = x.len();

    let prior = positives as f64 / n as f64;
    let base_score = (prior / (1.0 - prior)).ln();
    let params = TreeParams::from(cfg);
    let mut margins = vec![base_score; n];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n];
    for _ in 0..cfg.n_trees {
        for i in 0..n {
            let p = sigmoid(margins[i]);
            g[i] = p - y[i];
            h[i] = p * (1.0 - p);
        }
        let rows: Vec<usize> = if cfg.subsample < 1.0 {
            (0..n)
                .filter(|_| rng.gen::<f64>() < cfg.subsample)
                .collect()
        } else {
            (0..n).collect()
        };
        let tree = if rows.is_empty() {
            Tree::leaf(0.0)
        } else {
            fit_tree(&x, &g, &h, &rows, &params)
        };
        for (m, row) in margins.iter_mut().zip(&x) {
            *m += cfg.learning_rate * tree.predict(row);
        }
        trees.push(tree);
    }
    Ok(Ensemble {
        base_score,
        learning_rate: cfg.learning_rate,
        trees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gain_formula_by_hand() {
        let p = TreeParams {
            max_depth: 1,
            l2_reg: 1.0,
            min_child_weight: 0.0,
            min_split_gain: 0.0,
        };
        // G_L = -1, H_L = 0.5, G_R = 1, H_R = 0.5: ½[1/1.5 + 1/1.5 − 0] = 2/3.
        assert!((split_gain(-1.0, 0.5, 1.0, 0.5, &p) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_single_class() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let y = vec![1.0, 1.0, 1.0];
        assert!(matches!(
            boost(&x, &y, &TrainConfig::default()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn rejects_nan_features() {
        let x = vec![vec![0.0], vec![f64::NAN], vec![2.0], vec![3.0]];
        let y = vec![0.0, 0.0, 1.0, 1.0];
        assert!(boost(&x, &y, &TrainConfig::default()).is_err());
    }

    #[test]
    fn bad_configs_rejected() {
        for cfg in [
            TrainConfig {
                n_trees: 0,
                ..Default::default()
            },
            TrainConfig {
                max_depth: 0,
                ..Default::default()
            },
            TrainConfig {
                learning_rate: 0.0,
                ..Default::default()
            },
            TrainConfig {
                learning_rate: 1.5,
                ..Default::default()
            },
            TrainConfig {
                subsample: 0.0,
                ..Default::default()
            },
        ] {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn midpoint_never_equals_low() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let t = midpoint(lo, hi);
        assert!(lo < t || t == hi);
        assert!(t <= hi);
    }
}
