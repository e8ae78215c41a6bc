//! Exhaustive reference for greedy tree growth, plus shared GBT fixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use t2vqa_core::gbt::{
    classify_threshold, f1_score, fit_tree, train_gbt, LabelledRow, LabelledSet, Node, Split,
    TrainConfig, Tree, TreeParams,
};

pub fn set(x: &[Vec<f64>], y: &[u8], splits: Option<&[Split]>) -> LabelledSet {
    LabelledSet {
        feature_names: (0..x[0].len()).map(|i| format!("f{i}")).collect(),
        rows: x
            .iter()
            .zip(y)
            .enumerate()
            .map(|(i, (r, &l))| LabelledRow {
                video_id: format!("v{i:03}"),
                features: r.iter().map(|&v| Some(v)).collect(),
                label: l,
                split: splits.map(|s| s[i % s.len()]),
            })
            .collect(),
    }
}

pub fn separable(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::new();
    let mut y = Vec::new();
    while x.len() < n {
        let a: f64 = rng.gen_range(-1.0..1.0);
        let b: f64 = rng.gen_range(-1.0..1.0);
        let s = a + 0.5 * b;
        if s.abs() < 0.05 {
            continue;
        }
        x.push(vec![a, b]);
        y.push(u8::from(s > 0.0));
    }
    (x, y)
}

pub enum RefNode {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        gain: f64,
        left: Box<RefNode>,
        right: Box<RefNode>,
    },
}

pub fn ref_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64) -> f64 {
    let s = |g: f64, h: f64| g * g / (h + lambda);
    0.5 * (s(gl, hl) + s(gr, hr) - s(gl + gr, hl + hr))
}

#[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
pub fn ref_tree(
    x: &[Vec<f64>],
    g: &[f64],
    h: &[f64],
    rows: &[usize],
    depth: usize,
    max_depth: usize,
    lambda: f64,
    mcw: f64,
) -> RefNode {
    let gs: f64 = rows.iter().map(|&r| g[r]).sum();
    let hs: f64 = rows.iter().map(|&r| h[r]).sum();
    let leaf = RefNode::Leaf(-gs / (hs + lambda));
    if depth >= max_depth || rows.len() < 2 {
        return leaf;
    }
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..x[0].len() {
        let mut vals: Vec<f64> = rows.iter().map(|&r| x[r][f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = w[0] + (w[1] - w[0]) / 2.0;
            let left: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] < t).collect();
            let right: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] >= t).collect();
            let (gl, hl) = (
                left.iter().map(|&r| g[r]).sum::<f64>(),
                left.iter().map(|&r| h[r]).sum::<f64>(),
            );
            let (gr, hr) = (
                right.iter().map(|&r| g[r]).sum::<f64>(),
                right.iter().map(|&r| h[r]).sum::<f64>(),
            );
            if hl < mcw || hr < mcw {
                continue;
            }
            let gain = ref_gain(gl, hl, gr, hr, lambda);
            if gain > best.map_or(0.0, |b| b.2) {
                best = Some((f, t, gain));
            }
        }
    }
    let Some((feature, threshold, gain)) = best else {
        return leaf;
    };
    let left: Vec<usize> = rows
        .iter()
        .copied()
        .filter(|&r| x[r][feature] < threshold)
        .collect();
    let right: Vec<usize> = rows
        .iter()
        .copied()
        .filter(|&r| x[r][feature] >= threshold)
        .collect();
    RefNode::Split {
        feature,
        threshold,
        gain,
        left: Box::new(ref_tree(x, g, h, &left, depth + 1, max_depth, lambda, mcw)),
        right: Box::new(ref_tree(x, g, h, &right, depth + 1, max_depth, lambda, mcw)),
    }
}

pub fn same_tree(t: &Tree, id: usize, r: &RefNode) -> Result<(), String> {
    match (&t.nodes[id], r) {
        (Node::Leaf { leaf }, RefNode::Leaf(v)) => {
            if (leaf - v).abs() <= 1e-12 {
                Ok(())
            } else {
                Err(format!("leaf {leaf} vs {v}"))
            }
        }
        (
            Node::Split {
                feature,
                threshold,
                left,
                right,
                gain,
            },
            RefNode::Split {
                feature: f,
                threshold: t2,
                gain: g2,
                left: l2,
                right: r2,
            },
        ) => {
            if feature != f || threshold != t2 || (gain - g2).abs() > 1e-12 {
                return Err(format!(
                    "split ({feature}, {threshold}, {gain}) vs ({f}, {t2}, {g2})"
                ));
            }
            same_tree(t, *left, l2)?;
            same_tree(t, *right, r2)
        }
        _ => Err("node kinds differ".into()),
    }
}

pub fn dyadic_problem(seed: u64, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(0..8) as f64).collect())
        .collect();
    // Balanced labels give p = 0.5 for the first tree, so g = ±0.5 and h = 0.25 exactly.
    let mut labels: Vec<bool> = (0..n).map(|i| i < n / 2).collect();
    for i in (1..n).rev() {
        labels.swap(i, rng.gen_range(0..=i));
    }
    let g = labels.iter().map(|&l| if l { -0.5 } else { 0.5 }).collect();
    let h = vec![0.25; n];
    (x, g, h)
}

pub fn training_f1(model: &t2vqa_core::gbt::GbtModel, x: &[Vec<f64>], y: &[u8]) -> f64 {
    let preds: Vec<bool> = x
        .iter()
        .map(|r| {
            classify_threshold(
                model.predict_row(&r.iter().map(|&v| Some(v)).collect::<Vec<_>>()),
                0.5,
            )
        })
        .collect();
    let labels: Vec<bool> = y.iter().map(|&l| l == 1).collect();
    f1_score(&preds, &labels).unwrap()
}

/// Greedy trees against the exhaustive builder on `cases` random problems.
pub fn check_exhaustive(seed: u64, cases: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let (n, d, depth) = (
            rng.gen_range(2..=50),
            rng.gen_range(1..4),
            rng.gen_range(1..=2),
        );
        let (x, g, h) = dyadic_problem(rng.gen(), n, d);
        let rows: Vec<usize> = (0..n).collect();
        let p = TreeParams {
            max_depth: depth,
            l2_reg: 1.0,
            min_child_weight: 1e-3,
            min_split_gain: 0.0,
        };
        let fast = fit_tree(&x, &g, &h, &rows, &p);
        let reference = ref_tree(&x, &g, &h, &rows, 0, depth, 1.0, 1e-3);
        same_tree(&fast, 0, &reference).map_err(|e| format!("case {case}: {e}"))?;
    }
    Ok(())
}

pub fn gbt_suite() -> Result<(), String> {
    let (x, y) = separable(200, 1);
    let model =
        train_gbt(&set(&x, &y, None), &TrainConfig::default()).map_err(|e| e.to_string())?;
    let f1 = training_f1(&model, &x, &y);
    if f1 != 1.0 {
        return Err(format!("separable training F1 {f1}"));
    }
    check_exhaustive(77, 300)?;
    let cfg = TrainConfig {
        n_trees: 30,
        subsample: 0.8,
        seed: 9,
        ..TrainConfig::default()
    };
    let data = set(&x, &y, None);
    let a = train_gbt(&data, &cfg).map_err(|e| e.to_string())?.to_json();
    let b = train_gbt(&data, &cfg).map_err(|e| e.to_string())?.to_json();
    if a != b {
        return Err("serialization differs between identical runs".into());
    }
    Ok(())
}
