//! Exhaustive hyper-parameter search scored by validation F1.

use serde::{Deserialize, Serialize};

use super::data::{LabelledRow, LabelledSet, Split};
use super::metrics::{classify_threshold, f1_score};
use super::model::{train_on_rows, GbtModel};
use super::train::TrainConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_trees: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub l2_reg: Vec<f64>,
    pub min_child_weight: f64,
    pub subsample: f64,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_trees: vec![50, 100, 200],
            max_depth: vec![2, 3, 4],
            learning_rate: vec![0.1, 0.3],
            l2_reg: vec![1.0],
            min_child_weight: 1e-3,
            subsample: 1.0,
            seed: 42,
        }
    }
}

impl GridSpec {
    /// Grid points in lexicographic (n_trees, max_depth, learning_rate, l2_reg) order.
    pub fn configs(&self) -> Vec<TrainConfig> {
        let mut out = Vec::new();
        for &n_trees in &self.n_trees {
            for &max_depth in &self.max_depth {
                for &learning_rate in &self.learning_rate {
                    for &l2_reg in &self.l2_reg {
                        out.push(TrainConfig {
                            n_trees,
                            max_depth,
                            learning_rate,
                            l2_reg,
                            min_child_weight: self.min_child_weight,
                            subsample: self.subsample,
                            min_split_gain: 0.0,
                            seed: self.seed,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub config: TrainConfig,
    pub val_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    pub best: TrainConfig,
    pub train_f1: f64,
    pub val_f1: f64,
    pub test_f1: f64,
    pub points: Vec<GridPoint>,
}

pub fn evaluate_f1(model: &GbtModel, rows: &[&LabelledRow], threshold: f64) -> Result<f64> {
    let preds: Vec<bool> = rows
        .iter()
        .map(|r| classify_threshold(model.predict_row(&r.features), threshold))
        .collect();
    let labels: Vec<bool> = rows.iter().map(|r| r.label == 1).collect();
    f1_score(&preds, &labels)
}

/// Trains every grid point on `train`, keeps the best validation F1.
/// Ties prefer fewer trees, then shallower trees, then earlier grid order.
pub fn grid_search(data: &LabelledSet, configs: &[TrainConfig]) -> Result<(GbtModel, GridReport)> {
    if configs.is_empty() {
        return Err(Error::InvalidConfig("empty grid".into()));
    }
    let train = data.split(Split::Train);
    let val = data.split(Split::Val);
    let test = data.split(Split::Test);
    for (name, rows) in [("train", &train), ("val", &val), ("test", &test)] {
        if rows.is_empty() {
            return Err(Error::InsufficientData(format!("empty {name} split")));
        }
    }
    let mut best: Option<(usize, GbtModel, f64)> = None;
    let mut points = Vec::with_capacity(configs.len());
    for (i, cfg) in configs.iter().enumerate() {
        let model = train_on_rows(&data.feature_names, &train, cfg)?;
        let f1 = evaluate_f1(&model, &val, 0.5)?;
        points.push(GridPoint {
            config: cfg.clone(),
            val_f1: f1,
        });
        let better = match &best {
            None => true,
            Some((j, _, bf1)) => {
                let b = &configs[*j];
                f1 > *bf1 || (f1 == *bf1 && (cfg.n_trees, cfg.max_depth) < (b.n_trees, b.max_depth))
            }
        };
        if better {
            best = Some((i, model, f1));
        }
    }
    let (i, model, val_f1) = best.expect("grid is non-empty");
    let report = GridReport {
        best: configs[i].clone(),
        train_f1: evaluate_f1(&model, &train, 0.5)?,
        val_f1,
        test_f1: evaluate_f1(&model, &test, 0.5)?,
        points,
    };
    Ok((model, report))
}
