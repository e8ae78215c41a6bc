use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde::Serialize;
use t2vqa_core::gbt::{grid_search, GridSpec, LabelledSet};

use super::Common;
use crate::config::RunMeta;
use crate::io::write_atomic;

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Feature CSV; may carry `label` and `split` columns itself.
    #[arg(long)]
    pub features: PathBuf,
    /// `video_id,label[,split]` CSV overriding labels in the feature file.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [50usize, 100, 200])]
    pub n_trees: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4])]
    pub max_depth: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1f64, 0.3])]
    pub learning_rate: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0f64])]
    pub l2_reg: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub min_child_weight: f64,
    #[arg(long, default_value_t = 1.0)]
    pub subsample: f64,
    /// Model JSON output.
    #[arg(long)]
    pub out: PathBuf,
    /// Grid-search report JSON output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn run(a: &TrainArgs) -> Result<()> {
    let meta = RunMeta::new(a.common.seed, a);
    let mut data = LabelledSet::load(&a.features, a.labels.as_ref())?;
    if !data.has_splits() {
        data.assign_splits(a.common.seed);
    }
    let spec = GridSpec {
        n_trees: a.n_trees.clone(),
        max_depth: a.max_depth.clone(),
        learning_rate: a.learning_rate.clone(),
        l2_reg: a.l2_reg.clone(),
        min_child_weight: a.min_child_weight,
        subsample: a.subsample,
        seed: a.common.seed,
    };
    let (model, report) = grid_search(&data, &spec.configs())?;

    let mut obj: serde_json::Value = serde_json::from_str(&model.to_json())?;
    obj["meta"] = serde_json::to_value(&meta)?;
    write_atomic(
        &a.out,
        (serde_json::to_string_pretty(&obj)? + "\n").as_bytes(),
    )?;
    let mut rep = serde_json::to_value(&report)?;
    rep["meta"] = serde_json::to_value(&meta)?;
    if let Some(path) = &a.report {
        write_atomic(
            path,
            (serde_json::to_string_pretty(&rep)? + "\n").as_bytes(),
        )?;
    }
    println!(
        "best n_trees={} max_depth={} learning_rate={} l2_reg={}: F1 train {:.4} val {:.4} test {:.4}",
        report.best.n_trees,
        report.best.max_depth,
        report.best.learning_rate,
        report.best.l2_reg,
        report.train_f1,
        report.val_f1,
        report.test_f1
    );
    Ok(())
}
