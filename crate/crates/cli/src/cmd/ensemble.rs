use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;
use t2vqa_core::ensemble::{fit_ensemble, score_video, EnsembleRow, EnsembleWeights};
use t2vqa_core::gbt::GbtModel;
use t2vqa_core::ratings::{adjust_table, video_mos, AdjustGroup, RatingsTable};

use super::Common;
use crate::config::RunMeta;
use crate::io::{check_same_ids, csv_with_meta, write_atomic, NumericTable};

const TEXTSIM_COLUMN: &str = "video_score";

/// Naturalness per video from a feature CSV, in file order.
fn naturalness(features: &Path, model: &GbtModel) -> Result<(Vec<String>, BTreeMap<String, f64>)> {
    let t = NumericTable::load_skipping(features, &["label", "split"])?;
    let mut out = BTreeMap::new();
    for vid in &t.order {
        let p = model
            .predict_named(&t.columns, &t.rows[vid])
            .with_context(|| format!("video {vid}"))?;
        out.insert(vid.clone(), p);
    }
    Ok((t.order, out))
}

fn textsim(path: &Path) -> Result<BTreeMap<String, f64>> {
    let t = NumericTable::load_skipping(path, &["model_name"])?;
    let Some(c) = t.column(TEXTSIM_COLUMN) else {
        bail!("{} has no {TEXTSIM_COLUMN} column", path.display());
    };
    t.order
        .iter()
        .map(|v| {
            let s = t.value(v, c).with_context(|| {
                format!("{}: video {v} has no {TEXTSIM_COLUMN}", path.display())
            })?;
            Ok((v.clone(), s))
        })
        .collect()
}

#[derive(Debug, Args, Serialize)]
pub struct TrainEnsembleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub naturalness_model: PathBuf,
    #[arg(long)]
    pub textsim: PathBuf,
    #[arg(long)]
    pub ratings: PathBuf,
    #[arg(long, default_value_t = 3.0)]
    pub k_outlier: f64,
    /// `per-annotator` or `global`.
    #[arg(long, default_value = "per-annotator")]
    pub adjust_group: String,
    /// Label recorded in the weights file.
    #[arg(long, default_value = "")]
    pub dataset_id: String,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_train(a: &TrainEnsembleArgs) -> Result<()> {
    let meta = RunMeta::new(a.common.seed, a);
    let model = GbtModel::load(&a.naturalness_model)?;
    let (_, nat) = naturalness(&a.features, &model)?;
    let sim = textsim(&a.textsim)?;
    let table = RatingsTable::load(&a.ratings)?;
    let group: AdjustGroup = a.adjust_group.parse()?;
    let adj = adjust_table(&table, group, a.k_outlier)?;

    let mut rows = Vec::new();
    let mut missing = Vec::new();
    for v in video_mos(&table, &adj.ratings) {
        let Some((human, _)) = v.combined() else {
            continue;
        };
        match (nat.get(&v.video_id), sim.get(&v.video_id)) {
            (Some(&n), Some(&s)) => rows.push(EnsembleRow {
                naturalness: n,
                text_similarity: s,
                human,
            }),
            _ => missing.push(v.video_id),
        }
    }
    if !missing.is_empty() {
        bail!(
            "rated videos without features or similarity: [{}]",
            missing.join(", ")
        );
    }
    let mut w = fit_ensemble(&rows)?;
    w.meta.dataset_id = a.dataset_id.clone();
    let mut obj = serde_json::to_value(&w)?;
    obj["meta"]["tool_version"] = meta.tool_version.into();
    obj["meta"]["seed"] = meta.seed.into();
    obj["meta"]["config_hash"] = meta.config_hash.clone().into();
    write_atomic(
        &a.out,
        (serde_json::to_string_pretty(&obj)? + "\n").as_bytes(),
    )?;
    println!(
        "fitted on {} videos: intercept {:.4}, w_naturalness {:.4}, w_textsim {:.4}",
        rows.len(),
        w.intercept,
        w.w_naturalness,
        w.w_textsim
    );
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct ScoreArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub textsim: PathBuf,
    #[arg(long)]
    pub naturalness_model: PathBuf,
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_score(a: &ScoreArgs) -> Result<()> {
    let meta = RunMeta::new(a.common.seed, a);
    let model = GbtModel::load(&a.naturalness_model)?;
    let weights = EnsembleWeights::load(&a.weights)?;
    let (order, nat) = naturalness(&a.features, &model)?;
    let sim = textsim(&a.textsim)?;
    check_same_ids("features", nat.keys(), "textsim", sim.keys())?;

    let header: Vec<String> = [
        "video_id",
        "naturalness",
        "text_similarity",
        "ensemble_score",
    ]
    .map(String::from)
    .to_vec();
    let rows: Vec<Vec<String>> = order
        .iter()
        .map(|v| {
            let (n, s) = (nat[v], sim[v]);
            vec![
                v.clone(),
                n.to_string(),
                s.to_string(),
                score_video(n, s, &weights).to_string(),
            ]
        })
        .collect();
    write_atomic(&a.out, &csv_with_meta(&meta.json(), &header, &rows)?)?;
    println!("scored {} videos into {}", rows.len(), a.out.display());
    Ok(())
}
