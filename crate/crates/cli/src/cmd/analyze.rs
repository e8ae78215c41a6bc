use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde::Serialize;
use t2vqa_core::ratings::{analyze, emit_report, AnalysisOptions, RatingsTable};

use super::Common;
use crate::config::RunMeta;
use crate::io::NumericTable;

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub ratings: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Per-video metric CSV (`video_id` plus numeric columns) to rank against
    /// the human scores; repeatable.
    #[arg(long)]
    pub metric_scores: Vec<PathBuf>,
    #[arg(long, default_value_t = 3.0)]
    pub k_outlier: f64,
    /// `per-annotator` or `global`.
    #[arg(long, default_value = "per-annotator")]
    pub adjust_group: String,
    /// 0.05 or 0.01.
    #[arg(long, default_value = "0.05")]
    pub alpha: String,
}

pub fn run(a: &AnalyzeArgs) -> Result<()> {
    let meta = RunMeta::new(a.common.seed, a);
    let opts = AnalysisOptions {
        k_outlier: a.k_outlier,
        group: a.adjust_group.parse()?,
        alpha: a.alpha.parse()?,
    };
    let table = RatingsTable::load(&a.ratings)?;
    let mut metrics = Vec::new();
    for path in &a.metric_scores {
        let t = NumericTable::load_skipping(path, &["model_name", "label", "split"])?;
        for (c, name) in t.columns.iter().enumerate() {
            let per_video: BTreeMap<String, f64> = t
                .rows
                .iter()
                .filter_map(|(v, vals)| vals[c].map(|x| (v.clone(), x)))
                .collect();
            metrics.push((name.clone(), per_video));
        }
    }
    let analysis = analyze(&table, &metrics, &opts)?;
    emit_report(&analysis, &a.out_dir, Some(&meta.json()))?;
    for s in &analysis.stats {
        println!(
            "{}: alignment {:.3} ± {:.3}, perception {:.3} ± {:.3}, combined {:.3}",
            s.model_name,
            s.alignment.mean,
            s.alignment.std,
            s.perception.mean,
            s.perception.std,
            s.combined
        );
    }
    if let Some(t) = &analysis.tukey {
        let sig = t.pairs.iter().filter(|p| p.significant).count();
        println!(
            "Tukey HSD: {sig} of {} pairs significant at alpha {}",
            t.pairs.len(),
            t.alpha
        );
    }
    println!("report written to {}", a.out_dir.display());
    Ok(())
}
