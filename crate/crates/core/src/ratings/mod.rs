//! Human-rating analysis: score adjustment, per-model statistics, Tukey HSD,
//! prompt-length breakdown and metric rank comparison.

mod adjust;
mod qtable;
mod rank;
mod report;
mod stats;
mod svg;
mod table;
mod tukey;

use std::collections::BTreeMap;

pub use adjust::{
    adjust_scores, adjust_table, AdjustGroup, AdjustedRating, AdjustedScores, TableAdjustment,
    ANCHOR, DEFAULT_K_OUTLIER,
};
pub use rank::{
    kendall_tau_b, prompt_length_bucket, rank_agreement, rank_models, LengthBucket, RankedModel,
};
pub use report::{emit_report, model_stats_csv, tukey_csv, MetricRanking, REPORT_FILES};
pub use stats::{combined_by_model, model_stats, video_mos, MeanStd, ModelStats, VideoMos};
pub use table::{Aspect, Rating, RatingsTable};
pub use tukey::{
    studentized_range_critical, tukey_hsd, Alpha, GroupSummary, TukeyPair, TukeyResult, MAX_GROUPS,
};

use crate::error::{Error, Result};

pub const HUMAN_METRIC: &str = "human";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub k_outlier: f64,
    pub group: AdjustGroup,
    pub alpha: Alpha,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            k_outlier: DEFAULT_K_OUTLIER,
            group: AdjustGroup::PerAnnotator,
            alpha: Alpha::P05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub videos: Vec<VideoMos>,
    pub stats: Vec<ModelStats>,
    /// Absent when fewer than two models were rated.
    pub tukey: Option<TukeyResult>,
    /// Human ranking first, then one entry per extra metric.
    pub rankings: Vec<MetricRanking>,
    pub clipped: usize,
}

/// Runs the full pipeline. `metrics` maps a metric name to per-video scores; each
/// metric is averaged per model and ranked against the human ranking.
pub fn analyze(
    table: &RatingsTable,
    metrics: &[(String, BTreeMap<String, f64>)],
    opts: &AnalysisOptions,
) -> Result<Analysis> {
    if table.rows().is_empty() {
        return Err(Error::Ratings("ratings table is empty".into()));
    }
    let adj = adjust_table(table, opts.group, opts.k_outlier)?;
    let videos = video_mos(table, &adj.ratings);
    let stats = model_stats(&videos)?;
    let tukey = if stats.len() >= 2 {
        Some(tukey_hsd(&combined_by_model(&videos), opts.alpha)?)
    } else {
        None
    };

    let human = rank_models(
        &stats
            .iter()
            .map(|s| (s.model_name.clone(), s.combined))
            .collect::<Vec<_>>(),
    )?;
    let mut rankings = vec![MetricRanking {
        metric: HUMAN_METRIC.to_string(),
        ranking: human.clone(),
        tau: None,
    }];
    for (name, per_video) in metrics {
        let mut acc: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
        for v in &videos {
            if let Some(s) = per_video.get(&v.video_id) {
                let e = acc.entry(v.model_name.as_str()).or_insert((0.0, 0));
                e.0 += s;
                e.1 += 1;
            }
        }
        let scores: Vec<(String, f64)> = acc
            .into_iter()
            .map(|(m, (s, n))| (m.to_string(), s / n as f64))
            .collect();
        let ranking = rank_models(&scores)?;
        let tau = rank_agreement(&human, &ranking).map_err(|_| {
            Error::Ratings(format!("metric {name} does not cover every rated model"))
        })?;
        rankings.push(MetricRanking {
            metric: name.clone(),
            ranking,
            tau: Some(tau),
        });
    }
    Ok(Analysis {
        videos,
        stats,
        tukey,
        rankings,
        clipped: adj.clipped,
    })
}
