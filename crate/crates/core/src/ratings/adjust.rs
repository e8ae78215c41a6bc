use std::collections::BTreeMap;
use std::str::FromStr;

use super::table::{Aspect, RatingsTable};
use crate::error::{Error, Result};

/// The scale midpoint every group is re-centred on.
pub const ANCHOR: f64 = 5.0;
pub const DEFAULT_K_OUTLIER: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AdjustedScores {
    pub values: Vec<f64>,
    pub pid_delta: f64,
    /// Mean and population standard deviation of the shifted scores.
    pub mean: f64,
    pub std: f64,
    pub clipped: usize,
}

/// Re-centre on the anchor, then clip scores whose z-score exceeds `k` to `mean ± k·std`.
///
/// Scores inside the band are returned as shifted, so the z round trip is exact.
pub fn adjust_scores(raw: &[f64], k: f64) -> Result<AdjustedScores> {
    if raw.is_empty() {
        return Err(Error::InsufficientData("no scores to adjust".into()));
    }
    if k.is_nan() || k < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "outlier k must be non-negative, got {k}"
        )));
    }
    let n = raw.len() as f64;
    let pid_delta = ANCHOR - raw.iter().sum::<f64>() / n;
    let shifted: Vec<f64> = raw.iter().map(|x| x + pid_delta).collect();
    let mean = shifted.iter().sum::<f64>() / n;
    let std = (shifted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    let mut clipped = 0;
    let values = if std > 0.0 {
        shifted
            .iter()
            .map(|&x| {
                let z = (x - mean) / std;
                if z.abs() > k {
                    clipped += 1;
                    mean + k.copysign(z) * std
                } else {
                    x
                }
            })
            .collect()
    } else {
        shifted
    };
    Ok(AdjustedScores {
        values,
        pid_delta,
        mean,
        std,
        clipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdjustGroup {
    #[default]
    PerAnnotator,
    Global,
}

impl FromStr for AdjustGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-annotator" => Ok(AdjustGroup::PerAnnotator),
            "global" => Ok(AdjustGroup::Global),
            other => Err(Error::InvalidConfig(format!(
                "adjust group must be per-annotator or global, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjustedRating {
    pub video_id: String,
    pub annotator_id: String,
    pub aspect: Aspect,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableAdjustment {
    pub ratings: Vec<AdjustedRating>,
    pub clipped: usize,
}

/// Averages repeat ratings, then adjusts each group independently.
pub fn adjust_table(table: &RatingsTable, group: AdjustGroup, k: f64) -> Result<TableAdjustment> {
    let mut merged: BTreeMap<(String, Aspect, String), (f64, usize)> = BTreeMap::new();
    for r in table.rows() {
        let e = merged
            .entry((r.annotator_id.clone(), r.aspect, r.video_id.clone()))
            .or_insert((0.0, 0));
        e.0 += r.score;
        e.1 += 1;
    }
    // (group key, aspect) -> (annotator, video, mean raw score)
    type Members = Vec<(String, String, f64)>;
    let mut groups: BTreeMap<(String, Aspect), Members> = BTreeMap::new();
    for ((annotator, aspect, video), (sum, count)) in merged {
        let key = match group {
            AdjustGroup::PerAnnotator => annotator.clone(),
            AdjustGroup::Global => String::new(),
        };
        groups
            .entry((key, aspect))
            .or_default()
            .push((annotator, video, sum / count as f64));
    }
    let mut ratings = Vec::new();
    let mut clipped = 0;
    for ((_, aspect), members) in groups {
        let raw: Vec<f64> = members.iter().map(|m| m.2).collect();
        let adj = adjust_scores(&raw, k)?;
        clipped += adj.clipped;
        for ((annotator_id, video_id, _), score) in members.into_iter().zip(adj.values) {
            ratings.push(AdjustedRating {
                video_id,
                annotator_id,
                aspect,
                score,
            });
        }
    }
    Ok(TableAdjustment { ratings, clipped })
}
