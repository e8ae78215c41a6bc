use std::collections::BTreeMap;

use serde::Serialize;

use super::adjust::AdjustedRating;
use super::table::{Aspect, RatingsTable};
use crate::error::{Error, Result};

/// Per-video adjusted mean opinion scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VideoMos {
    pub video_id: String,
    pub model_name: String,
    pub prompt: String,
    pub alignment: Option<f64>,
    pub perception: Option<f64>,
}

impl VideoMos {
    pub fn get(&self, aspect: Aspect) -> Option<f64> {
        match aspect {
            Aspect::Alignment => self.alignment,
            Aspect::Perception => self.perception,
        }
    }

    /// Mean of both aspects on a 0..1 scale, and whether it had to be clamped.
    pub fn combined(&self) -> Option<(f64, bool)> {
        let raw = (self.alignment? + self.perception?) / 2.0 / 10.0;
        let c = raw.clamp(0.0, 1.0);
        Some((c, c != raw))
    }
}

pub fn video_mos(table: &RatingsTable, adjusted: &[AdjustedRating]) -> Vec<VideoMos> {
    let mut acc: BTreeMap<(&str, Aspect), (f64, usize)> = BTreeMap::new();
    for r in adjusted {
        let e = acc
            .entry((r.video_id.as_str(), r.aspect))
            .or_insert((0.0, 0));
        e.0 += r.score;
        e.1 += 1;
    }
    let mean = |v: &str, a| acc.get(&(v, a)).map(|&(s, n)| s / n as f64);
    table
        .videos()
        .into_iter()
        .map(|(video_id, (model_name, prompt))| VideoMos {
            alignment: mean(&video_id, Aspect::Alignment),
            perception: mean(&video_id, Aspect::Perception),
            video_id,
            model_name,
            prompt,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelStats {
    pub model_name: String,
    pub n_videos: usize,
    pub alignment: MeanStd,
    pub perception: MeanStd,
    pub combined: f64,
    /// Videos whose combined score fell outside [0, 1] before clamping.
    pub clamped: usize,
}

/// Per-model statistics over videos; videos missing an aspect are left out of `combined`.
pub fn model_stats(videos: &[VideoMos]) -> Result<Vec<ModelStats>> {
    let mut by_model: BTreeMap<&str, Vec<&VideoMos>> = BTreeMap::new();
    for v in videos {
        by_model.entry(&v.model_name).or_default().push(v);
    }
    if by_model.is_empty() {
        return Err(Error::Ratings("no models in ratings".into()));
    }
    let mut out = Vec::with_capacity(by_model.len());
    for (model, vs) in by_model {
        let aspect = |a: Aspect| -> Result<MeanStd> {
            let vals: Vec<f64> = vs.iter().filter_map(|v| v.get(a)).collect();
            if vals.is_empty() {
                return Err(Error::Ratings(format!("model {model} has no {a} ratings")));
            }
            Ok(MeanStd::of(&vals))
        };
        let alignment = aspect(Aspect::Alignment)?;
        let perception = aspect(Aspect::Perception)?;
        let combos: Vec<(f64, bool)> = vs.iter().filter_map(|v| v.combined()).collect();
        if combos.is_empty() {
            return Err(Error::Ratings(format!(
                "model {model} has no video rated on both aspects"
            )));
        }
        out.push(ModelStats {
            model_name: model.to_string(),
            n_videos: vs.len(),
            alignment,
            perception,
            combined: combos.iter().map(|c| c.0).sum::<f64>() / combos.len() as f64,
            clamped: combos.iter().filter(|c| c.1).count(),
        });
    }
    Ok(out)
}

/// Combined per-video scores grouped by model, in model-name order.
pub fn combined_by_model(videos: &[VideoMos]) -> Vec<(String, Vec<f64>)> {
    let mut m: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for v in videos {
        if let Some((c, _)) = v.combined() {
            m.entry(v.model_name.clone()).or_default().push(c);
        }
    }
    m.into_iter().collect()
}
