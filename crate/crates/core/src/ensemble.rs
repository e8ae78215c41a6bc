//! Linear blend of naturalness and text similarity fitted to human scores.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitMeta {
    #[serde(default)]
    pub dataset_id: String,
    #[serde(default)]
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleWeights {
    pub intercept: f64,
    pub w_naturalness: f64,
    pub w_textsim: f64,
    #[serde(default)]
    pub meta: FitMeta,
}

impl EnsembleWeights {
    pub fn new(intercept: f64, w_naturalness: f64, w_textsim: f64) -> Self {
        Self {
            intercept,
            w_naturalness,
            w_textsim,
            meta: FitMeta::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.intercept, self.w_naturalness, self.w_textsim]
            .iter()
            .all(|v| v.is_finite())
        {
            Ok(())
        } else {
            Err(Error::ModelFormat("ensemble weights must be finite".into()))
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let w: Self = serde_json::from_str(&text)?;
        w.validate()?;
        Ok(w)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn raw(&self, nat: f64, sim: f64) -> f64 {
        self.intercept + self.w_naturalness * nat + self.w_textsim * sim
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleRow {
    pub naturalness: f64,
    pub text_similarity: f64,
    pub human: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoQualityResult {
    pub video_id: String,
    pub naturalness: f64,
    pub text_similarity: f64,
    pub ensemble_score: f64,
}

/// Ordinary least squares via the 3×3 normal equations.
pub fn fit_ensemble(rows: &[EnsembleRow]) -> Result<EnsembleWeights> {
    if rows.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "ensemble fit needs at least 3 rows, got {}",
            rows.len()
        )));
    }
    for r in rows {
        if ![r.naturalness, r.text_similarity, r.human]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::InsufficientData(
                "non-finite value in ensemble rows".into(),
            ));
        }
    }
    // Center the predictors first so the solve is well conditioned.
    let n = rows.len() as f64;
    let mx1 = rows.iter().map(|r| r.naturalness).sum::<f64>() / n;
    let mx2 = rows.iter().map(|r| r.text_similarity).sum::<f64>() / n;
    let my = rows.iter().map(|r| r.human).sum::<f64>() / n;
    let (mut s11, mut s12, mut s22, mut s1y, mut s2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in rows {
        let (a, b, y) = (r.naturalness - mx1, r.text_similarity - mx2, r.human - my);
        s11 += a * a;
        s12 += a * b;
        s22 += b * b;
        s1y += a * y;
        s2y += b * y;
    }
    let det = s11 * s22 - s12 * s12;
    let scale = (s11 * s22).max(f64::MIN_POSITIVE);
    if s11 == 0.0 || s22 == 0.0 || det <= 1e-12 * scale {
        return Err(Error::RankDeficient(
            "predictors are constant or collinear".into(),
        ));
    }
    let w1 = (s22 * s1y - s12 * s2y) / det;
    let w2 = (s11 * s2y - s12 * s1y) / det;
    let intercept = my - w1 * mx1 - w2 * mx2;
    let w = EnsembleWeights {
        intercept,
        w_naturalness: w1,
        w_textsim: w2,
        meta: FitMeta {
            dataset_id: String::new(),
            rows: rows.len(),
        },
    };
    w.validate()?;
    Ok(w)
}

pub fn score_video(nat: f64, sim: f64, w: &EnsembleWeights) -> f64 {
    w.raw(nat, sim).clamp(0.0, 1.0)
}
