use std::path::Path;

use serde::{Deserialize, Serialize};

use super::data::{LabelledRow, LabelledSet, Split};
use super::train::{boost, sigmoid, TrainConfig};
use super::tree::Tree;
use crate::error::{Error, Result};
use crate::features::FeatureVector;

pub const GBT_MODEL_VERSION: u32 = 1;
/// Margins are clipped so the sigmoid stays strictly inside (0, 1).
const MAX_MARGIN: f64 = 30.0;

/// Trained naturalness classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub version: u32,
    pub feature_names: Vec<String>,
    pub base_score: f64,
    pub learning_rate: f64,
    /// Training-split median per feature, substituted for absent values.
    pub imputation: Vec<f64>,
    pub trees: Vec<Tree>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

impl GbtModel {
    pub fn validate(&self) -> Result<()> {
        let d = self.feature_names.len();
        if self.imputation.len() != d {
            return Err(Error::ModelFormat(format!(
                "{} imputation values for {d} features",
                self.imputation.len()
            )));
        }
        if !self.base_score.is_finite() || !self.learning_rate.is_finite() {
            return Err(Error::ModelFormat(
                "non-finite base_score or learning_rate".into(),
            ));
        }
        for (i, t) in self.trees.iter().enumerate() {
            t.validate(d)
                .map_err(|e| Error::ModelFormat(format!("tree {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        if m.version != GBT_MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported gbt model version {}",
                m.version
            )));
        }
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn impute(&self, values: &[Option<f64>]) -> Vec<f64> {
        values
            .iter()
            .zip(&self.imputation)
            .map(|(v, m)| v.unwrap_or(*m))
            .collect()
    }

    /// Raw log-odds for a complete row in model feature order.
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.base_score + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }

    /// Probability of "natural" for a row in model feature order.
    pub fn predict_row(&self, values: &[Option<f64>]) -> f64 {
        sigmoid(
            self.margin(&self.impute(values))
                .clamp(-MAX_MARGIN, MAX_MARGIN),
        )
    }

    /// Looks features up by name; the name sets must match exactly.
    pub fn predict_named(&self, names: &[String], values: &[Option<f64>]) -> Result<f64> {
        if names.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: names.len(),
                right: values.len(),
            });
        }
        let missing: Vec<&str> = self
            .feature_names
            .iter()
            .filter(|n| !names.contains(n))
            .map(String::as_str)
            .collect();
        let extra: Vec<&str> = names
            .iter()
            .filter(|n| !self.feature_names.contains(n))
            .map(String::as_str)
            .collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(Error::SchemaMismatch(format!(
                "missing features {missing:?}, unexpected features {extra:?}"
            )));
        }
        let row: Vec<Option<f64>> = self
            .feature_names
            .iter()
            .map(|n| values[names.iter().position(|m| m == n).expect("checked above")])
            .collect();
        Ok(self.predict_row(&row))
    }
}

/// Naturalness score in (0, 1) for an extracted feature vector.
pub fn predict_naturalness(model: &GbtModel, x: &FeatureVector) -> Result<f64> {
    model.predict_named(x.names(), x.values())
}

/// Trains on the `train` split (or on every row when no split tags exist).
pub fn train_gbt(data: &LabelledSet, config: &TrainConfig) -> Result<GbtModel> {
    let rows: Vec<&LabelledRow> = if data.rows.iter().any(|r| r.split.is_some()) {
        data.split(Split::Train)
    } else {
        data.rows.iter().collect()
    };
    train_on_rows(&data.feature_names, &rows, config)
}

pub(crate) fn train_on_rows(
    names: &[String],
    rows: &[&LabelledRow],
    config: &TrainConfig,
) -> Result<GbtModel> {
    // A feature absent from every training row (say, BRISQUE run without a model)
    // imputes to 0; being constant it never wins a split.
    let imputation: Vec<f64> = (0..names.len())
        .map(|j| {
            let present: Vec<f64> = rows
                .iter()
                .filter_map(|r| r.features[j])
                .filter(|v| v.is_finite())
                .collect();
            median(present).unwrap_or(0.0)
        })
        .collect();
    let x: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            r.features
                .iter()
                .zip(&imputation)
                .map(|(v, m)| v.unwrap_or(*m))
                .collect()
        })
        .collect();
    let y: Vec<f64> = rows.iter().map(|r| f64::from(r.label)).collect();
    let ens = boost(&x, &y, config)?;
    let model = GbtModel {
        version: GBT_MODEL_VERSION,
        feature_names: names.to_vec(),
        base_score: ens.base_score,
        learning_rate: ens.learning_rate,
        imputation,
        trees: ens.trees,
    };
    model.validate()?;
    Ok(model)
}
