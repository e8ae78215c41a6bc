//! Inception Score and the uniform-marginal variant (MIS).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-6;

/// Per-frame class distributions over `classes` labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassProbs {
    pub classes: usize,
    pub frames: Vec<Vec<f64>>,
}

impl ClassProbs {
    pub fn new(classes: usize, frames: Vec<Vec<f64>>) -> Result<Self> {
        let probs = Self { classes, frames };
        probs.validate()?;
        Ok(probs)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDistribution(m));
        if self.classes == 0 {
            return bad("zero classes".into());
        }
        if self.frames.is_empty() {
            return bad("no frame distributions".into());
        }
        for (i, p) in self.frames.iter().enumerate() {
            if p.len() != self.classes {
                return bad(format!(
                    "frame {i} has {} entries, expected {}",
                    p.len(),
                    self.classes
                ));
            }
            if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return bad(format!("frame {i} has entry {v}"));
            }
            let s: f64 = p.iter().sum();
            if (s - 1.0).abs() > SUM_TOL {
                return bad(format!("frame {i} sums to {s}"));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let probs: Self = serde_json::from_str(&text)?;
        probs.validate()?;
        Ok(probs)
    }

    /// Mean distribution across frames.
    pub fn marginal(&self) -> Vec<f64> {
        let n = self.frames.len() as f64;
        let mut m = vec![0.0; self.classes];
        for p in &self.frames {
            for (acc, v) in m.iter_mut().zip(p) {
                *acc += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= n);
        m
    }
}

fn entropy_nats(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|v| v * v.ln())
        .sum::<f64>()
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| a * (a / b).ln())
        .sum()
}

/// exp(KL(p̄ ‖ uniform)) = K·exp(−H(p̄)); ranges over [1, K].
pub fn modified_inception_score(probs: &ClassProbs) -> Result<f64> {
    probs.validate()?;
    let k = probs.classes as f64;
    let h = entropy_nats(&probs.marginal());
    Ok((k.ln() - h).exp().clamp(1.0, k))
}

/// exp(mean_i KL(p_i ‖ p̄)).
pub fn inception_score(probs: &ClassProbs) -> Result<f64> {
    probs.validate()?;
    let marginal = probs.marginal();
    let mean_kl =
        probs.frames.iter().map(|p| kl(p, &marginal)).sum::<f64>() / probs.frames.len() as f64;
    Ok(mean_kl.max(0.0).exp())
}
