use std::str::FromStr;

use serde::Serialize;

use super::qtable::{DFS, Q01, Q05};
use crate::error::{Error, Result};

pub const MAX_GROUPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Alpha {
    P05,
    P01,
}

impl Alpha {
    pub fn value(self) -> f64 {
        match self {
            Alpha::P05 => 0.05,
            Alpha::P01 => 0.01,
        }
    }

    fn table(self) -> &'static [[f64; 9]; 33] {
        match self {
            Alpha::P05 => &Q05,
            Alpha::P01 => &Q01,
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0.05" | ".05" => Ok(Alpha::P05),
            "0.01" | ".01" => Ok(Alpha::P01),
            other => Err(Error::InvalidConfig(format!(
                "alpha must be 0.05 or 0.01, got {other}"
            ))),
        }
    }
}

/// Upper `alpha` quantile of the studentized range for `k` means and `df` error degrees of freedom.
///
/// Between tabulated rows the value is interpolated linearly in ln(df); beyond the
/// last finite row it is interpolated linearly in 1/df towards the asymptote.
pub fn studentized_range_critical(alpha: Alpha, k: usize, df: f64) -> Result<f64> {
    if !(2..=MAX_GROUPS).contains(&k) {
        return Err(Error::InvalidConfig(format!(
            "studentized range table covers 2..={MAX_GROUPS} groups, got {k}"
        )));
    }
    if df.is_nan() || df < DFS[0] {
        return Err(Error::InsufficientData(format!(
            "studentized range needs at least {} error degrees of freedom, got {df}",
            DFS[0]
        )));
    }
    let t = alpha.table();
    let col = k - 2;
    let last = DFS.len() - 1;
    if df >= DFS[last] {
        let (q_last, q_inf) = (t[last][col], t[last + 1][col]);
        return Ok(q_inf + (q_last - q_inf) * (DFS[last] / df));
    }
    let hi = DFS
        .iter()
        .position(|&d| d >= df)
        .expect("df below last row");
    if DFS[hi] == df {
        return Ok(t[hi][col]);
    }
    let lo = hi - 1;
    let f = (df.ln() - DFS[lo].ln()) / (DFS[hi].ln() - DFS[lo].ln());
    Ok(t[lo][col] + f * (t[hi][col] - t[lo][col]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TukeyPair {
    pub model_a: String,
    pub model_b: String,
    /// `mean_b - mean_a`.
    pub mean_diff: f64,
    pub q_statistic: f64,
    pub lower: f64,
    pub upper: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub name: String,
    pub n: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TukeyResult {
    pub alpha: f64,
    pub groups: Vec<GroupSummary>,
    /// Pooled within-group variance.
    pub msw: f64,
    pub df: usize,
    pub critical: f64,
    pub pairs: Vec<TukeyPair>,
}

impl TukeyResult {
    pub fn pair(&self, a: &str, b: &str) -> Option<&TukeyPair> {
        self.pairs
            .iter()
            .find(|p| (p.model_a == a && p.model_b == b) || (p.model_a == b && p.model_b == a))
    }
}

/// Tukey–Kramer pairwise comparison of group means. Groups are processed in name
/// order so the result does not depend on input order.
pub fn tukey_hsd(groups: &[(String, Vec<f64>)], alpha: Alpha) -> Result<TukeyResult> {
    if groups.len() < 2 {
        return Err(Error::InsufficientData(
            "Tukey HSD needs at least 2 groups".into(),
        ));
    }
    let mut sorted: Vec<&(String, Vec<f64>)> = groups.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    for w in sorted.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::InvalidConfig(format!("duplicate group {}", w[0].0)));
        }
    }
    let mut summaries = Vec::with_capacity(sorted.len());
    let mut ssw = 0.0;
    let mut total = 0;
    for (name, vals) in &sorted {
        if vals.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "group {name} has {} values, need at least 2",
                vals.len()
            )));
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        ssw += vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        total += vals.len();
        summaries.push(GroupSummary {
            name: name.clone(),
            n: vals.len(),
            mean,
        });
    }
    let k = summaries.len();
    let df = total - k;
    let msw = ssw / df as f64;
    let critical = studentized_range_critical(alpha, k, df as f64)?;

    let mut pairs = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let (a, b) = (&summaries[i], &summaries[j]);
            let diff = b.mean - a.mean;
            let se = (msw / 2.0 * (1.0 / a.n as f64 + 1.0 / b.n as f64)).sqrt();
            let q = if diff == 0.0 {
                0.0
            } else if se == 0.0 {
                f64::INFINITY
            } else {
                diff.abs() / se
            };
            pairs.push(TukeyPair {
                model_a: a.name.clone(),
                model_b: b.name.clone(),
                mean_diff: diff,
                q_statistic: q,
                lower: diff - critical * se,
                upper: diff + critical * se,
                significant: q > critical,
            });
        }
    }
    Ok(TukeyResult {
        alpha: alpha.value(),
        groups: summaries,
        msw,
        df,
        critical,
        pairs,
    })
}
