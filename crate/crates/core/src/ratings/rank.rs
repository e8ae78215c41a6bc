use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthBucket {
    Short,
    Average,
    Long,
}

impl LengthBucket {
    pub const ALL: [LengthBucket; 3] = [
        LengthBucket::Short,
        LengthBucket::Average,
        LengthBucket::Long,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LengthBucket::Short => "short",
            LengthBucket::Average => "average",
            LengthBucket::Long => "long",
        }
    }
}

impl fmt::Display for LengthBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Word-count bucket: up to 8 words is short, 9 to 13 average, 14 or more long.
pub fn prompt_length_bucket(prompt: &str) -> LengthBucket {
    match prompt.split_whitespace().count() {
        0..=8 => LengthBucket::Short,
        9..=13 => LengthBucket::Average,
        _ => LengthBucket::Long,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedModel {
    pub model_name: String,
    pub score: f64,
    /// 1 is best; tied scores share the smallest rank of the tie.
    pub rank: usize,
}

/// Ranks by descending score, breaking display order ties by name.
pub fn rank_models(scores: &[(String, f64)]) -> Result<Vec<RankedModel>> {
    if let Some((m, _)) = scores.iter().find(|(_, s)| s.is_nan()) {
        return Err(Error::InvalidConfig(format!("score for {m} is NaN")));
    }
    let mut v: Vec<&(String, f64)> = scores.iter().collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut out: Vec<RankedModel> = Vec::with_capacity(v.len());
    for (i, (name, score)) in v.into_iter().enumerate() {
        let rank = match out.last() {
            Some(prev) if prev.score == *score => prev.rank,
            _ => i + 1,
        };
        out.push(RankedModel {
            model_name: name.clone(),
            score: *score,
            rank,
        });
    }
    Ok(out)
}

/// Kendall tau-b between two rankings of the same models.
pub fn rank_agreement(a: &[RankedModel], b: &[RankedModel]) -> Result<f64> {
    let ra: BTreeMap<&str, usize> = a.iter().map(|r| (r.model_name.as_str(), r.rank)).collect();
    let rb: BTreeMap<&str, usize> = b.iter().map(|r| (r.model_name.as_str(), r.rank)).collect();
    if ra.len() != a.len() || rb.len() != b.len() || !ra.keys().eq(rb.keys()) {
        return Err(Error::InvalidConfig(
            "rankings cover different model sets".into(),
        ));
    }
    let pairs: Vec<(f64, f64)> = ra.iter().map(|(m, &x)| (x as f64, rb[m] as f64)).collect();
    kendall_tau_b(&pairs)
}

pub fn kendall_tau_b(pairs: &[(f64, f64)]) -> Result<f64> {
    let (mut conc, mut disc, mut tie_x, mut tie_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let dx = pairs[i].0 - pairs[j].0;
            let dy = pairs[i].1 - pairs[j].1;
            match (dx == 0.0, dy == 0.0) {
                (true, true) => {
                    tie_x += 1;
                    tie_y += 1;
                }
                (true, false) => tie_x += 1,
                (false, true) => tie_y += 1,
                _ if (dx > 0.0) == (dy > 0.0) => conc += 1,
                _ => disc += 1,
            }
        }
    }
    let n0 = (pairs.len() * pairs.len().saturating_sub(1) / 2) as i64;
    let denom = (((n0 - tie_x) * (n0 - tie_y)) as f64).sqrt();
    if denom == 0.0 {
        return Err(Error::InsufficientData(
            "Kendall tau is undefined when either ranking is fully tied".into(),
        ));
    }
    Ok((conc - disc) as f64 / denom)
}
