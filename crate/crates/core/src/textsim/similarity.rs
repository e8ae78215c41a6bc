use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bow::bow_cosine;
use super::provider::{read_captions, write_captions, ModelProvider};
use crate::error::{Error, Result};
use crate::media::FrameSequence;

/// Weights for blending surface and embedding similarity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityWeights {
    pub cosine: f64,
    pub embedding: f64,
    /// Embedding weight used when the surface cosine is exactly zero.
    pub fallback: f64,
}

impl Default for SimilarityWeights {
    fn default() -> Self {
        Self {
            cosine: 0.25,
            embedding: 0.75,
            fallback: 0.5,
        }
    }
}

pub fn combined_similarity(cos_sim: f64, emb_sim: f64) -> f64 {
    combined_similarity_with(cos_sim, emb_sim, &SimilarityWeights::default())
}

pub fn combined_similarity_with(cos_sim: f64, emb_sim: f64, w: &SimilarityWeights) -> f64 {
    if cos_sim != 0.0 {
        w.cosine * cos_sim + w.embedding * emb_sim
    } else {
        w.fallback * emb_sim
    }
}

/// Cosine of two vectors clamped to [0, 1]; zero vectors give 0.
pub fn cosine_clamped(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (na * nb)).clamp(0.0, 1.0))
}

pub fn embedding_cosine(a: &str, b: &str, provider: &dyn ModelProvider) -> Result<f64> {
    let v = provider.embed(&[a, b])?;
    expect_len(&v, 2)?;
    cosine_clamped(&v[0], &v[1])
}

fn expect_len<T>(v: &[T], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Provider(format!(
            "expected {n} embeddings, got {}",
            v.len()
        )));
    }
    Ok(())
}

/// One caption per frame, in frame order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptionSet {
    captions: Vec<String>,
}

impl CaptionSet {
    pub fn new(captions: Vec<String>) -> Result<Self> {
        if captions.is_empty() {
            return Err(Error::InsufficientData("caption set is empty".into()));
        }
        Ok(Self { captions })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::new(read_captions(path.as_ref())?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_captions(path.as_ref(), &self.captions)
    }

    pub fn len(&self) -> usize {
        self.captions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn captions(&self) -> &[String] {
        &self.captions
    }

    /// Occurrence counts keyed by trimmed caption text.
    pub fn counts(&self) -> BTreeMap<&str, usize> {
        let mut m = BTreeMap::new();
        for c in &self.captions {
            *m.entry(c.trim()).or_insert(0) += 1;
        }
        m
    }
}

/// Captions a video, reusing `cache` when it exists and writing it otherwise.
pub fn caption_video(
    video: &FrameSequence,
    provider: &dyn ModelProvider,
    cache: Option<&Path>,
) -> Result<CaptionSet> {
    if let Some(path) = cache {
        if path.exists() {
            let set = CaptionSet::load(path)?;
            if set.len() == video.len() {
                return Ok(set);
            }
        }
    }
    let caps = provider.caption(video)?;
    if caps.len() != video.len() {
        return Err(Error::Provider(format!(
            "provider returned {} captions for {} frames",
            caps.len(),
            video.len()
        )));
    }
    let set = CaptionSet::new(caps)?;
    if let Some(path) = cache {
        set.save(path)?;
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptionScore {
    pub caption: String,
    pub cos_sim: f64,
    pub emb_sim: f64,
    pub combined_sim: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub per_caption: Vec<CaptionScore>,
    pub video_score: f64,
}

/// Frequency-weighted mean: `(1/n) Σ w_i sim_i` with `w_i = count(caption_i)/n`.
pub fn weighted_video_score(sims: &[f64], weights: &[f64]) -> f64 {
    let n = sims.len() as f64;
    sims.iter().zip(weights).map(|(s, w)| w * s).sum::<f64>() / n
}

/// The same score from `(count, sim)` per distinct caption: `Σ (count/n)² sim`.
///
/// Summing over distinct captions keeps the single-caption case exact.
pub fn grouped_video_score(groups: &[(usize, f64)]) -> f64 {
    let n: usize = groups.iter().map(|g| g.0).sum();
    groups
        .iter()
        .map(|&(c, s)| {
            let w = c as f64 / n as f64;
            w * w * s
        })
        .sum()
}

pub fn video_text_similarity(
    prompt: &str,
    captions: &CaptionSet,
    provider: &dyn ModelProvider,
    weights: &SimilarityWeights,
) -> Result<SimilarityReport> {
    let counts = captions.counts();
    let unique: Vec<&str> = counts.keys().copied().collect();
    let mut texts = Vec::with_capacity(unique.len() + 1);
    texts.push(prompt);
    texts.extend(unique.iter().copied());
    let vectors = provider.embed(&texts)?;
    expect_len(&vectors, texts.len())?;

    let mut by_caption = BTreeMap::new();
    for (u, v) in unique.iter().zip(&vectors[1..]) {
        let cos = bow_cosine(prompt, u);
        let emb = cosine_clamped(&vectors[0], v)?;
        by_caption.insert(*u, (cos, emb, combined_similarity_with(cos, emb, weights)));
    }

    let n = captions.len() as f64;
    let per_caption: Vec<CaptionScore> = captions
        .captions()
        .iter()
        .map(|c| {
            let key = c.trim();
            let (cos_sim, emb_sim, combined_sim) = by_caption[key];
            CaptionScore {
                caption: c.clone(),
                cos_sim,
                emb_sim,
                combined_sim,
                weight: counts[key] as f64 / n,
            }
        })
        .collect();
    let groups: Vec<(usize, f64)> = by_caption.iter().map(|(c, v)| (counts[c], v.2)).collect();
    let video_score = grouped_video_score(&groups).clamp(0.0, 1.0);
    Ok(SimilarityReport {
        per_caption,
        video_score,
    })
}
