use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use t2vqa_core::media::{load_frames, DatasetManifest, ManifestEntry};
use t2vqa_core::textsim::{
    caption_video, video_text_similarity, CaptionSet, ModelProvider, ProviderSpec,
    SimilarityReport, SimilarityWeights, DEFAULT_MAX_IN_FLIGHT,
};

use super::Common;
use crate::config::RunMeta;
use crate::io::{csv_with_meta, write_atomic};

pub const PROVIDER_ENV: &str = "T2VQA_PROVIDER";

#[derive(Debug, Args, Serialize)]
pub struct TextsimArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub manifest: PathBuf,
    /// `stub`, `file:<dir>` or `http:<url>`; falls back to $T2VQA_PROVIDER.
    #[arg(long)]
    pub provider: Option<String>,
    /// Caption cache for videos whose manifest row has no captions_path.
    #[arg(long)]
    pub captions_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 0.25)]
    pub cos_weight: f64,
    #[arg(long, default_value_t = 0.75)]
    pub emb_weight: f64,
    #[arg(long, default_value_t = 0.5)]
    pub fallback_weight: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_IN_FLIGHT)]
    pub max_in_flight: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Optional JSON Lines file with the per-caption breakdown of every video.
    #[arg(long)]
    pub details: Option<PathBuf>,
}

pub fn resolve_provider(flag: Option<&str>) -> Result<ProviderSpec> {
    let spec = match flag {
        Some(s) => s.to_string(),
        None => std::env::var(PROVIDER_ENV)
            .map_err(|_| anyhow!("no provider given; pass --provider or set {PROVIDER_ENV}"))?,
    };
    Ok(spec.parse()?)
}

fn captions_for(
    e: &ManifestEntry,
    a: &TextsimArgs,
    provider: &dyn ModelProvider,
) -> Result<CaptionSet> {
    let cache = e.captions_path.clone().or_else(|| {
        a.captions_dir
            .as_ref()
            .map(|d| d.join(format!("{}.jsonl", e.video_id)))
    });
    if let Some(path) = cache.as_ref().filter(|p| p.exists()) {
        return Ok(CaptionSet::load(path)?);
    }
    let video = load_frames(&e.frames_path)?;
    Ok(caption_video(&video, provider, cache.as_deref())?)
}

#[derive(Serialize)]
struct Detail<'a> {
    video_id: &'a str,
    prompt: &'a str,
    #[serde(flatten)]
    report: &'a SimilarityReport,
}

pub fn run(a: &TextsimArgs) -> Result<()> {
    let meta = RunMeta::new(a.common.seed, a);
    let spec = resolve_provider(a.provider.as_deref())?;
    let manifest = DatasetManifest::load(&a.manifest)?;
    anyhow::ensure!(
        !manifest.is_empty(),
        "manifest {} lists no videos",
        a.manifest.display()
    );
    let provider = spec.build(a.common.seed, a.max_in_flight);
    let weights = SimilarityWeights {
        cosine: a.cos_weight,
        embedding: a.emb_weight,
        fallback: a.fallback_weight,
    };

    let pool = a.common.pool()?;
    let reports: Vec<SimilarityReport> = pool.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|e| {
                let caps = captions_for(e, a, provider.as_ref())?;
                Ok(video_text_similarity(
                    &e.prompt,
                    &caps,
                    provider.as_ref(),
                    &weights,
                )?)
            })
            .enumerate()
            .map(|(i, r): (usize, Result<SimilarityReport>)| {
                r.with_context(|| format!("video {}", manifest.entries[i].video_id))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let header: Vec<String> = [
        "video_id",
        "model_name",
        "n_frames",
        "unique_captions",
        "video_score",
    ]
    .map(String::from)
    .to_vec();
    let rows: Vec<Vec<String>> = manifest
        .entries
        .iter()
        .zip(&reports)
        .map(|(e, r)| {
            let mut uniq: Vec<&str> = r.per_caption.iter().map(|c| c.caption.trim()).collect();
            uniq.sort_unstable();
            uniq.dedup();
            vec![
                e.video_id.clone(),
                e.model_name.clone(),
                r.per_caption.len().to_string(),
                uniq.len().to_string(),
                r.video_score.to_string(),
            ]
        })
        .collect();
    write_atomic(&a.out, &csv_with_meta(&meta.json(), &header, &rows)?)?;

    if let Some(path) = &a.details {
        let mut text = format!("{}\n", serde_json::json!({ "meta": meta }));
        for (e, r) in manifest.entries.iter().zip(&reports) {
            text.push_str(&serde_json::to_string(&Detail {
                video_id: &e.video_id,
                prompt: &e.prompt,
                report: r,
            })?);
            text.push('\n');
        }
        write_atomic(path, text.as_bytes())?;
    }
    println!(
        "wrote {} similarity rows to {}",
        rows.len(),
        a.out.display()
    );
    Ok(())
}
