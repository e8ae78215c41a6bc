use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use t2vqa_core::features::{
    extract_video_features, feature_names, fit_niqe_model, BrisqueModel, ClassProbs, ExtractConfig,
    FeatureInputs, FeatureVector, NiqeFitOptions, NiqeModel, OrbConfig, Plane, SpectralMode,
};
use t2vqa_core::media::{load_frames, to_grayscale, DatasetManifest};

use super::Common;
use crate::config::RunMeta;
use crate::io::{csv_with_meta, fmt_opt, write_atomic};

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralArg {
    Fourier,
    Channel,
}

#[derive(Debug, Args, Serialize)]
pub struct FeaturesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub niqe_model: PathBuf,
    #[arg(long)]
    pub brisque_model: Option<PathBuf>,
    /// Directory of `<video_id>.json` class-probability files; enables the `mis` feature.
    #[arg(long)]
    pub probs_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "fourier")]
    pub spectral_mode: SpectralArg,
    #[arg(long, default_value_t = 1)]
    pub orb_levels: usize,
    /// Feature CSV, one row per video in manifest order.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional JSON Lines file with one feature object per video.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
}

pub fn run(a: &FeaturesArgs) -> Result<()> {
    let meta = RunMeta::new(a.common.seed, a);
    let manifest = DatasetManifest::load(&a.manifest)?;
    anyhow::ensure!(
        !manifest.is_empty(),
        "manifest {} lists no videos",
        a.manifest.display()
    );
    let niqe = NiqeModel::load(&a.niqe_model)?;
    let brisque = a
        .brisque_model
        .as_ref()
        .map(BrisqueModel::load)
        .transpose()?;
    let cfg = ExtractConfig {
        seed: a.common.seed,
        spectral_mode: match a.spectral_mode {
            SpectralArg::Fourier => SpectralMode::Fourier,
            SpectralArg::Channel => SpectralMode::Channel,
        },
        orb: OrbConfig {
            n_levels: a.orb_levels,
            ..OrbConfig::default()
        },
        ..ExtractConfig::default()
    };

    let pool = a.common.pool()?;
    let vectors: Vec<FeatureVector> = pool.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|e| -> Result<FeatureVector> {
                let video = load_frames(&e.frames_path)?;
                let probs = a
                    .probs_dir
                    .as_ref()
                    .map(|d| ClassProbs::load(d.join(format!("{}.json", e.video_id))))
                    .transpose()?;
                let inputs = FeatureInputs {
                    niqe: &niqe,
                    brisque: brisque.as_ref(),
                    probs: probs.as_ref(),
                };
                let mut fv = extract_video_features(&video, &inputs, &cfg)?;
                fv.video_id = e.video_id.clone();
                Ok(fv)
            })
            .zip(manifest.entries.par_iter())
            .map(|(r, e)| r.with_context(|| format!("video {}", e.video_id)))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut header = vec!["video_id".to_string()];
    header.extend(feature_names());
    let rows: Vec<Vec<String>> = vectors
        .iter()
        .map(|v| {
            std::iter::once(v.video_id.clone())
                .chain(v.values().iter().map(|x| fmt_opt(*x)))
                .collect()
        })
        .collect();
    write_atomic(&a.out, &csv_with_meta(&meta.json(), &header, &rows)?)?;

    if let Some(path) = &a.vectors {
        let mut text = String::new();
        for v in &vectors {
            let mut obj = serde_json::to_value(v)?;
            obj["meta"]["tool_version"] = meta.tool_version.into();
            obj["meta"]["config_hash"] = meta.config_hash.clone().into();
            text.push_str(&obj.to_string());
            text.push('\n');
        }
        write_atomic(path, text.as_bytes())?;
    }
    for v in &vectors {
        if !v.meta.degenerate_features.is_empty() {
            eprintln!(
                "warning: video {}: constant channel in {}",
                v.video_id,
                v.meta.degenerate_features.join(", ")
            );
        }
    }
    println!(
        "wrote {} feature rows to {}",
        vectors.len(),
        a.out.display()
    );
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct FitNiqeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Frame directory of pristine content; repeat for more directories.
    #[arg(long = "frames", required = true)]
    pub frames: Vec<PathBuf>,
    #[arg(long, default_value_t = 96)]
    pub patch_size: usize,
    #[arg(long, default_value_t = 0.0)]
    pub sharpness_fraction: f64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_fit_niqe(a: &FitNiqeArgs) -> Result<()> {
    let meta = RunMeta::new(a.common.seed, a);
    let mut planes = Vec::new();
    for dir in &a.frames {
        let seq = load_frames(dir)?;
        planes.extend(
            seq.frames()
                .iter()
                .map(|f| Plane::from_gray(&to_grayscale(f))),
        );
    }
    let model = fit_niqe_model(
        &planes,
        &NiqeFitOptions {
            patch_size: a.patch_size,
            sharpness_fraction: a.sharpness_fraction,
        },
    )?;
    let mut obj: serde_json::Value = serde_json::from_str(&model.to_json())?;
    obj["meta"] = serde_json::to_value(&meta)?;
    write_atomic(
        &a.out,
        (serde_json::to_string_pretty(&obj)? + "\n").as_bytes(),
    )?;
    println!(
        "fitted NIQE model on {} frames, wrote {}",
        planes.len(),
        a.out.display()
    );
    Ok(())
}
