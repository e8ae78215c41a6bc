//! Per-video aggregation of every per-frame naturalness feature.

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use super::basic::{contrast_score, entropy_score, sharpness_score, texture_score};
use super::blob::{blob_stats, BlobConfig};
use super::brisque::{brisque_score, BrisqueModel};
use super::color_dist::{color_distribution_score, DEFAULT_KMEANS_SEED};
use super::inception::{modified_inception_score, ClassProbs};
use super::niqe::{niqe_score, NiqeModel};
use super::orb::{orb_stats, OrbConfig};
use super::plane::{mean, std_pop, Plane};
use super::spectral::{spectral_score, SpectralMode};
use crate::error::{Error, Result};
use crate::media::{
    planar_to_interleaved, rgb_to_yuv444, to_grayscale, FrameSequence, RgbFrame, YuvLayout,
};

/// Per-frame features, in schema order.
pub const FRAME_FEATURES: [&str; 19] = [
    "texture",
    "sharpness",
    "color_dist",
    "spectral",
    "entropy",
    "contrast",
    "orb_kp_count",
    "orb_dist_mean",
    "orb_dist_std",
    "orb_desc_mean",
    "orb_desc_std",
    "blob_count",
    "blob_size_mean",
    "blob_size_std",
    "niqe_gray",
    "niqe_y",
    "niqe_u",
    "niqe_v",
    "brisque",
];

const BRISQUE_INDEX: usize = 18;
const NIQE_INDICES: [usize; 4] = [14, 15, 16, 17];

/// Column names of a [`FeatureVector`]: `<feature>_mean`, `<feature>_std` for each
/// per-frame feature, then `mis`.
pub fn feature_names() -> Vec<String> {
    FRAME_FEATURES
        .iter()
        .flat_map(|f| [format!("{f}_mean"), format!("{f}_std")])
        .chain(std::iter::once("mis".to_string()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractConfig {
    pub seed: u64,
    pub spectral_mode: SpectralMode,
    pub orb: OrbConfig,
    pub blob: BlobConfig,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_KMEANS_SEED,
            spectral_mode: SpectralMode::default(),
            orb: OrbConfig::default(),
            blob: BlobConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureMeta {
    pub seed: u64,
    pub absent_features: Vec<String>,
    /// NIQE channels that were constant in at least one frame.
    pub degenerate_features: Vec<String>,
}

/// Aggregated features of one video. Absent features are `None`, never zero-filled.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub video_id: String,
    names: Vec<String>,
    values: Vec<Option<f64>>,
    pub meta: FeatureMeta,
}

impl FeatureVector {
    pub fn from_values(
        video_id: impl Into<String>,
        values: Vec<Option<f64>>,
        meta: FeatureMeta,
    ) -> Result<Self> {
        let names = feature_names();
        if values.len() != names.len() {
            return Err(Error::SchemaMismatch(format!(
                "{} values for {} features",
                values.len(),
                names.len()
            )));
        }
        Ok(Self {
            video_id: video_id.into(),
            names,
            values,
            meta,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .and_then(|i| self.values[i])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("feature vector serializes")
    }
}

impl Serialize for FeatureVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.names.len() + 2))?;
        map.serialize_entry("video_id", &self.video_id)?;
        for (n, v) in self.names.iter().zip(&self.values) {
            map.serialize_entry(n, v)?;
        }
        map.serialize_entry("meta", &self.meta)?;
        map.end()
    }
}

/// Models and side inputs for [`extract_video_features`].
pub struct FeatureInputs<'a> {
    pub niqe: &'a NiqeModel,
    pub brisque: Option<&'a BrisqueModel>,
    pub probs: Option<&'a ClassProbs>,
}

struct FrameResult {
    values: [Option<f64>; 19],
    degenerate: [bool; 4],
}

fn frame_features(
    frame: &RgbFrame,
    inputs: &FeatureInputs<'_>,
    cfg: &ExtractConfig,
) -> Result<FrameResult> {
    let gray = to_grayscale(frame);
    let orb = orb_stats(&gray, &cfg.orb);
    let blobs = blob_stats(&gray, &cfg.blob);

    let yuv = planar_to_interleaved(&rgb_to_yuv444(frame, YuvLayout::Planar))?;
    let (w, h) = (frame.width(), frame.height());
    let channels = [
        Plane::from_gray(&gray),
        Plane::from_bytes(w, h, &yuv.plane(0)),
        Plane::from_bytes(w, h, &yuv.plane(1)),
        Plane::from_bytes(w, h, &yuv.plane(2)),
    ];
    let mut niqe = [0.0; 4];
    let mut degenerate = [false; 4];
    for (i, ch) in channels.iter().enumerate() {
        let s = niqe_score(ch, inputs.niqe)?;
        niqe[i] = s.score;
        degenerate[i] = s.degenerate;
    }
    let brisque = inputs
        .brisque
        .map(|m| brisque_score(&channels[0], m))
        .transpose()?;

    let values = [
        Some(texture_score(&gray)?),
        Some(sharpness_score(&gray)),
        Some(color_distribution_score(frame, cfg.seed)),
        Some(spectral_score(frame, cfg.spectral_mode)),
        Some(entropy_score(&gray)),
        Some(contrast_score(&gray)),
        Some(orb.kp_count),
        Some(orb.dist_mean),
        Some(orb.dist_std),
        Some(orb.desc_mean),
        Some(orb.desc_std),
        Some(blobs.count),
        Some(blobs.size_mean),
        Some(blobs.size_std),
        Some(niqe[0]),
        Some(niqe[1]),
        Some(niqe[2]),
        Some(niqe[3]),
        brisque,
    ];
    Ok(FrameResult { values, degenerate })
}

/// Computes every per-frame feature and aggregates to (mean, std) across frames.
pub fn extract_video_features(
    video: &FrameSequence,
    inputs: &FeatureInputs<'_>,
    cfg: &ExtractConfig,
) -> Result<FeatureVector> {
    let per_frame = video
        .frames()
        .iter()
        .map(|f| frame_features(f, inputs, cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut values = Vec::with_capacity(2 * FRAME_FEATURES.len() + 1);
    for (k, name) in FRAME_FEATURES.iter().enumerate() {
        let column: Option<Vec<f64>> = per_frame.iter().map(|r| r.values[k]).collect();
        match column {
            Some(col) => {
                if let Some(bad) = col.iter().find(|v| !v.is_finite()) {
                    return Err(Error::InvalidFrame(format!("{name} evaluated to {bad}")));
                }
                values.push(Some(mean(&col)));
                values.push(Some(std_pop(&col)));
            }
            None => {
                values.push(None);
                values.push(None);
            }
        }
    }
    let mis = inputs.probs.map(modified_inception_score).transpose()?;
    values.push(mis);

    let names = feature_names();
    let absent_features = names
        .iter()
        .zip(&values)
        .filter(|(_, v)| v.is_none())
        .map(|(n, _)| n.clone())
        .collect();
    let degenerate_features = NIQE_INDICES
        .iter()
        .enumerate()
        .filter(|(c, _)| per_frame.iter().any(|r| r.degenerate[*c]))
        .map(|(_, &k)| FRAME_FEATURES[k].to_string())
        .collect();
    debug_assert_eq!(FRAME_FEATURES[BRISQUE_INDEX], "brisque");
    FeatureVector::from_values(
        video.source_id(),
        values,
        FeatureMeta {
            seed: cfg.seed,
            absent_features,
            degenerate_features,
        },
    )
}
