//! Per-frame naturalness statistics and their per-video aggregation.

pub mod basic;
pub mod blob;
pub mod brisque;
pub mod color_dist;
pub mod inception;
pub mod niqe;
pub mod nss;
pub mod orb;
pub mod plane;
pub mod spectral;
pub mod video;

pub use basic::{contrast_score, entropy_score, sharpness_score, texture_score};
pub use blob::{blob_stats, detect_blobs, BlobConfig, BlobStats};
pub use brisque::{block_features, brisque_score, BrisqueModel, SvrParams, BRISQUE_MODEL_VERSION};
pub use color_dist::{color_distribution_score, DEFAULT_KMEANS_SEED};
pub use inception::{inception_score, modified_inception_score, ClassProbs};
pub use niqe::{fit_niqe_model, niqe_score, NiqeFitOptions, NiqeModel, NiqeScore};
pub use orb::{orb_stats, OrbConfig, OrbStats};
pub use plane::Plane;
pub use spectral::{spectral_score, SpectralMode};
pub use video::{
    extract_video_features, feature_names, ExtractConfig, FeatureInputs, FeatureMeta, FeatureVector,
};
