//! BRISQUE-style blind quality regression: per-block NSS features, PCA
//! projection, RBF support-vector regression, averaged over blocks.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::nss::{patch_grid, NSS_FEATURE_DIM};
use super::plane::Plane;
use crate::error::{Error, Result};
use crate::matrix_io;

pub const BRISQUE_MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub gamma: f64,
    pub intercept: f64,
    #[serde(with = "matrix_io::vector")]
    pub dual_coef: DVector<f64>,
    /// One support vector per row, in PCA space.
    #[serde(with = "matrix_io::matrix")]
    pub support_vectors: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrisqueModel {
    pub version: u32,
    pub feature_dim: usize,
    pub block_size: usize,
    #[serde(with = "matrix_io::vector")]
    pub pca_mean: DVector<f64>,
    /// Rows are principal axes: `k x feature_dim`.
    #[serde(with = "matrix_io::matrix")]
    pub pca_basis: DMatrix<f64>,
    pub svr: SvrParams,
}

impl BrisqueModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ModelFormat(m));
        if self.feature_dim != NSS_FEATURE_DIM {
            return bad(format!(
                "brisque feature_dim {} (expected 36)",
                self.feature_dim
            ));
        }
        if self.pca_mean.len() != self.feature_dim || self.pca_basis.ncols() != self.feature_dim {
            return bad(format!(
                "pca mean {} / basis {}x{} disagree with feature_dim {}",
                self.pca_mean.len(),
                self.pca_basis.nrows(),
                self.pca_basis.ncols(),
                self.feature_dim
            ));
        }
        let k = self.pca_basis.nrows();
        let sv = &self.svr.support_vectors;
        if sv.ncols() != k || sv.nrows() != self.svr.dual_coef.len() {
            return bad(format!(
                "svr has {}x{} support vectors and {} coefficients for {k} components",
                sv.nrows(),
                sv.ncols(),
                self.svr.dual_coef.len()
            ));
        }
        if self.svr.gamma.is_nan() || self.svr.gamma <= 0.0 || !self.svr.intercept.is_finite() {
            return bad("svr gamma must be positive and intercept finite".into());
        }
        if self.block_size < 2 {
            return bad(format!("block_size {}", self.block_size));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        if model.version != BRISQUE_MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported brisque model version {}",
                model.version
            )));
        }
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    fn regress(&self, features: &[f64; NSS_FEATURE_DIM]) -> f64 {
        let x = DVector::from_row_slice(features) - &self.pca_mean;
        let z = &self.pca_basis * x;
        let svr = &self.svr;
        let mut acc = svr.intercept;
        for (i, coef) in svr.dual_coef.iter().enumerate() {
            let d2 = (svr.support_vectors.row(i).transpose() - &z).norm_squared();
            acc += coef * (-svr.gamma * d2).exp();
        }
        acc
    }
}

/// Mean SVR prediction over non-overlapping blocks. Flat blocks enter as the zero vector.
pub fn brisque_score(plane: &Plane, model: &BrisqueModel) -> Result<f64> {
    if plane.width < model.block_size || plane.height < model.block_size {
        return Err(Error::FrameTooSmall(format!(
            "brisque needs one {}px block, frame is {}x{}",
            model.block_size, plane.width, plane.height
        )));
    }
    let grid = patch_grid(plane, model.block_size);
    let zero = [0.0; NSS_FEATURE_DIM];
    let scores: Vec<f64> = grid
        .features
        .iter()
        .map(|f| model.regress(f.as_ref().unwrap_or(&zero)))
        .collect();
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Block features of a frame; exposed for building models.
pub fn block_features(plane: &Plane, block_size: usize) -> Vec<[f64; NSS_FEATURE_DIM]> {
    patch_grid(plane, block_size)
        .features
        .into_iter()
        .map(|f| f.unwrap_or([0.0; NSS_FEATURE_DIM]))
        .collect()
}
