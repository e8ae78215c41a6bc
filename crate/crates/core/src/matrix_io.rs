//! Base64-encoded little-endian `f64` matrices for JSON model files.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Row-major matrix as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: String,
}

impl EncodedMatrix {
    pub fn encode(m: &DMatrix<f64>) -> Self {
        let mut bytes = Vec::with_capacity(m.len() * 8);
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                bytes.extend_from_slice(&m[(r, c)].to_le_bytes());
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: STANDARD.encode(bytes),
        }
    }

    pub fn decode(&self) -> Result<DMatrix<f64>, String> {
        let bytes = STANDARD.decode(&self.data).map_err(|e| e.to_string())?;
        if bytes.len() != self.rows * self.cols * 8 {
            return Err(format!(
                "{} bytes for a {}x{} matrix",
                bytes.len(),
                self.rows,
                self.cols
            ));
        }
        let values: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err("non-finite matrix entry".into());
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &values))
    }
}

pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        EncodedMatrix::encode(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        EncodedMatrix::deserialize(d)?
            .decode()
            .map_err(serde::de::Error::custom)
    }
}

/// Vectors are stored as 1 x n matrices.
pub mod vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        EncodedMatrix::encode(&DMatrix::from_row_slice(1, v.len(), v.as_slice())).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
        let m = EncodedMatrix::deserialize(d)?
            .decode()
            .map_err(serde::de::Error::custom)?;
        if m.nrows() != 1 && m.ncols() != 1 {
            return Err(serde::de::Error::custom(format!(
                "expected a vector, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(DVector::from_iterator(
            m.len(),
            m.transpose().iter().copied(),
        ))
    }
}
