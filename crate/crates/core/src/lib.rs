pub mod ensemble;
pub mod error;
pub mod features;
pub mod gbt;
pub mod matrix_io;
pub mod media;
pub mod ratings;
pub mod textsim;

pub use error::{Error, Result};
