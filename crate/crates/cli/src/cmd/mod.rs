pub mod analyze;
pub mod ensemble;
pub mod features;
pub mod textsim;
pub mod train;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// File of `key = value` lines supplying defaults for the other flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads across videos (default: logical cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl Common {
    pub fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = self.jobs {
            anyhow::ensure!(j > 0, "--jobs must be at least 1");
            b = b.num_threads(j);
        }
        b.build().context("starting worker pool")
    }
}
