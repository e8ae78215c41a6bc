//! Gradient-boosted decision trees for the binary naturalness classifier.

pub mod data;
pub mod grid;
pub mod metrics;
pub mod model;
pub mod train;
pub mod tree;

pub use data::{LabelledRow, LabelledSet, Split};
pub use grid::{evaluate_f1, grid_search, GridReport, GridSpec};
pub use metrics::{classify_threshold, f1_score};
pub use model::{predict_naturalness, train_gbt, GbtModel};
pub use train::{best_split, boost, fit_tree, logistic_loss, TrainConfig, TreeParams};
pub use tree::{Node, Tree};
