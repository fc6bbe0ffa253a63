//! Micro-expression spotting benchmark toolkit.
//!
//! - [`model`]: domain types, manifest/detection/frame file formats, face alignment
//! - [`metrics`]: interval matching, precision/recall/F1, frame-based accuracy, DET points
//! - [`spotters`]: unsupervised baselines (LBP chi-square contrast, MDMD, landmark ratios), NMS
//! - [`stfeatures`]: LBP-TOP / HOG-TOP / HIGO-TOP features and the sliding-window linear spotter
//! - [`harness`]: leave-one-subject-out runs and report rendering
//! - [`synth`]: seeded synthetic fixtures
//! - [`cli`]: the `mespot` command line

pub mod cli;
pub mod config;
pub mod error;
mod fsutil;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod spotters;
pub mod stfeatures;
pub mod synth;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
