// SPDX-License-Identifier: MIT OR Apache-2.0

//! Mean and variance change points in panels of time series.
//!
//! Per-series CUSUM statistics are combined across the panel by the Double
//! CUSUM (ordered absolute CUSUMs, top group against the rest) and segmented
//! by binary segmentation. Variance changes are found by running the same
//! machinery on Haar wavelet periodograms. Thresholds come from a factor-model
//! block bootstrap or a deterministic rate.

#![forbid(unsafe_code)]

pub mod baseball;
pub mod cusum;
pub mod double_cusum;
pub mod error;
pub mod panel;
pub mod pipeline;
pub mod preprocess;
pub mod segmentation;
pub mod synth;
pub mod threshold;
pub mod variance;

pub use double_cusum::{dc_statistic, DcConfig, DcResult};
pub use error::{Error, Result};
pub use panel::Panel;
pub use pipeline::{analyze, Analysis, AnalysisConfig, ThresholdMethod, Thresholds};
pub use segmentation::{detect_mean_changes, ChangeKind, ChangePoint, DetectionResult};
pub use threshold::{calibrate_threshold, BootstrapOptions, ThresholdSpec};
pub use variance::{detect_variance_changes, WaveletScaleSet};
