// SPDX-License-Identifier: MIT OR Apache-2.0

//! End-to-end analysis of one panel: mean changes first, then variance
//! changes on the mean-stabilized panel.
//!
//! Calibration and detection are split so that thresholds can be saved and
//! reused. Calibrating the variance threshold needs the mean segmentation,
//! so [`calibrate`] runs the mean pass internally.

use serde::{Deserialize, Serialize};

use crate::cusum::ScaleMethod;
use crate::double_cusum::DcConfig;
use crate::error::{Error, Result};
use crate::panel::Panel;
use crate::segmentation::{detect_mean_changes, DetectionResult, DEFAULT_MIN_SEG};
use crate::threshold::{
    calibrate_threshold, deterministic_threshold, BootstrapOptions, ThresholdSpec,
};
use crate::variance::{detect_variance_changes, periodogram_panel, stabilize_means, WaveletScaleSet};

/// Added to the seed for the variance-threshold bootstrap so the two passes
/// draw different streams.
pub const VARIANCE_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ThresholdMethod {
    Bootstrap(BootstrapOptions),
    Fixed { constant: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub dc: DcConfig,
    pub min_seg: usize,
    pub threshold: ThresholdMethod,
    pub scales: WaveletScaleSet,
    /// Per-series scale estimator for the periodogram panel. Squared details
    /// are skewed, so the difference MAD understates their spread.
    pub variance_scale: ScaleMethod,
    /// Skip the variance pass when false.
    pub variance: bool,
}

impl AnalysisConfig {
    pub fn bootstrap(seed: u64) -> Self {
        Self {
            dc: DcConfig::default(),
            min_seg: DEFAULT_MIN_SEG,
            threshold: ThresholdMethod::Bootstrap(BootstrapOptions::new(seed)),
            scales: WaveletScaleSet::default(),
            variance_scale: ScaleMethod::SdDiff,
            variance: true,
        }
    }

    pub fn fixed(constant: f64) -> Self {
        Self {
            threshold: ThresholdMethod::Fixed { constant },
            ..Self::bootstrap(0)
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self.threshold {
            ThresholdMethod::Bootstrap(o) => Some(o.seed),
            ThresholdMethod::Fixed { .. } => None,
        }
    }

    /// Double CUSUM settings for the periodogram panel.
    pub fn variance_dc(&self) -> DcConfig {
        DcConfig {
            scale: self.variance_scale,
            ..self.dc
        }
    }

    pub fn validate(&self, panel: &Panel) -> Result<()> {
        self.dc.validate()?;
        if self.min_seg < 2 {
            return Err(Error::Config(format!("min_seg = {}, must be at least 2", self.min_seg)));
        }
        match self.threshold {
            ThresholdMethod::Bootstrap(o) => o.validate()?,
            ThresholdMethod::Fixed { constant } => {
                deterministic_threshold(panel.n_series(), panel.len(), constant)?;
            }
        }
        if self.variance {
            self.scales.validate(panel.len())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub mean: ThresholdSpec,
    pub variance: Option<ThresholdSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub mean: DetectionResult,
    pub variance: Option<DetectionResult>,
    pub thresholds: Thresholds,
}

fn mean_threshold(panel: &Panel, config: &AnalysisConfig) -> Result<ThresholdSpec> {
    match config.threshold {
        ThresholdMethod::Bootstrap(o) => calibrate_threshold(panel, &config.dc, &o),
        ThresholdMethod::Fixed { constant } => {
            deterministic_threshold(panel.n_series(), panel.len(), constant)
        }
    }
}

/// The bootstrap null for the variance pass is the periodogram panel of the
/// stabilized input, the same panel the detector sees.
fn variance_threshold(stable: &Panel, config: &AnalysisConfig) -> Result<ThresholdSpec> {
    let expanded = periodogram_panel(stable, &config.scales)?;
    match config.threshold {
        ThresholdMethod::Bootstrap(mut o) => {
            o.seed = o.seed.wrapping_add(VARIANCE_SEED_OFFSET);
            calibrate_threshold(&expanded, &config.variance_dc(), &o)
        }
        ThresholdMethod::Fixed { constant } => {
            deterministic_threshold(expanded.n_series(), expanded.len(), constant)
        }
    }
}

/// Thresholds for both passes.
pub fn calibrate(panel: &Panel, config: &AnalysisConfig) -> Result<Thresholds> {
    config.validate(panel)?;
    let mean = mean_threshold(panel, config)?;
    let variance = if config.variance {
        let mean_result = detect_mean_changes(panel, mean.threshold(), &config.dc, config.min_seg)?;
        let stable = stabilize_means(panel, &mean_result)?;
        Some(variance_threshold(&stable, config)?)
    } else {
        None
    };
    Ok(Thresholds { mean, variance })
}

/// Detection with thresholds computed earlier.
pub fn analyze_with_thresholds(
    panel: &Panel,
    config: &AnalysisConfig,
    thresholds: &Thresholds,
) -> Result<Analysis> {
    config.validate(panel)?;
    let seed = config.seed();
    let mut mean = detect_mean_changes(panel, thresholds.mean.threshold(), &config.dc, config.min_seg)?;
    mean.seed = seed;
    let variance = match (config.variance, &thresholds.variance) {
        (false, _) => None,
        (true, None) => {
            return Err(Error::Config("variance pass requested without a variance threshold".into()))
        }
        (true, Some(spec)) => {
            let stable = stabilize_means(panel, &mean)?;
            let mut result = detect_variance_changes(
                &stable,
                &config.scales,
                spec.threshold(),
                &config.variance_dc(),
                config.min_seg,
            )?;
            result.seed = seed;
            // report against the input panel rather than the stabilized copy
            result.panel_fingerprint = mean.panel_fingerprint.clone();
            Some(result)
        }
    };
    Ok(Analysis {
        mean,
        variance,
        thresholds: *thresholds,
    })
}

pub fn analyze(panel: &Panel, config: &AnalysisConfig) -> Result<Analysis> {
    let thresholds = calibrate(panel, config)?;
    analyze_with_thresholds(panel, config, &thresholds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gen_piecewise_panel, PlantedPanelSpec};

    fn planted(seed: u64) -> Panel {
        let mut spec = PlantedPanelSpec::new(8, 120, seed);
        spec.mean_breaks = vec![(60, vec![4.0; 8])];
        gen_piecewise_panel(&spec).unwrap().panel
    }

    #[test]
    fn finds_planted_mean_break() {
        let p = planted(3);
        let mut config = AnalysisConfig::bootstrap(17);
        if let ThresholdMethod::Bootstrap(o) = &mut config.threshold {
            o.n_reps = 100;
        }
        let a = analyze(&p, &config).unwrap();
        assert_eq!(a.mean.indices(), vec![60]);
        assert_eq!(a.mean.seed, Some(17));
        assert!(a.variance.is_some());
    }

    #[test]
    fn saved_thresholds_reproduce() {
        let p = planted(4);
        let mut config = AnalysisConfig::bootstrap(5);
        if let ThresholdMethod::Bootstrap(o) = &mut config.threshold {
            o.n_reps = 100;
        }
        let inline = analyze(&p, &config).unwrap();
        let t = calibrate(&p, &config).unwrap();
        assert_eq!(analyze_with_thresholds(&p, &config, &t).unwrap(), inline);
    }

    #[test]
    fn fixed_rate_and_variance_toggle() {
        let p = planted(5);
        let mut config = AnalysisConfig::fixed(1.0);
        config.variance = false;
        let a = analyze(&p, &config).unwrap();
        assert!(a.variance.is_none());
        assert!(a.thresholds.variance.is_none());
        assert_eq!(a.thresholds.mean.seed(), None);
        assert!(matches!(
            analyze(&p, &AnalysisConfig::fixed(-1.0)),
            Err(Error::Config(_))
        ));
    }
}
