// SPDX-License-Identifier: MIT OR Apache-2.0

//! Binary segmentation driven by the Double CUSUM statistic.
//!
//! Starting from the whole panel, the segment's Double CUSUM maximizer `b*` is
//! accepted as a change point when its value exceeds the threshold and both
//! children `[s, b*]` and `[b*+1, e]` keep at least `min_seg` observations.
//! Accepted children are searched recursively; rejected segments are final.

use serde::{Deserialize, Serialize};

use crate::cusum::estimate_scales;
use crate::double_cusum::{dc_statistic, DcConfig};
use crate::error::{Error, Result};
use crate::panel::Panel;

pub const DEFAULT_MIN_SEG: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeKind {
    Mean,
    Variance,
}

impl std::fmt::Display for ChangeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChangeKind::Mean => "mean",
            ChangeKind::Variance => "variance",
        })
    }
}

/// A detected break. `index` is the last position of the left segment and
/// `time_label` its label, so a break reported as 1954 means the new regime
/// starts in 1955.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePoint {
    pub time_label: i32,
    pub index: usize,
    pub kind: ChangeKind,
    pub dc_value: f64,
    pub threshold: f64,
    /// Number of series in the maximizing top group.
    pub m_star: usize,
    pub segment: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub kind: ChangeKind,
    /// Sorted by `index`.
    pub change_points: Vec<ChangePoint>,
    /// Final partition of `1..=T`, in order.
    pub segments: Vec<(usize, usize)>,
    pub phi: f64,
    pub min_seg: usize,
    pub threshold: f64,
    pub seed: Option<u64>,
    pub panel_fingerprint: String,
}

impl DetectionResult {
    pub fn indices(&self) -> Vec<usize> {
        self.change_points.iter().map(|c| c.index).collect()
    }

    pub fn labels(&self) -> Vec<i32> {
        self.change_points.iter().map(|c| c.time_label).collect()
    }

    /// Same result with every change point re-tagged as `kind`.
    pub fn relabel(mut self, kind: ChangeKind) -> Self {
        self.kind = kind;
        for cp in &mut self.change_points {
            cp.kind = kind;
        }
        self
    }
}

/// Scales are estimated once per series on the full panel with `config.scale`.
pub fn detect_mean_changes(
    panel: &Panel,
    threshold: f64,
    config: &DcConfig,
    min_seg: usize,
) -> Result<DetectionResult> {
    let scales = estimate_scales(panel, config.scale);
    detect_with_scales(panel, &scales, threshold, config, min_seg)
}

/// Binary segmentation with caller-provided per-series scales.
pub fn detect_with_scales(
    panel: &Panel,
    scales: &[f64],
    threshold: f64,
    config: &DcConfig,
    min_seg: usize,
) -> Result<DetectionResult> {
    if min_seg < 2 {
        return Err(Error::Config(format!("min_seg = {min_seg}, must be at least 2")));
    }
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::Config(format!("threshold = {threshold}, must be >= 0")));
    }
    config.validate()?;

    let mut change_points = Vec::new();
    let mut segments = Vec::new();
    let mut stack = vec![(1, panel.len())];
    while let Some((s, e)) = stack.pop() {
        if e - s + 1 < 2 * min_seg {
            segments.push((s, e));
            continue;
        }
        let dc = dc_statistic(panel, s, e, scales, config)?;
        let left = dc.b_star - s + 1;
        let right = e - dc.b_star;
        if dc.value > threshold && left >= min_seg && right >= min_seg {
            change_points.push(ChangePoint {
                time_label: panel.label(dc.b_star),
                index: dc.b_star,
                kind: ChangeKind::Mean,
                dc_value: dc.value,
                threshold,
                m_star: dc.m_star,
                segment: (s, e),
            });
            stack.push((dc.b_star + 1, e));
            stack.push((s, dc.b_star));
        } else {
            segments.push((s, e));
        }
    }
    change_points.sort_by_key(|c| c.index);
    segments.sort_unstable();

    Ok(DetectionResult {
        kind: ChangeKind::Mean,
        change_points,
        segments,
        phi: config.phi,
        min_seg,
        threshold,
        seed: None,
        panel_fingerprint: panel.fingerprint(),
    })
}

/// Per-series arithmetic means inside each detected segment, indexed
/// `[series][segment]`.
pub fn segment_means(panel: &Panel, result: &DetectionResult) -> Result<Vec<Vec<f64>>> {
    let fp = panel.fingerprint();
    if fp != result.panel_fingerprint {
        return Err(Error::FingerprintMismatch {
            expected: fp,
            found: result.panel_fingerprint.clone(),
        });
    }
    Ok(panel
        .rows()
        .map(|row| {
            result
                .segments
                .iter()
                .map(|&(s, e)| row[s - 1..e].iter().sum::<f64>() / (e - s + 1) as f64)
                .collect()
        })
        .collect())
}
