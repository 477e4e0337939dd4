// SPDX-License-Identifier: MIT OR Apache-2.0

//! Variance change points via Haar wavelet periodograms.
//!
//! The squared Haar detail coefficient at dyadic scale `-k` has local mean
//! proportional to the local variance of a zero-mean series, so a variance
//! break in `x` becomes a mean break in its periodogram. Each series is
//! expanded into one periodogram per scale and the mean-change machinery is
//! run on the expanded panel.
//!
//! Only auto-periodograms are built; no cross-series products.

use serde::{Deserialize, Serialize};

use crate::double_cusum::DcConfig;
use crate::error::{Error, Result};
use crate::panel::Panel;
use crate::segmentation::{detect_mean_changes, ChangeKind, DetectionResult};

/// Dyadic scales `-1, -2, ..., -J`, stored as their magnitudes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveletScaleSet {
    levels: Vec<u32>,
}

impl Default for WaveletScaleSet {
    fn default() -> Self {
        Self { levels: vec![1, 2] }
    }
}

impl WaveletScaleSet {
    /// Scales `-1..=-j` for a series of length `t`.
    pub fn up_to(j: u32, t: usize) -> Result<Self> {
        let max = max_level(t);
        if j < 1 || j > max {
            return Err(Error::Config(format!(
                "J = {j} outside 1..={max} for T = {t}"
            )));
        }
        Ok(Self {
            levels: (1..=j).collect(),
        })
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    /// Scale labels as negative integers.
    pub fn scales(&self) -> Vec<i32> {
        self.levels.iter().map(|&k| -(k as i32)).collect()
    }

    pub fn validate(&self, t: usize) -> Result<()> {
        let j = self.levels.len() as u32;
        let max = max_level(t);
        if j < 1 || j > max || self.levels != (1..=j).collect::<Vec<_>>() {
            return Err(Error::Config(format!(
                "scale set {:?} invalid for T = {t} (need -1..=-J with J <= {max})",
                self.scales()
            )));
        }
        Ok(())
    }
}

impl std::str::FromStr for WaveletScaleSet {
    type Err = Error;

    /// Accepts `"2"` (meaning `-1,-2`) or an explicit list like `"-1,-2"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
        let bad = || Error::Config(format!("cannot parse wavelet scales {s:?}"));
        if parts.len() == 1 && !parts[0].starts_with('-') {
            let j: u32 = parts[0].parse().map_err(|_| bad())?;
            if j == 0 {
                return Err(bad());
            }
            return Ok(Self {
                levels: (1..=j).collect(),
            });
        }
        let mut levels = parts
            .iter()
            .map(|p| p.parse::<i32>().ok().filter(|v| *v < 0).map(|v| v.unsigned_abs()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(bad)?;
        levels.sort_unstable();
        levels.dedup();
        if levels.is_empty() || levels != (1..=levels.len() as u32).collect::<Vec<_>>() {
            return Err(bad());
        }
        Ok(Self { levels })
    }
}

fn max_level(t: usize) -> u32 {
    if t < 2 {
        return 0;
    }
    (usize::BITS - 1 - t.leading_zeros()).saturating_sub(1)
}

/// Squared Haar details at scale `scale` (negative), one per time point.
///
/// The coefficient at `t` uses the window `x[t..t + 2^k - 1]`; positions past
/// the end mirror about the last sample, `x[T + i] = x[T - i]`.
pub fn haar_periodogram(series: &[f64], scale: i32) -> Result<Vec<f64>> {
    let t_len = series.len();
    if scale >= 0 {
        return Err(Error::Config(format!("wavelet scale must be negative, got {scale}")));
    }
    let k = scale.unsigned_abs();
    let width = 1usize
        .checked_shl(k)
        .filter(|w| *w <= t_len)
        .ok_or(Error::ScaleTooCoarse { scale: k, len: t_len })?;
    let half = width / 2;
    let norm = (width as f64).sqrt().recip();
    let at = |p: usize| {
        // p is 0-based; reflect about the last sample
        if p < t_len {
            series[p]
        } else {
            series[2 * (t_len - 1) - p]
        }
    };
    Ok((0..t_len)
        .map(|t| {
            let first: f64 = (t..t + half).map(at).sum();
            let second: f64 = (t + half..t + width).map(at).sum();
            let d = norm * (first - second);
            d * d
        })
        .collect())
}

/// Expands each series into one periodogram per scale. Rows are ordered
/// series-major and named `<id>@<scale>`.
pub fn periodogram_panel(panel: &Panel, scales: &WaveletScaleSet) -> Result<Panel> {
    scales.validate(panel.len())?;
    let mut rows = Vec::with_capacity(panel.n_series() * scales.levels.len());
    let mut ids = Vec::with_capacity(rows.capacity());
    for (row, id) in panel.rows().zip(panel.series_ids()) {
        for scale in scales.scales() {
            rows.push(haar_periodogram(row, scale)?);
            ids.push(format!("{id}@{scale}"));
        }
    }
    Panel::new(rows, ids, panel.time_index().to_vec())
}

/// Subtracts the per-segment mean of each series using the segments of a
/// mean-change result for the same panel.
pub fn stabilize_means(panel: &Panel, mean_result: &DetectionResult) -> Result<Panel> {
    let means = crate::segmentation::segment_means(panel, mean_result)?;
    panel.map_rows(|j, row| {
        let mut out = row.to_vec();
        for (&(s, e), m) in mean_result.segments.iter().zip(&means[j]) {
            out[s - 1..e].iter_mut().for_each(|v| *v -= m);
        }
        Ok(out)
    })
}

/// Mean-change detection on the periodogram panel, reported as variance
/// changes. The input is expected to be mean-stabilized already.
pub fn detect_variance_changes(
    panel: &Panel,
    scales: &WaveletScaleSet,
    threshold: f64,
    config: &DcConfig,
    min_seg: usize,
) -> Result<DetectionResult> {
    let expanded = periodogram_panel(panel, scales)?;
    Ok(detect_mean_changes(&expanded, threshold, config, min_seg)?.relabel(ChangeKind::Variance))
}
