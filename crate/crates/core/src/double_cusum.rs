// SPDX-License-Identifier: MIT OR Apache-2.0

//! Double CUSUM aggregation across the series of a panel.
//!
//! At each split `b` the absolute CUSUMs of the `n` series are sorted in
//! descending order, `|X(1)| >= ... >= |X(n)|`, and for `m = 1..=n`
//!
//! ```text
//! D_m = (m (2n - m) / (2n))^phi * ( mean(|X(1)|..|X(m)|) - sum(|X(m+1)|..|X(n)|) / (2n - m) )
//! ```
//!
//! The statistic of a segment is the maximum of `D_m` over `b` and `m`.

use serde::{Deserialize, Serialize};

use crate::cusum::{fill_cusum_row, ScaleMethod};
use crate::error::{Error, Result};
use crate::panel::{check_segment, Panel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcConfig {
    /// Exponent of the leading weight, in `[0, 1]`.
    pub phi: f64,
    /// Per-series scale estimator, applied once on the full panel.
    #[serde(default)]
    pub scale: ScaleMethod,
}

impl Default for DcConfig {
    fn default() -> Self {
        Self {
            phi: 0.5,
            scale: ScaleMethod::MadDiff,
        }
    }
}

impl DcConfig {
    pub fn new(phi: f64) -> Result<Self> {
        let cfg = Self {
            phi,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.phi) {
            return Err(Error::Config(format!("phi = {} outside [0, 1]", self.phi)));
        }
        Ok(())
    }
}

/// Maximizer of the Double CUSUM over a segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcResult {
    pub b_star: usize,
    pub m_star: usize,
    pub value: f64,
}

/// Leading weight `(m (2n - m) / (2n))^phi`.
pub fn dc_weight(m: usize, n: usize, phi: f64) -> f64 {
    let (m, n) = (m as f64, n as f64);
    (m * (2.0 * n - m) / (2.0 * n)).powf(phi)
}

/// `D_m` for one descending-sorted vector of absolute CUSUMs.
pub fn dc_at(ordered_abs: &[f64], m: usize, phi: f64) -> Result<f64> {
    let n = ordered_abs.len();
    if m < 1 || m > n {
        return Err(Error::BadM { m, n });
    }
    if let Some(i) = ordered_abs.windows(2).position(|w| !(w[0] >= w[1])) {
        return Err(Error::UnsortedInput(i + 1));
    }
    let top: f64 = ordered_abs[..m].iter().sum();
    let rest: f64 = ordered_abs[m..].iter().sum();
    Ok(dc_weight(m, n, phi) * (top / m as f64 - rest / (2 * n - m) as f64))
}

/// Maximizes the Double CUSUM over `b in [s, e)` and `m in 1..=n`.
///
/// Ties resolve to the smallest `b`, then the smallest `m`.
pub fn dc_statistic(
    panel: &Panel,
    s: usize,
    e: usize,
    scales: &[f64],
    config: &DcConfig,
) -> Result<DcResult> {
    check_segment(s, e, panel.len())?;
    config.validate()?;
    let n = panel.n_series();
    if scales.len() != n {
        return Err(Error::MisalignedSeries(format!(
            "{} scales for {} series",
            scales.len(),
            n
        )));
    }
    if let Some(j) = scales.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Config(format!("scale of series {j} is not positive")));
    }

    let width = e - s;
    // n x (e - s) matrix of |CUSUM|, row-major
    let mut matrix = Vec::with_capacity(n * width);
    for (row, &sigma) in panel.rows().zip(scales) {
        fill_cusum_row(&row[s - 1..e], sigma, &mut matrix);
    }
    matrix.iter_mut().for_each(|v| *v = v.abs());

    let weights: Vec<f64> = (1..=n).map(|m| dc_weight(m, n, config.phi)).collect();
    let mut column = vec![0.0; n];
    let mut best = DcResult {
        b_star: s,
        m_star: 1,
        value: f64::NEG_INFINITY,
    };
    for k in 0..width {
        for (j, slot) in column.iter_mut().enumerate() {
            *slot = matrix[j * width + k];
        }
        column.sort_unstable_by(|a, b| b.total_cmp(a));
        let total: f64 = column.iter().sum();
        let mut top = 0.0;
        for m in 1..=n {
            top += column[m - 1];
            let rest = total - top;
            let value = weights[m - 1] * (top / m as f64 - rest / (2 * n - m) as f64);
            if value > best.value {
                best = DcResult {
                    b_star: s + k,
                    m_star: m,
                    value,
                };
            }
        }
    }
    Ok(best)
}
