// SPDX-License-Identifier: MIT OR Apache-2.0

//! Detection thresholds.
//!
//! The bootstrap route fits a static principal-components factor model to the
//! observed panel, regenerates panels by circular block resampling of the
//! factor series and of the idiosyncratic residuals (independently of each
//! other), and takes an upper quantile of the replicates' full-interval Double
//! CUSUM maxima. Common factors carry the cross-sectional dependence and the
//! blocks carry the serial dependence.
//!
//! The deterministic route is the rate `C * sqrt(ln T) * ln(ln(8 T))`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cusum::estimate_scales;
use crate::double_cusum::{dc_statistic, DcConfig};
use crate::error::{Error, Result};
use crate::panel::Panel;

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_REPS: usize = 500;
pub const MIN_REPS: usize = 100;
/// Constant of the deterministic rate, chosen on the synthetic null suite.
pub const DEFAULT_RATE_CONSTANT: f64 = 1.0;

/// Static approximate factor model `x = mean + loadings * factors + residuals`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    pub series_ids: Vec<String>,
    pub time_index: Vec<i32>,
    pub means: Vec<f64>,
    /// `n × k`, orthonormal columns.
    pub loadings: DMatrix<f64>,
    /// `k × T`.
    pub factors: DMatrix<f64>,
    /// `n × T`.
    pub residuals: DMatrix<f64>,
}

impl FactorModel {
    pub fn n_factors(&self) -> usize {
        self.loadings.ncols()
    }

    /// Model with no common component: everything is residual.
    pub fn idiosyncratic(panel: &Panel) -> Self {
        let (means, centered) = centered(panel);
        let n = panel.n_series();
        let t = panel.len();
        Self {
            series_ids: panel.series_ids().to_vec(),
            time_index: panel.time_index().to_vec(),
            means,
            loadings: DMatrix::zeros(n, 0),
            factors: DMatrix::zeros(0, t),
            residuals: centered,
        }
    }

    /// `mean + loadings * factors + residuals` as a panel.
    pub fn reconstruct(&self) -> Result<Panel> {
        let common = &self.loadings * &self.factors;
        self.assemble(|j, t| common[(j, t)] + self.residuals[(j, t)])
    }

    fn assemble<F: Fn(usize, usize) -> f64>(&self, value: F) -> Result<Panel> {
        let t_len = self.time_index.len();
        let rows = (0..self.means.len())
            .map(|j| (0..t_len).map(|t| self.means[j] + value(j, t)).collect())
            .collect();
        Panel::new(rows, self.series_ids.clone(), self.time_index.clone())
    }
}

fn centered(panel: &Panel) -> (Vec<f64>, DMatrix<f64>) {
    let means: Vec<f64> = panel.rows().map(crate::preprocess::mean).collect();
    let x = DMatrix::from_fn(panel.n_series(), panel.len(), |j, t| {
        panel.series(j)[t] - means[j]
    });
    (means, x)
}

/// Eigenpairs of the sample covariance, eigenvalues descending. Eigenvector
/// signs are fixed so the largest-magnitude entry is positive.
fn covariance_eigen(x: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let t = x.ncols() as f64;
    let cov = (x * x.transpose()) / (t - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(x.nrows(), order.len());
    for (c, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).clone_owned();
        let pivot = v.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(1.0);
        if pivot < 0.0 {
            v.neg_mut();
        }
        vectors.set_column(c, &v);
    }
    (values, vectors)
}

/// Fits `n_factors` principal components of the centered panel.
pub fn fit_factor_model(panel: &Panel, n_factors: usize) -> Result<FactorModel> {
    let limit = panel.n_series().min(panel.len());
    if n_factors < 1 || n_factors >= limit {
        return Err(Error::Config(format!(
            "n_factors = {n_factors}, must be in 1..{limit}"
        )));
    }
    let (means, x) = centered(panel);
    let (values, vectors) = covariance_eigen(&x);
    let scale = values[0].max(f64::MIN_POSITIVE);
    if !(values[n_factors - 1] > 1e-12 * scale) || values[0] <= 0.0 {
        return Err(Error::RankDeficient(format!(
            "eigenvalue {} of the covariance is {:e}",
            n_factors, values[n_factors - 1]
        )));
    }
    let loadings = vectors.columns(0, n_factors).clone_owned();
    let factors = loadings.transpose() * &x;
    let residuals = &x - &loadings * &factors;
    Ok(FactorModel {
        series_ids: panel.series_ids().to_vec(),
        time_index: panel.time_index().to_vec(),
        means,
        loadings,
        factors,
        residuals,
    })
}

/// Ratio-of-eigenvalues choice: `argmax_k λ_k / λ_{k+1}` over
/// `k <= min(n, T) / 2`. Returns 0 when no factor can be fitted.
pub fn select_n_factors(panel: &Panel) -> usize {
    let kmax = (panel.n_series().min(panel.len()) / 2).min(panel.n_series().min(panel.len()) - 1);
    if kmax == 0 {
        return 0;
    }
    let (_, x) = centered(panel);
    let (values, _) = covariance_eigen(&x);
    if !(values[0] > 0.0) {
        return 0;
    }
    let mut best = (0, f64::NEG_INFINITY);
    for k in 1..=kmax {
        if !(values[k - 1] > 1e-12 * values[0]) {
            break;
        }
        let ratio = if values[k] > 0.0 {
            values[k - 1] / values[k]
        } else {
            f64::INFINITY
        };
        if ratio > best.1 {
            best = (k, ratio);
        }
    }
    best.0
}

/// Smallest `L` with `L^3 >= T`.
pub fn block_length(t: usize) -> usize {
    (1..=t).find(|l| l * l * l >= t).unwrap_or(1)
}

/// Circular block bootstrap time indices of length `t`.
fn block_indices<R: Rng>(t: usize, block: usize, rng: &mut R) -> Vec<usize> {
    let mut idx = Vec::with_capacity(t + block);
    while idx.len() < t {
        let start = rng.random_range(0..t);
        idx.extend((0..block).map(|i| (start + i) % t));
    }
    idx.truncate(t);
    idx
}

/// One resampled panel: factor series and residual series are block-resampled
/// with independent index draws and recombined through the loadings.
pub fn bootstrap_replicate<R: Rng>(model: &FactorModel, rng: &mut R) -> Result<Panel> {
    let t = model.time_index.len();
    let block = block_length(t);
    let factor_idx = block_indices(t, block, rng);
    let resid_idx = block_indices(t, block, rng);
    let k = model.n_factors();
    let mut resampled = DMatrix::zeros(k, t);
    for (col, &src) in factor_idx.iter().enumerate() {
        resampled.set_column(col, &model.factors.column(src));
    }
    let common = &model.loadings * resampled;
    model.assemble(|j, col| common[(j, col)] + model.residuals[(j, resid_idx[col])])
}

/// Child generator for replicate `index`; independent of execution order.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub n_reps: usize,
    pub alpha: f64,
    /// `None` selects the count with the eigenvalue-ratio rule.
    pub n_factors: Option<usize>,
    pub seed: u64,
}

impl BootstrapOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            n_reps: DEFAULT_REPS,
            alpha: DEFAULT_ALPHA,
            n_factors: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_reps < MIN_REPS {
            return Err(Error::Config(format!(
                "n_reps = {}, need at least {MIN_REPS}",
                self.n_reps
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha = {} outside (0, 1)", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ThresholdSpec {
    Bootstrap {
        alpha: f64,
        n_reps: usize,
        n_factors: usize,
        block_length: usize,
        seed: u64,
        threshold: f64,
    },
    Deterministic {
        constant: f64,
        n: usize,
        t: usize,
        threshold: f64,
    },
}

impl ThresholdSpec {
    pub fn threshold(&self) -> f64 {
        match *self {
            ThresholdSpec::Bootstrap { threshold, .. } => threshold,
            ThresholdSpec::Deterministic { threshold, .. } => threshold,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            ThresholdSpec::Bootstrap { seed, .. } => Some(seed),
            ThresholdSpec::Deterministic { .. } => None,
        }
    }
}

fn model_for(panel: &Panel, n_factors: Option<usize>) -> Result<FactorModel> {
    match n_factors.unwrap_or_else(|| select_n_factors(panel)) {
        0 => Ok(FactorModel::idiosyncratic(panel)),
        k => fit_factor_model(panel, k),
    }
}

/// Full-interval Double CUSUM maxima of the bootstrap replicates, in
/// replicate order. Scales are re-estimated on every replicate.
pub fn bootstrap_maxima(
    model: &FactorModel,
    config: &DcConfig,
    n_reps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    (0..n_reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(seed, i as u64);
            let rep = bootstrap_replicate(model, &mut rng)?;
            let scales = estimate_scales(&rep, config.scale);
            Ok(dc_statistic(&rep, 1, rep.len(), &scales, config)?.value)
        })
        .collect()
}

/// Order statistic of rank `floor(level * R) + 1` (clamped to `R`), so
/// `level = 1 - 1/R` yields the sample maximum.
pub fn empirical_quantile(values: &[f64], level: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let r = sorted.len();
    let rank = ((level * r as f64 + 1e-9).floor() as usize + 1).clamp(1, r);
    sorted[rank - 1]
}

/// Threshold at the `1 - alpha` quantile of the bootstrap null maxima.
pub fn calibrate_threshold(
    panel: &Panel,
    config: &DcConfig,
    options: &BootstrapOptions,
) -> Result<ThresholdSpec> {
    options.validate()?;
    config.validate()?;
    let model = model_for(panel, options.n_factors)?;
    let maxima = bootstrap_maxima(&model, config, options.n_reps, options.seed)?;
    Ok(ThresholdSpec::Bootstrap {
        alpha: options.alpha,
        n_reps: options.n_reps,
        n_factors: model.n_factors(),
        block_length: block_length(panel.len()),
        seed: options.seed,
        threshold: empirical_quantile(&maxima, 1.0 - options.alpha).max(0.0),
    })
}

/// `C * sqrt(ln T) * ln(ln(8 T))`.
pub fn deterministic_threshold(n: usize, t: usize, constant: f64) -> Result<ThresholdSpec> {
    if !(constant > 0.0) || !constant.is_finite() {
        return Err(Error::Config(format!("rate constant C = {constant}, must be > 0")));
    }
    if t < 2 {
        return Err(Error::Config(format!("T = {t}, need at least 2")));
    }
    let tf = t as f64;
    Ok(ThresholdSpec::Deterministic {
        constant,
        n,
        t,
        threshold: constant * tf.ln().sqrt() * (8.0 * tf).ln().ln(),
    })
}
