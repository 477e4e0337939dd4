// SPDX-License-Identifier: MIT OR Apache-2.0

//! Synthetic panels with planted breaks, an exhaustive reference for the
//! Double CUSUM maximizer, and detection scoring.
//!
//! Planted-panel specs have a plain-text `key = value` form so suites can live
//! in the repository:
//!
//! ```text
//! # two common mean shifts under equicorrelated noise
//! n = 16
//! t = 120
//! noise_sd = 1
//! rho = 0.3
//! seed = 7
//! mean_break = 40 : 3          # one value is broadcast to every series
//! mean_break = 80 : 3,-3,0,0,... # or one value per series
//! variance_break = 60 : 3
//! ```
//!
//! A break at index `b` changes the series from position `b + 1` on.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cusum::cusum_at;
use crate::double_cusum::dc_weight;
use crate::error::{Error, Result};
use crate::panel::{check_segment, Panel};

pub const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedPanelSpec {
    pub n: usize,
    pub t: usize,
    /// `(index, per-series jump)`.
    pub mean_breaks: Vec<(usize, Vec<f64>)>,
    /// `(index, per-series sd multiplier)`.
    pub variance_breaks: Vec<(usize, Vec<f64>)>,
    pub noise_sd: f64,
    pub rho: f64,
    pub seed: u64,
}

impl PlantedPanelSpec {
    pub fn new(n: usize, t: usize, seed: u64) -> Self {
        Self {
            n,
            t,
            mean_breaks: Vec::new(),
            variance_breaks: Vec::new(),
            noise_sd: 1.0,
            rho: 0.0,
            seed,
        }
    }

    /// Checks shapes, positivity and break spacing (`>= 2 * min_seg` between
    /// consecutive breaks of the same kind).
    pub fn validate(&self, min_seg: usize) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if self.n < 1 || self.t < 2 {
            return cfg(format!("need n >= 1 and T >= 2, got {} x {}", self.n, self.t));
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return cfg(format!("noise_sd = {}", self.noise_sd));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return cfg(format!("rho = {} outside [0, 1]", self.rho));
        }
        for (label, breaks) in [("mean", &self.mean_breaks), ("variance", &self.variance_breaks)] {
            for (b, v) in breaks {
                if *b < 1 || *b >= self.t {
                    return cfg(format!("{label} break {b} outside 1..{}", self.t));
                }
                if v.len() != self.n {
                    return cfg(format!("{label} break {b}: {} values for {} series", v.len(), self.n));
                }
            }
            for w in breaks.windows(2) {
                if w[1].0 <= w[0].0 || w[1].0 - w[0].0 < 2 * min_seg {
                    return cfg(format!(
                        "{label} breaks {} and {} not increasing with spacing >= {}",
                        w[0].0,
                        w[1].0,
                        2 * min_seg
                    ));
                }
            }
        }
        if self
            .variance_breaks
            .iter()
            .any(|(_, v)| v.iter().any(|m| !(*m > 0.0)))
        {
            return cfg("sd multipliers must be positive".into());
        }
        Ok(())
    }

    pub fn mean_break_indices(&self) -> Vec<usize> {
        self.mean_breaks.iter().map(|b| b.0).collect()
    }

    pub fn variance_break_indices(&self) -> Vec<usize> {
        self.variance_breaks.iter().map(|b| b.0).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = Self::new(0, 0, 0);
        let mut seen_n = false;
        let mut pending: Vec<(bool, usize, Vec<f64>, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| Error::SpecSyntax {
                line: line_no,
                reason,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| v.parse::<f64>().map_err(|_| err(format!("bad number {v:?}")));
            let int = |v: &str| v.parse::<u64>().map_err(|_| err(format!("bad integer {v:?}")));
            match key {
                "n" => {
                    spec.n = int(value)? as usize;
                    seen_n = true;
                }
                "t" | "T" => spec.t = int(value)? as usize,
                "noise_sd" => spec.noise_sd = num(value)?,
                "rho" => spec.rho = num(value)?,
                "seed" => spec.seed = int(value)?,
                "mean_break" | "variance_break" => {
                    let (idx, vals) = value
                        .split_once(':')
                        .ok_or_else(|| err("expected `index : values`".into()))?;
                    let vals = vals
                        .split(',')
                        .map(|v| num(v.trim()))
                        .collect::<Result<Vec<_>>>()?;
                    pending.push((key == "mean_break", int(idx.trim())? as usize, vals, line_no));
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        if !seen_n {
            return Err(Error::SpecSyntax {
                line: 0,
                reason: "missing key `n`".into(),
            });
        }
        for (is_mean, idx, vals, line) in pending {
            let vals = match vals.len() {
                1 => vec![vals[0]; spec.n],
                len if len == spec.n => vals,
                len => {
                    return Err(Error::SpecSyntax {
                        line,
                        reason: format!("{len} values for {} series", spec.n),
                    })
                }
            };
            if is_mean {
                spec.mean_breaks.push((idx, vals));
            } else {
                spec.variance_breaks.push((idx, vals));
            }
        }
        Ok(spec)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "t = {}", self.t);
        let _ = writeln!(out, "noise_sd = {}", self.noise_sd);
        let _ = writeln!(out, "rho = {}", self.rho);
        let _ = writeln!(out, "seed = {}", self.seed);
        for (key, breaks) in [("mean_break", &self.mean_breaks), ("variance_break", &self.variance_breaks)] {
            for (b, v) in breaks {
                let vals: Vec<String> = v.iter().map(f64::to_string).collect();
                let _ = writeln!(out, "{key} = {b} : {}", vals.join(","));
            }
        }
        out
    }
}

/// A generated panel and the planted truth.
#[derive(Debug, Clone)]
pub struct PlantedPanel {
    pub panel: Panel,
    pub mean_breaks: Vec<usize>,
    pub variance_breaks: Vec<usize>,
}

/// Piecewise-constant means and piecewise sds under equicorrelated Gaussian
/// noise `sd_j(t) * (sqrt(rho) z_t + sqrt(1 - rho) e_jt)`.
pub fn gen_piecewise_panel(spec: &PlantedPanelSpec) -> Result<PlantedPanel> {
    spec.validate(1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let common: Vec<f64> = (0..spec.t).map(|_| rng.sample(StandardNormal)).collect();
    let (a, c) = (spec.rho.sqrt(), (1.0 - spec.rho).sqrt());
    let mut rows = Vec::with_capacity(spec.n);
    for j in 0..spec.n {
        let row = (1..=spec.t)
            .map(|pos| {
                let level: f64 = spec
                    .mean_breaks
                    .iter()
                    .filter(|(b, _)| pos > *b)
                    .map(|(_, v)| v[j])
                    .sum();
                let sd: f64 = spec
                    .variance_breaks
                    .iter()
                    .filter(|(b, _)| pos > *b)
                    .map(|(_, v)| v[j])
                    .product::<f64>()
                    * spec.noise_sd;
                let idio: f64 = rng.sample(StandardNormal);
                level + sd * (a * common[pos - 1] + c * idio)
            })
            .collect();
        rows.push(row);
    }
    Ok(PlantedPanel {
        panel: Panel::from_rows(rows)?,
        mean_breaks: spec.mean_break_indices(),
        variance_breaks: spec.variance_break_indices(),
    })
}

/// Exhaustive maximization of the Double CUSUM over `b` and `m`, evaluating
/// every CUSUM from scratch. Ties resolve to the smallest `b`, then `m`.
pub fn brute_force_single_change(
    panel: &Panel,
    s: usize,
    e: usize,
    scales: &[f64],
    phi: f64,
) -> Result<(usize, usize, f64)> {
    check_segment(s, e, panel.len())?;
    let n = panel.n_series();
    let width = (e - s + 1) as u64;
    let cost = n as u64 * width * width;
    if cost > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge {
            cost,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best = (s, 1, f64::NEG_INFINITY);
    for b in s..e {
        let mut column = (0..n)
            .map(|j| cusum_at(panel, j, s, b, e, scales[j]).map(f64::abs))
            .collect::<Result<Vec<_>>>()?;
        column.sort_by(|x, y| y.total_cmp(x));
        for m in 1..=n {
            let top: f64 = column[..m].iter().sum();
            let rest: f64 = column[m..].iter().sum();
            let value = dc_weight(m, n, phi) * (top / m as f64 - rest / (2 * n - m) as f64);
            if value > best.2 {
                best = (b, m, value);
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DetectionScore {
    pub matched: usize,
    pub unmatched_true: usize,
    pub spurious: usize,
    /// `|detected - true|` for each matched pair, ordered by the true index.
    pub localization_errors: Vec<usize>,
}

impl DetectionScore {
    /// Every true break found and nothing else.
    pub fn is_exact_recovery(&self) -> bool {
        self.unmatched_true == 0 && self.spurious == 0
    }
}

/// Greedy nearest matching within `tolerance`: candidate pairs are accepted in
/// order of distance (then true index, then detected index), each truth and
/// each detection used at most once.
pub fn score_detection(truth: &[i64], detected: &[i64], tolerance: u64) -> DetectionScore {
    let mut pairs: Vec<(u64, i64, i64, usize, usize)> = Vec::new();
    for (ti, &t) in truth.iter().enumerate() {
        for (di, &d) in detected.iter().enumerate() {
            let dist = t.abs_diff(d);
            if dist <= tolerance {
                pairs.push((dist, t, d, ti, di));
            }
        }
    }
    // equal values are interchangeable, so ties between them cannot change the outcome
    pairs.sort_unstable();
    let mut used_t = vec![false; truth.len()];
    let mut used_d = vec![false; detected.len()];
    let mut matched: Vec<(i64, u64)> = Vec::new();
    for (dist, t, _, ti, di) in pairs {
        if used_t[ti] || used_d[di] {
            continue;
        }
        used_t[ti] = true;
        used_d[di] = true;
        matched.push((t, dist));
    }
    matched.sort_unstable();
    DetectionScore {
        matched: matched.len(),
        unmatched_true: truth.len() - matched.len(),
        spurious: detected.len() - matched.len(),
        localization_errors: matched.into_iter().map(|(_, d)| d as usize).collect(),
    }
}

/// Convenience wrapper for 1-based indices.
pub fn score_indices(truth: &[usize], detected: &[usize], tolerance: usize) -> DetectionScore {
    let t: Vec<i64> = truth.iter().map(|&v| v as i64).collect();
    let d: Vec<i64> = detected.iter().map(|&v| v as i64).collect();
    score_detection(&t, &d, tolerance as u64)
}
