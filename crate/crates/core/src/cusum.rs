// SPDX-License-Identifier: MIT OR Apache-2.0

//! Scaled CUSUM statistic of a single series over a segment `[s, e]`.
//!
//! For a split `b` with `s <= b < e`, writing `N = e - s + 1` and
//! `l = b - s + 1`, the statistic is
//!
//! ```text
//! C(b) = [ sqrt((e-b)/(N l)) * sum(x[s..=b]) - sqrt(l/(N (e-b))) * sum(x[b+1..=e]) ] / sigma
//! ```
//!
//! Large `|C(b)|` signals a mean shift after position `b`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{check_segment, check_split, Panel};
use crate::preprocess::sample_sd;

/// Gaussian consistency constant for the median absolute value.
const MAD_CONSISTENCY: f64 = 0.6745;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMethod {
    /// Median of absolute first differences, normalized for Gaussian noise.
    #[default]
    MadDiff,
    /// Sample standard deviation of first differences over `sqrt(2)`.
    SdDiff,
    Unit,
}

impl std::str::FromStr for ScaleMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mad_diff" | "mad" => Ok(Self::MadDiff),
            "sd_diff" | "sd" => Ok(Self::SdDiff),
            "unit" => Ok(Self::Unit),
            other => Err(Error::Config(format!("unknown scale method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleEstimate {
    pub sigma: f64,
    pub method: ScaleMethod,
}

pub(crate) fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

pub fn estimate_scale(series: &[f64], method: ScaleMethod) -> Result<ScaleEstimate> {
    let sigma = match method {
        ScaleMethod::Unit => 1.0,
        ScaleMethod::MadDiff | ScaleMethod::SdDiff => {
            if series.len() < 3 {
                return Err(Error::InsufficientData(format!(
                    "difference-based scale needs 3 observations, got {}",
                    series.len()
                )));
            }
            let diffs: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
            if method == ScaleMethod::MadDiff {
                let mut abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
                median(&mut abs) / (MAD_CONSISTENCY * std::f64::consts::SQRT_2)
            } else {
                sample_sd(&diffs) / std::f64::consts::SQRT_2
            }
        }
    };
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::DegenerateSeries(format!(
            "{method:?} scale estimate is {sigma}"
        )));
    }
    Ok(ScaleEstimate { sigma, method })
}

/// One scale per series, estimated on the full series. A degenerate estimate
/// falls back to 1 with a warning so that a single flat series cannot abort a
/// whole-panel run.
pub fn estimate_scales(panel: &Panel, method: ScaleMethod) -> Vec<f64> {
    panel
        .rows()
        .enumerate()
        .map(|(j, row)| match estimate_scale(row, method) {
            Ok(est) => est.sigma,
            Err(err) => {
                log::warn!(
                    "series {}: {err}; falling back to unit scale",
                    panel.series_ids()[j]
                );
                1.0
            }
        })
        .collect()
}

/// Direct evaluation of the CUSUM of series `j` (0-based) at split `b`.
pub fn cusum_at(panel: &Panel, j: usize, s: usize, b: usize, e: usize, sigma: f64) -> Result<f64> {
    check_split(s, b, e, panel.len())?;
    if j >= panel.n_series() {
        return Err(Error::IndexOutOfRange(format!(
            "series {j} of {}",
            panel.n_series()
        )));
    }
    let x = panel.series(j);
    let n = (e - s + 1) as f64;
    let l = (b - s + 1) as f64;
    let r = (e - b) as f64;
    let left: f64 = x[s - 1..b].iter().sum();
    let right: f64 = x[b..e].iter().sum();
    Ok(((r / (n * l)).sqrt() * left - (l / (n * r)).sqrt() * right) / sigma)
}

/// CUSUM values of one series for every split `b = s..e-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CusumRow {
    pub s: usize,
    pub e: usize,
    pub series: usize,
    pub values: Vec<f64>,
}

impl CusumRow {
    /// Value at split `b` (1-based, `s <= b < e`).
    pub fn at(&self, b: usize) -> f64 {
        self.values[b - self.s]
    }
}

/// All CUSUM values of series `j` on `[s, e]` in linear time.
pub fn cusum_row(panel: &Panel, j: usize, s: usize, e: usize, sigma: f64) -> Result<CusumRow> {
    check_segment(s, e, panel.len())?;
    if j >= panel.n_series() {
        return Err(Error::IndexOutOfRange(format!(
            "series {j} of {}",
            panel.n_series()
        )));
    }
    let mut values = Vec::with_capacity(e - s);
    fill_cusum_row(&panel.series(j)[s - 1..e], sigma, &mut values);
    Ok(CusumRow {
        s,
        e,
        series: j,
        values,
    })
}

/// Pushes the `len - 1` CUSUM values of `segment` into `out`.
///
/// Uses `C(l) = (N * S_l - l * S_N) / sqrt(N l (N - l))` with `S_l` the sum of
/// the first `l` values, which is algebraically identical to the two-sum form.
pub(crate) fn fill_cusum_row(segment: &[f64], sigma: f64, out: &mut Vec<f64>) {
    let n = segment.len();
    let total: f64 = segment.iter().sum();
    let nf = n as f64;
    let mut partial = 0.0;
    for (i, x) in segment[..n - 1].iter().enumerate() {
        partial += x;
        let l = (i + 1) as f64;
        let c = (nf * partial - l * total) / (nf * l * (nf - l)).sqrt();
        out.push(c / sigma);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    /// Eq.-by-hand evaluation with explicit loops, independent of both code paths.
    fn naive(x: &[f64], s: usize, b: usize, e: usize, sigma: f64) -> f64 {
        let mut left = 0.0;
        for t in s..=b {
            left += x[t - 1];
        }
        let mut right = 0.0;
        for t in b + 1..=e {
            right += x[t - 1];
        }
        let (s, b, e) = (s as f64, b as f64, e as f64);
        let wl = ((e - b) / ((e - s + 1.0) * (b - s + 1.0))).sqrt();
        let wr = ((b - s + 1.0) / ((e - s + 1.0) * (e - b))).sqrt();
        (wl * left - wr * right) / sigma
    }

    fn step() -> Panel {
        Panel::from_rows(vec![vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]]).unwrap()
    }

    #[test]
    fn hand_case() {
        let v = cusum_at(&step(), 0, 1, 3, 6, 1.0).unwrap();
        assert_eq!(v, -(1.5f64).sqrt());
        let row = cusum_row(&step(), 0, 1, 6, 1.0).unwrap();
        assert_eq!(row.at(3), -(1.5f64).sqrt());
        let shifted = Panel::from_rows(vec![vec![10.0, 10.0, 10.0, 11.0, 11.0, 11.0]]).unwrap();
        let v = cusum_at(&shifted, 0, 1, 3, 6, 1.0).unwrap();
        assert!((v + 1.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constant_series_is_zero() {
        let p = Panel::from_rows(vec![vec![4.2; 17]]).unwrap();
        for s in 1..16 {
            for e in s + 1..=17 {
                let row = cusum_row(&p, 0, s, e, 1.0).unwrap();
                assert_eq!(row.values.len(), e - s);
                assert!(row.values.iter().all(|v| v.abs() < 1e-12));
                for b in s..e {
                    assert!(cusum_at(&p, 0, s, b, e, 1.0).unwrap().abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn index_errors() {
        let p = step();
        assert!(matches!(cusum_at(&p, 0, 1, 6, 6, 1.0), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(cusum_at(&p, 0, 3, 2, 6, 1.0), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(cusum_at(&p, 0, 1, 3, 7, 1.0), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(cusum_at(&p, 1, 1, 3, 6, 1.0), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(cusum_row(&p, 0, 4, 4, 1.0), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn noiseless_step_argmax() {
        for b0 in 1..40 {
            let x: Vec<f64> = (1..=40).map(|t| if t <= b0 { 0.0 } else { 2.5 }).collect();
            let p = Panel::from_rows(vec![x.clone()]).unwrap();
            let row = cusum_row(&p, 0, 1, 40, 1.0).unwrap();
            // brute-force argmax over all admissible b
            let mut best = (0, f64::MIN);
            for b in 1..40 {
                let v = naive(&x, 1, b, 40, 1.0).abs();
                if v > best.1 {
                    best = (b, v);
                }
            }
            assert_eq!(best.0, b0);
            let arg = (1..40)
                .max_by(|&a, &b| row.at(a).abs().total_cmp(&row.at(b).abs()).then(b.cmp(&a)))
                .unwrap();
            assert_eq!(arg, b0);
        }
    }

    #[test]
    fn row_matches_naive_on_random_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..64).map(|_| rng.sample(StandardNormal)).collect();
        let p = Panel::from_rows(vec![x.clone()]).unwrap();
        let mut max_diff: f64 = 0.0;
        for s in 1..64 {
            for e in s + 1..=64 {
                let row = cusum_row(&p, 0, s, e, 1.3).unwrap();
                for b in s..e {
                    max_diff = max_diff.max((row.at(b) - naive(&x, s, b, e, 1.3)).abs());
                }
            }
        }
        assert!(max_diff <= 1e-10, "max diff {max_diff}");
    }

    #[test]
    fn scale_estimates() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let x: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
        let est = estimate_scale(&x, ScaleMethod::MadDiff).unwrap();
        assert!((0.9..=1.1).contains(&est.sigma), "{}", est.sigma);
        let est = estimate_scale(&x, ScaleMethod::SdDiff).unwrap();
        assert!((0.9..=1.1).contains(&est.sigma), "{}", est.sigma);
        assert_eq!(estimate_scale(&x, ScaleMethod::Unit).unwrap().sigma, 1.0);
        assert_eq!(estimate_scale(&[3.0, 9.0], ScaleMethod::Unit).unwrap().sigma, 1.0);

        let flat = [5.0; 20];
        assert!(matches!(
            estimate_scale(&flat, ScaleMethod::MadDiff),
            Err(Error::DegenerateSeries(_))
        ));
        assert!(matches!(
            estimate_scale(&[1.0, 2.0], ScaleMethod::MadDiff),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn degenerate_scale_falls_back_to_unit() {
        let p = Panel::from_rows(vec![vec![1.0; 10], vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]])
            .unwrap();
        let scales = estimate_scales(&p, ScaleMethod::MadDiff);
        assert_eq!(scales[0], 1.0);
        assert!((scales[1] - 1.0 / (MAD_CONSISTENCY * std::f64::consts::SQRT_2)).abs() < 1e-12);
    }

    fn series_strategy() -> impl Strategy<Value = (Vec<f64>, usize, usize, usize)> {
        (3usize..60).prop_flat_map(|t| {
            (
                prop::collection::vec(-50.0f64..50.0, t),
                1..t,
                Just(t),
            )
                .prop_flat_map(|(x, s, t)| {
                    (Just(x), Just(s), (s + 1)..=t)
                })
                .prop_flat_map(|(x, s, e)| (Just(x), Just(s), s..e, Just(e)))
        })
    }

    proptest! {
        #[test]
        fn level_shift_invariance((x, s, b, e) in series_strategy(), c in -1e3f64..1e3) {
            let p = Panel::from_rows(vec![x.clone()]).unwrap();
            let q = Panel::from_rows(vec![x.iter().map(|v| v + c).collect()]).unwrap();
            let a = cusum_at(&p, 0, s, b, e, 1.0).unwrap();
            let d = cusum_at(&q, 0, s, b, e, 1.0).unwrap();
            prop_assert!((a - d).abs() <= 1e-10 * (1.0 + c.abs()));
        }

        #[test]
        fn negation_antisymmetry((x, s, b, e) in series_strategy()) {
            let p = Panel::from_rows(vec![x.clone()]).unwrap();
            let q = Panel::from_rows(vec![x.iter().map(|v| -v).collect()]).unwrap();
            prop_assert_eq!(cusum_at(&p, 0, s, b, e, 1.0).unwrap(), -cusum_at(&q, 0, s, b, e, 1.0).unwrap());
        }

        #[test]
        fn prefix_row_equals_naive((x, s, _b, e) in series_strategy(), sigma in 0.1f64..10.0) {
            let p = Panel::from_rows(vec![x.clone()]).unwrap();
            let row = cusum_row(&p, 0, s, e, sigma).unwrap();
            for b in s..e {
                prop_assert!((row.at(b) - naive(&x, s, b, e, sigma)).abs() <= 1e-10);
            }
        }
    }
}
