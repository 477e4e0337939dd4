// SPDX-License-Identifier: MIT OR Apache-2.0

//! Transformations applied before detection: per-game rates, cross-sectional
//! season z-scores, per-series z-scores and regression imputation.
//!
//! Standard deviations are sample (`n - 1`) standard deviations throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::Panel;

/// A yearly series with explicit missingness (`None` = missing).
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub time_index: Vec<i32>,
    pub values: Vec<Option<f64>>,
}

impl RawSeries {
    pub fn new(time_index: Vec<i32>, values: Vec<Option<f64>>) -> Result<Self> {
        if time_index.len() != values.len() {
            return Err(Error::MisalignedSeries(format!(
                "{} time labels for {} values",
                time_index.len(),
                values.len()
            )));
        }
        Ok(Self { time_index, values })
    }

    pub fn observed(time_index: Vec<i32>, values: Vec<f64>) -> Result<Self> {
        Self::new(time_index, values.into_iter().map(Some).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// All values, or `None` if any is missing.
    pub fn complete(&self) -> Option<Vec<f64>> {
        self.values.iter().copied().collect()
    }
}

/// How a statistic is put on a comparable scale before detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Standardization {
    PerGameRate,
    SeasonZscore,
    SeriesZscore,
    None,
}

/// `counts / games` elementwise; missing wherever either input is missing.
pub fn per_game_rate(counts: &RawSeries, games: &RawSeries) -> Result<RawSeries> {
    if counts.time_index != games.time_index {
        return Err(Error::MisalignedSeries(
            "counts and games have different time indexes".into(),
        ));
    }
    let values = counts
        .values
        .iter()
        .zip(&games.values)
        .zip(&counts.time_index)
        .map(|((c, g), &year)| match (c, g) {
            (Some(c), Some(g)) if *g > 0.0 => Ok(Some(c / g)),
            (Some(_), Some(_)) => Err(Error::ZeroGames(year)),
            _ => Ok(None),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RawSeries {
        time_index: counts.time_index.clone(),
        values,
    })
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; `NaN` for fewer than two values.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Standardizes `value` against the season's peer values.
pub fn season_zscore(value: f64, peers: &[f64]) -> Result<f64> {
    if peers.len() < 2 {
        return Err(Error::DegenerateSeason(format!(
            "{} peer value(s), need at least 2",
            peers.len()
        )));
    }
    let sd = sample_sd(peers);
    if !(sd > 0.0) {
        return Err(Error::DegenerateSeason("peers have zero spread".into()));
    }
    Ok((value - mean(peers)) / sd)
}

/// Fills missing values from an OLS line of value on year, fitted on the
/// observed values of this series only. Observed values are left untouched.
pub fn impute_linear(series: &RawSeries) -> Result<RawSeries> {
    if series.n_missing() == 0 {
        return Ok(series.clone());
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = series
        .time_index
        .iter()
        .zip(&series.values)
        .filter_map(|(&t, v)| v.map(|v| (f64::from(t), v)))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} observed value(s), imputation needs at least 2",
            xs.len()
        )));
    }
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let values = series
        .time_index
        .iter()
        .zip(&series.values)
        .map(|(&t, v)| Some(v.unwrap_or_else(|| my + slope * (f64::from(t) - mx))))
        .collect();
    Ok(RawSeries {
        time_index: series.time_index.clone(),
        values,
    })
}

/// Rescales one series to mean 0 and sample standard deviation 1.
pub fn zscore(xs: &[f64]) -> Option<Vec<f64>> {
    let sd = sample_sd(xs);
    if !(sd > 0.0) {
        return None;
    }
    let m = mean(xs);
    Some(xs.iter().map(|x| (x - m) / sd).collect())
}

/// Rescales every series of the panel to mean 0 and sample sd 1.
pub fn series_zscore(panel: &Panel) -> Result<Panel> {
    panel.map_rows(|j, row| {
        zscore(row).ok_or_else(|| {
            Error::DegenerateSeries(format!("series {} has zero spread", panel.series_ids()[j]))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(years: &[i32], vals: &[Option<f64>]) -> RawSeries {
        RawSeries::new(years.to_vec(), vals.to_vec()).unwrap()
    }

    #[test]
    fn rates() {
        let c = raw(&[1, 2], &[Some(162.0), Some(81.0)]);
        let g = raw(&[1, 2], &[Some(162.0), Some(162.0)]);
        assert_eq!(per_game_rate(&c, &g).unwrap().values, vec![Some(1.0), Some(0.5)]);
    }

    #[test]
    fn rate_zero_games() {
        let c = raw(&[1, 2], &[Some(3.0), Some(4.0)]);
        let g = raw(&[1, 2], &[Some(3.0), Some(0.0)]);
        assert_eq!(per_game_rate(&c, &g).unwrap_err(), Error::ZeroGames(2));
        // zero games where the count is missing is fine
        let c = raw(&[1, 2], &[Some(3.0), None]);
        assert_eq!(per_game_rate(&c, &g).unwrap().values, vec![Some(1.0), None]);
    }

    #[test]
    fn rate_mask_union_and_alignment() {
        let c = raw(&[1, 2, 3], &[Some(2.0), None, Some(6.0)]);
        let g = raw(&[1, 2, 3], &[Some(2.0), Some(2.0), None]);
        assert_eq!(per_game_rate(&c, &g).unwrap().values, vec![Some(1.0), None, None]);
        let g = raw(&[1, 2, 4], &[Some(2.0), Some(2.0), Some(2.0)]);
        assert!(matches!(per_game_rate(&c, &g), Err(Error::MisalignedSeries(_))));
    }

    #[test]
    fn season_zscores() {
        let peers = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(season_zscore(3.0, &peers).unwrap(), 0.0);
        let z = season_zscore(5.0, &peers).unwrap();
        assert!((z - 2.0 / 2.5f64.sqrt()).abs() < 1e-12);
        assert!((z - 1.2649).abs() < 1e-4);
        assert!(matches!(season_zscore(2.0, &[2.0, 2.0, 2.0]), Err(Error::DegenerateSeason(_))));
        assert!(matches!(season_zscore(2.0, &[2.0]), Err(Error::DegenerateSeason(_))));
    }

    #[test]
    fn imputation_examples() {
        let s = raw(&[1900, 1901, 1902], &[Some(1.0), None, Some(3.0)]);
        assert_eq!(impute_linear(&s).unwrap().complete().unwrap(), vec![1.0, 2.0, 3.0]);

        let s = raw(&[1, 2, 3, 4], &[Some(0.0), None, None, Some(6.0)]);
        let out = impute_linear(&s).unwrap().complete().unwrap();
        for (a, b) in out.iter().zip([0.0, 2.0, 4.0, 6.0]) {
            assert!((a - b).abs() < 1e-12);
        }

        let s = raw(&[1, 2, 3], &[Some(0.5), Some(7.0), Some(-1.0)]);
        assert_eq!(impute_linear(&s).unwrap(), s);

        let s = raw(&[1, 2, 3], &[Some(0.5), None, None]);
        assert!(matches!(impute_linear(&s), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn series_zscore_examples() {
        let p = Panel::from_rows(vec![vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(series_zscore(&p).unwrap().series(0), &[-1.0, 0.0, 1.0]);
        let c = Panel::from_rows(vec![vec![1.0, 2.0, 3.0], vec![4.0, 4.0, 4.0]]).unwrap();
        assert!(matches!(series_zscore(&c), Err(Error::DegenerateSeries(_))));
        let once = series_zscore(&Panel::from_rows(vec![vec![3.0, -1.0, 8.0, 0.5]]).unwrap()).unwrap();
        let twice = series_zscore(&once).unwrap();
        for (a, b) in once.series(0).iter().zip(twice.series(0)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn imputation_is_idempotent_and_preserves_observed(
            vals in prop::collection::vec(prop::option::weighted(0.7, -100.0f64..100.0), 3..40)
        ) {
            prop_assume!(vals.iter().filter(|v| v.is_some()).count() >= 2);
            let years: Vec<i32> = (1900..1900 + vals.len() as i32).collect();
            let s = RawSeries::new(years, vals.clone()).unwrap();
            let once = impute_linear(&s).unwrap();
            prop_assert_eq!(once.n_missing(), 0);
            for (orig, filled) in vals.iter().zip(&once.values) {
                if let Some(v) = orig {
                    prop_assert_eq!(v.to_bits(), filled.unwrap().to_bits());
                }
            }
            prop_assert_eq!(impute_linear(&once).unwrap(), once);
        }

        #[test]
        fn peers_standardize_to_unit(peers in prop::collection::vec(-50.0f64..50.0, 2..30)) {
            prop_assume!(sample_sd(&peers) > 1e-6);
            let z: Vec<f64> = peers.iter().map(|&v| season_zscore(v, &peers).unwrap()).collect();
            prop_assert!(mean(&z).abs() < 1e-12);
            prop_assert!((sample_sd(&z) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn rate_is_scale_consistent(
            pairs in prop::collection::vec((0.0f64..500.0, 1.0f64..200.0), 1..20)
        ) {
            let years: Vec<i32> = (0..pairs.len() as i32).collect();
            let c = RawSeries::observed(years.clone(), pairs.iter().map(|p| p.0).collect()).unwrap();
            let g = RawSeries::observed(years.clone(), pairs.iter().map(|p| p.1).collect()).unwrap();
            let c2 = RawSeries::observed(years.clone(), pairs.iter().map(|p| 2.0 * p.0).collect()).unwrap();
            let g2 = RawSeries::observed(years, pairs.iter().map(|p| 2.0 * p.1).collect()).unwrap();
            let a = per_game_rate(&c, &g).unwrap().complete().unwrap();
            let b = per_game_rate(&c2, &g2).unwrap().complete().unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }
}
