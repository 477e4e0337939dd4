// SPDX-License-Identifier: MIT OR Apache-2.0

//! Equal-length multivariate panels.
//!
//! A [`Panel`] holds `n` series observed on a shared grid of `T` integer time
//! labels (season years for the baseball data). All user-facing time positions
//! are 1-based: position `1` is the first column, position `T` the last.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Rectangular `n × T` panel of finite values, immutable after construction.
///
/// Serializes as `{series_ids, time_index, rows}`; deserialization runs the
/// same validation as [`Panel::new`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PanelData", into = "PanelData")]
pub struct Panel {
    series_ids: Vec<String>,
    time_index: Vec<i32>,
    /// Row-major, `n * T`.
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PanelData {
    series_ids: Vec<String>,
    time_index: Vec<i32>,
    rows: Vec<Vec<f64>>,
}

impl TryFrom<PanelData> for Panel {
    type Error = Error;

    fn try_from(d: PanelData) -> Result<Self> {
        Panel::new(d.rows, d.series_ids, d.time_index)
    }
}

impl From<Panel> for PanelData {
    fn from(p: Panel) -> Self {
        PanelData {
            rows: p.rows().map(<[f64]>::to_vec).collect(),
            series_ids: p.series_ids,
            time_index: p.time_index,
        }
    }
}

impl Panel {
    /// Validates and builds a panel from one row per series.
    pub fn new(rows: Vec<Vec<f64>>, series_ids: Vec<String>, time_index: Vec<i32>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyPanel("no series".into()));
        }
        let t = rows[0].len();
        for (j, row) in rows.iter().enumerate() {
            if row.len() != t {
                return Err(Error::RaggedPanel {
                    series: j,
                    expected: t,
                    found: row.len(),
                });
            }
        }
        if t < 2 {
            return Err(Error::EmptyPanel(format!("need at least 2 time points, got {t}")));
        }
        if series_ids.len() != rows.len() {
            return Err(Error::MisalignedSeries(format!(
                "{} series ids for {} series",
                series_ids.len(),
                rows.len()
            )));
        }
        if time_index.len() != t {
            return Err(Error::MisalignedSeries(format!(
                "{} time labels for {} observations",
                time_index.len(),
                t
            )));
        }
        if let Some(pos) = time_index.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::UnorderedTimeIndex(pos + 2));
        }
        for (j, row) in rows.iter().enumerate() {
            if let Some(pos) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    series: j,
                    position: pos + 1,
                });
            }
        }
        Ok(Self {
            series_ids,
            time_index,
            values: rows.into_iter().flatten().collect(),
        })
    }

    /// Panel with generated ids `s1..sn` and time labels `1..=T`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let t = rows.first().map_or(0, Vec::len);
        let ids = (1..=n).map(|j| format!("s{j}")).collect();
        let time = (1..=t as i32).collect();
        Self::new(rows, ids, time)
    }

    pub fn n_series(&self) -> usize {
        self.series_ids.len()
    }

    pub fn len(&self) -> usize {
        self.time_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time_index.is_empty()
    }

    pub fn series_ids(&self) -> &[String] {
        &self.series_ids
    }

    pub fn time_index(&self) -> &[i32] {
        &self.time_index
    }

    /// Full row of series `j` (0-based series index).
    pub fn series(&self, j: usize) -> &[f64] {
        let t = self.len();
        &self.values[j * t..(j + 1) * t]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.len())
    }

    /// Value of series `j` (0-based) at 1-based time position `t`.
    pub fn get(&self, j: usize, t: usize) -> f64 {
        self.series(j)[t - 1]
    }

    /// Time label at 1-based position `t`.
    pub fn label(&self, t: usize) -> i32 {
        self.time_index[t - 1]
    }

    /// Copy of columns `s..=e` (1-based, inclusive).
    pub fn slice(&self, s: usize, e: usize) -> Result<Panel> {
        if s < 1 || s >= e || e > self.len() {
            return Err(Error::IndexOutOfRange(format!(
                "slice [{s}, {e}] of a panel with T = {}",
                self.len()
            )));
        }
        let rows = self.rows().map(|r| r[s - 1..e].to_vec()).collect();
        Panel::new(rows, self.series_ids.clone(), self.time_index[s - 1..e].to_vec())
    }

    /// Applies `f` to every row, keeping ids and time labels.
    pub fn map_rows<F>(&self, mut f: F) -> Result<Panel>
    where
        F: FnMut(usize, &[f64]) -> Result<Vec<f64>>,
    {
        let rows = self
            .rows()
            .enumerate()
            .map(|(j, r)| f(j, r))
            .collect::<Result<Vec<_>>>()?;
        Panel::new(rows, self.series_ids.clone(), self.time_index.clone())
    }

    /// Same data with the rows reordered by `order` (a permutation of `0..n`).
    pub fn permute_rows(&self, order: &[usize]) -> Result<Panel> {
        let rows = order.iter().map(|&j| self.series(j).to_vec()).collect();
        let ids = order.iter().map(|&j| self.series_ids[j].clone()).collect();
        Panel::new(rows, ids, self.time_index.clone())
    }

    /// SHA-256 over shape, ids, time labels and the exact value bits.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.n_series() as u64).to_le_bytes());
        hasher.update((self.len() as u64).to_le_bytes());
        for id in &self.series_ids {
            hasher.update((id.len() as u64).to_le_bytes());
            hasher.update(id.as_bytes());
        }
        for t in &self.time_index {
            hasher.update(t.to_le_bytes());
        }
        for v in &self.values {
            hasher.update(v.to_bits().to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Candidate split `b` inside the segment `[s, e]`, all 1-based and inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub s: usize,
    pub b: usize,
    pub e: usize,
}

impl Interval {
    pub fn new(s: usize, b: usize, e: usize, t: usize) -> Result<Self> {
        check_split(s, b, e, t)?;
        Ok(Self { s, b, e })
    }
}

pub(crate) fn check_segment(s: usize, e: usize, t: usize) -> Result<()> {
    if s < 1 || s >= e || e > t {
        return Err(Error::IndexOutOfRange(format!(
            "segment [{s}, {e}] with T = {t}"
        )));
    }
    Ok(())
}

pub(crate) fn check_split(s: usize, b: usize, e: usize, t: usize) -> Result<()> {
    check_segment(s, e, t)?;
    if b < s || b >= e {
        return Err(Error::IndexOutOfRange(format!(
            "split {b} outside [{s}, {e})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn years(t: usize) -> Vec<i32> {
        (1901..1901 + t as i32).collect()
    }

    #[test]
    fn builds_well_formed_panel() {
        let p = Panel::new(
            vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]],
            vec!["a".into(), "b".into()],
            vec![1901, 1902, 1903],
        )
        .unwrap();
        assert_eq!(p.n_series(), 2);
        assert_eq!(p.len(), 3);
        assert_eq!(p.get(1, 2), 5.0);
        assert_eq!(p.label(3), 1903);
    }

    #[test]
    fn rejects_ragged_rows() {
        let err = Panel::from_rows(vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0, 4.0]]).unwrap_err();
        assert!(matches!(err, Error::RaggedPanel { series: 1, .. }));
    }

    #[test]
    fn rejects_non_finite() {
        let err = Panel::from_rows(vec![vec![1.0, f64::NAN, 3.0]]).unwrap_err();
        assert_eq!(err, Error::NonFinite { series: 0, position: 2 });
        let err = Panel::from_rows(vec![vec![1.0, f64::INFINITY]]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn rejects_empty_and_short() {
        assert!(matches!(Panel::from_rows(vec![]), Err(Error::EmptyPanel(_))));
        assert!(matches!(Panel::from_rows(vec![vec![1.0]]), Err(Error::EmptyPanel(_))));
    }

    #[test]
    fn rejects_unordered_time() {
        let err = Panel::new(vec![vec![1.0, 2.0, 3.0]], vec!["a".into()], vec![3, 2, 4]).unwrap_err();
        assert_eq!(err, Error::UnorderedTimeIndex(2));
    }

    #[test]
    fn slice_ranges() {
        let rows = vec![(0..10).map(f64::from).collect::<Vec<_>>()];
        let p = Panel::new(rows, vec!["x".into()], years(10)).unwrap();
        assert_eq!(p.slice(1, 10).unwrap(), p);
        let sub = p.slice(3, 7).unwrap();
        assert_eq!(sub.len(), 5);
        assert_eq!(sub.series(0), &[2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(sub.time_index()[0], 1903);
        assert!(matches!(p.slice(7, 3), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(p.slice(0, 3), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(p.slice(3, 11), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = Panel::from_rows(vec![vec![1.0, 2.0]]).unwrap();
        let b = Panel::from_rows(vec![vec![1.0, 2.0000001]]).unwrap();
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }

    proptest! {
        #[test]
        fn slice_column_identity(
            rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 12), 1..5),
            s in 1usize..12,
            len in 1usize..12,
        ) {
            let e = (s + len).min(12);
            prop_assume!(s < e);
            let p = Panel::from_rows(rows).unwrap();
            let sub = p.slice(s, e).unwrap();
            prop_assert_eq!(sub.len(), e - s + 1);
            for j in 0..p.n_series() {
                for k in 1..=sub.len() {
                    prop_assert_eq!(sub.get(j, k), p.get(j, s + k - 1));
                }
            }
        }
    }
}
