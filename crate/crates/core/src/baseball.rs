// SPDX-License-Identifier: MIT OR Apache-2.0

//! Lahman-style seasonal team tables and the panels built from them.
//!
//! Rows are keyed by a canonical franchise id so that relocations and renames
//! collapse into one franchise. The mapping ships as a CSV lookup table.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::Panel;
use crate::preprocess::{impute_linear, mean, season_zscore, series_zscore, RawSeries};

const BUILTIN_FRANCHISE_MAP: &str = include_str!("../data/franchise_map.csv");

/// Franchises of the per-statistic panels, in row order.
pub const STAT_PANEL_FRANCHISES: [&str; 16] = [
    "ATL", "BAL", "BOS", "CHC", "CHW", "CIN", "CLE", "DET", "LAD", "MIN", "NYY", "OAK", "PHI",
    "PIT", "SFG", "STL",
];

pub const LEAGUE_STATS: [Stat; 4] = [Stat::HR, Stat::SO, Stat::BB, Stat::SB];

pub const TEAM_STATS: [Stat; 10] = [
    Stat::R,
    Stat::H,
    Stat::HR,
    Stat::BB,
    Stat::SO,
    Stat::RA,
    Stat::HA,
    Stat::HRA,
    Stat::BBA,
    Stat::SOA,
];

pub const FIRST_MODERN_YEAR: i32 = 1900;
pub const LAST_YEAR: i32 = 2020;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Franchise {
    pub canonical_id: String,
    /// Short label used in reports (e.g. `WAS`).
    pub label: String,
    pub modern_name: String,
    pub active: bool,
}

/// Historical franchise id to canonical franchise.
#[derive(Debug, Clone, PartialEq)]
pub struct FranchiseMap {
    entries: BTreeMap<String, Franchise>,
}

impl FranchiseMap {
    /// The table bundled with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_FRANCHISE_MAP.as_bytes()).expect("bundled franchise map is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse(std::fs::File::open(path)?)
    }

    /// Columns `historical_id,canonical_id,label,modern_name,active` (`Y`/`N`).
    pub fn parse<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut entries = BTreeMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                row,
                column: String::new(),
                reason: e.to_string(),
            })?;
            if rec.len() != 5 {
                return Err(Error::Parse {
                    row,
                    column: String::new(),
                    reason: format!("expected 5 fields, found {}", rec.len()),
                });
            }
            let active = match &rec[4] {
                "Y" => true,
                "N" => false,
                other => {
                    return Err(Error::Parse {
                        row,
                        column: "active".into(),
                        reason: format!("expected Y or N, found {other:?}"),
                    })
                }
            };
            entries.insert(
                rec[0].to_string(),
                Franchise {
                    canonical_id: rec[1].to_string(),
                    label: rec[2].to_string(),
                    modern_name: rec[3].to_string(),
                    active,
                },
            );
        }
        Ok(Self { entries })
    }

    pub fn resolve(&self, historical_id: &str) -> Option<&Franchise> {
        self.entries.get(historical_id)
    }

    /// Looks up a franchise by report label, then canonical id, then
    /// historical id. Case-insensitive.
    pub fn find(&self, query: &str) -> Option<&Franchise> {
        let q = query.to_ascii_uppercase();
        let values = || self.entries.values();
        values()
            .find(|f| f.active && f.label == q)
            .or_else(|| values().find(|f| f.label == q))
            .or_else(|| values().find(|f| f.canonical_id == q))
            .or_else(|| self.entries.get(&q))
    }

    /// Distinct canonical franchises, sorted by canonical id.
    pub fn franchises(&self) -> Vec<&Franchise> {
        let mut seen = BTreeMap::new();
        for f in self.entries.values() {
            seen.entry(&f.canonical_id).or_insert(f);
        }
        seen.into_values().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stat {
    G,
    R,
    H,
    HR,
    BB,
    /// Batter strikeouts.
    SO,
    SB,
    AB,
    RA,
    HA,
    HRA,
    BBA,
    /// Strikeouts by the team's pitchers.
    SOA,
    Attendance,
}

impl Stat {
    pub const ALL: [Stat; 14] = [
        Stat::G,
        Stat::R,
        Stat::H,
        Stat::HR,
        Stat::BB,
        Stat::SO,
        Stat::SB,
        Stat::AB,
        Stat::RA,
        Stat::HA,
        Stat::HRA,
        Stat::BBA,
        Stat::SOA,
        Stat::Attendance,
    ];

    /// Column name in the Lahman `Teams` table.
    pub fn column(self) -> &'static str {
        match self {
            Stat::G => "G",
            Stat::R => "R",
            Stat::H => "H",
            Stat::HR => "HR",
            Stat::BB => "BB",
            Stat::SO => "SO",
            Stat::SB => "SB",
            Stat::AB => "AB",
            Stat::RA => "RA",
            Stat::HA => "HA",
            Stat::HRA => "HRA",
            Stat::BBA => "BBA",
            Stat::SOA => "SOA",
            Stat::Attendance => "attendance",
        }
    }
}

impl std::fmt::Display for Stat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.column())
    }
}

impl std::str::FromStr for Stat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let stat = match lower.as_str() {
            "k" | "strikeouts" => Stat::SO,
            "att" | "attendance" => Stat::Attendance,
            "walks" => Stat::BB,
            "runs" => Stat::R,
            "hits" => Stat::H,
            "home_runs" | "homeruns" => Stat::HR,
            "stolen_bases" | "steals" => Stat::SB,
            _ => *Stat::ALL
                .iter()
                .find(|st| st.column().eq_ignore_ascii_case(s))
                .ok_or_else(|| Error::Config(format!("unknown statistic {s:?}")))?,
        };
        Ok(stat)
    }
}

/// One team-season. Counts other than `G` may be missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamSeason {
    pub year: i32,
    /// Canonical franchise id.
    pub franchise: String,
    pub team_id: String,
    pub g: u32,
    pub r: Option<f64>,
    pub h: Option<f64>,
    pub hr: Option<f64>,
    pub bb: Option<f64>,
    pub so: Option<f64>,
    pub sb: Option<f64>,
    pub ab: Option<f64>,
    pub ra: Option<f64>,
    pub ha: Option<f64>,
    pub hra: Option<f64>,
    pub bba: Option<f64>,
    pub soa: Option<f64>,
    pub attendance: Option<f64>,
}

impl TeamSeason {
    pub fn get(&self, stat: Stat) -> Option<f64> {
        match stat {
            Stat::G => Some(f64::from(self.g)),
            Stat::R => self.r,
            Stat::H => self.h,
            Stat::HR => self.hr,
            Stat::BB => self.bb,
            Stat::SO => self.so,
            Stat::SB => self.sb,
            Stat::AB => self.ab,
            Stat::RA => self.ra,
            Stat::HA => self.ha,
            Stat::HRA => self.hra,
            Stat::BBA => self.bba,
            Stat::SOA => self.soa,
            Stat::Attendance => self.attendance,
        }
    }

    /// Per-game rate of `stat`.
    pub fn rate(&self, stat: Stat) -> Option<f64> {
        self.get(stat).map(|v| v / f64::from(self.g))
    }
}

pub fn load_teams_csv(path: &Path) -> Result<Vec<TeamSeason>> {
    load_teams_csv_with(path, &FranchiseMap::builtin())
}

pub fn load_teams_csv_with(path: &Path, map: &FranchiseMap) -> Result<Vec<TeamSeason>> {
    parse_teams_csv(std::fs::File::open(path)?, map)
}

/// Parses a `Teams` table. Extra columns are ignored; `teamID` is optional.
/// Row numbers in errors count the header as row 1.
pub fn parse_teams_csv<R: Read>(reader: R, map: &FranchiseMap) -> Result<Vec<TeamSeason>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            row: 1,
            column: String::new(),
            reason: e.to_string(),
        })?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let required = |name: &str| {
        column(name).ok_or_else(|| Error::Parse {
            row: 1,
            column: name.to_string(),
            reason: "missing column".into(),
        })
    };
    let year_col = required("yearID")?;
    let franch_col = required("franchID")?;
    let team_col = column("teamID");
    let mut stat_cols = Vec::with_capacity(Stat::ALL.len());
    for stat in Stat::ALL {
        stat_cols.push(required(stat.column())?);
    }

    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            row,
            column: String::new(),
            reason: e.to_string(),
        })?;
        let cell = |c: usize| rec.get(c).map(str::trim).unwrap_or("");
        let bad = |name: &str, reason: String| Error::Parse {
            row,
            column: name.to_string(),
            reason,
        };
        let year: i32 = cell(year_col)
            .parse()
            .map_err(|_| bad("yearID", format!("not a year: {:?}", cell(year_col))))?;
        let historical = cell(franch_col);
        let franchise = map
            .resolve(historical)
            .ok_or_else(|| Error::UnknownFranchise(historical.to_string()))?
            .canonical_id
            .clone();
        let mut values = [None; 14];
        for (k, (&stat, &c)) in Stat::ALL.iter().zip(&stat_cols).enumerate() {
            let text = cell(c);
            if text.is_empty() {
                continue;
            }
            let v: f64 = text
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| bad(stat.column(), format!("not a count: {text:?}")))?;
            values[k] = Some(v);
        }
        let g = match values[0] {
            None => return Err(bad("G", "games played is required".into())),
            Some(g) if g.fract() != 0.0 || g > f64::from(u32::MAX) => {
                return Err(bad("G", format!("not a whole number of games: {g}")))
            }
            Some(g) if g == 0.0 => return Err(Error::ZeroGames(year)),
            Some(g) => g as u32,
        };
        out.push(TeamSeason {
            year,
            franchise,
            team_id: team_col.map(|c| cell(c).to_string()).unwrap_or_default(),
            g,
            r: values[1],
            h: values[2],
            hr: values[3],
            bb: values[4],
            so: values[5],
            sb: values[6],
            ab: values[7],
            ra: values[8],
            ha: values[9],
            hra: values[10],
            bba: values[11],
            soa: values[12],
            attendance: values[13],
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecipeKind {
    LeagueAggregate,
    PerStatistic,
    PerTeam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRecipe {
    pub kind: RecipeKind,
    /// Inclusive year range; `None` means every season present.
    pub years: Option<(i32, i32)>,
    pub stats: Vec<Stat>,
    pub franchises: Vec<String>,
    /// Per-statistic panels only: how many absent seasons a franchise may have
    /// filled by imputation before the panel is rejected.
    pub max_absent_years: usize,
}

impl PanelRecipe {
    /// HR, SO, BB and SB league averages per game, 1900-2020.
    pub fn league() -> Self {
        Self {
            kind: RecipeKind::LeagueAggregate,
            years: Some((FIRST_MODERN_YEAR, LAST_YEAR)),
            stats: LEAGUE_STATS.to_vec(),
            franchises: Vec::new(),
            max_absent_years: 0,
        }
    }

    /// One statistic across the sixteen long-lived franchises, 1900-2020.
    ///
    /// The American League franchises have no 1900 season, so one absent
    /// season per franchise is imputed by default.
    pub fn per_statistic(stat: Stat) -> Self {
        Self {
            kind: RecipeKind::PerStatistic,
            years: Some((FIRST_MODERN_YEAR, LAST_YEAR)),
            stats: vec![stat],
            franchises: STAT_PANEL_FRANCHISES.iter().map(|s| s.to_string()).collect(),
            max_absent_years: 1,
        }
    }

    /// The ten team statistics over a franchise's whole existence.
    pub fn per_team(franchise: &str) -> Self {
        Self {
            kind: RecipeKind::PerTeam,
            years: None,
            stats: TEAM_STATS.to_vec(),
            franchises: vec![franchise.to_string()],
            max_absent_years: 0,
        }
    }

    fn year_range(&self, rows: &[TeamSeason]) -> Result<(i32, i32)> {
        match self.years {
            Some((a, b)) if a <= b => Ok((a, b)),
            Some((a, b)) => Err(Error::Config(format!("empty year range {a}..={b}"))),
            None => {
                let lo = rows.iter().map(|r| r.year).min();
                let hi = rows.iter().map(|r| r.year).max();
                lo.zip(hi).ok_or_else(|| Error::EmptyPanel("no team seasons".into()))
            }
        }
    }
}

fn fill(years: Vec<i32>, values: Vec<Option<f64>>) -> Result<Vec<f64>> {
    let series = impute_linear(&RawSeries::new(years, values)?)?;
    Ok(series.complete().expect("imputation fills every value"))
}

/// League averages of per-game rates, one series per statistic, each
/// z-scored over the year range.
///
/// A year's average is the unweighted mean over teams with the statistic
/// recorded; a year where no team recorded it is imputed.
pub fn build_league_panel(rows: &[TeamSeason], recipe: &PanelRecipe) -> Result<Panel> {
    let (first, last) = recipe.year_range(rows)?;
    let years: Vec<i32> = (first..=last).collect();
    let present: BTreeSet<i32> = rows.iter().map(|r| r.year).collect();
    let missing: Vec<i32> = years.iter().copied().filter(|y| !present.contains(y)).collect();
    if !missing.is_empty() {
        return Err(Error::MissingYears(missing));
    }
    let mut by_year: BTreeMap<i32, Vec<&TeamSeason>> = BTreeMap::new();
    for r in rows.iter().filter(|r| (first..=last).contains(&r.year)) {
        by_year.entry(r.year).or_default().push(r);
    }
    let mut out = Vec::with_capacity(recipe.stats.len());
    for &stat in &recipe.stats {
        let values = by_year
            .values()
            .map(|teams| {
                let rates: Vec<f64> = teams.iter().filter_map(|t| t.rate(stat)).collect();
                (!rates.is_empty()).then(|| mean(&rates))
            })
            .collect();
        out.push(fill(years.clone(), values)?);
    }
    let ids = recipe.stats.iter().map(|s| s.to_string()).collect();
    series_zscore(&Panel::new(out, ids, years)?)
}

/// Per-game rates of one statistic, one row per recipe franchise, not
/// standardized. Missing cells are imputed per franchise.
pub fn build_stat_panel(rows: &[TeamSeason], stat: Stat, recipe: &PanelRecipe) -> Result<Panel> {
    let (first, last) = recipe.year_range(rows)?;
    let years: Vec<i32> = (first..=last).collect();
    let mut out = Vec::with_capacity(recipe.franchises.len());
    for franchise in &recipe.franchises {
        let seasons: BTreeMap<i32, &TeamSeason> = rows
            .iter()
            .filter(|r| &r.franchise == franchise && (first..=last).contains(&r.year))
            .map(|r| (r.year, r))
            .collect();
        let absent: Vec<i32> = years.iter().copied().filter(|y| !seasons.contains_key(y)).collect();
        if absent.len() > recipe.max_absent_years {
            return Err(Error::MissingFranchiseYear {
                franchise: franchise.clone(),
                years: absent,
            });
        }
        if !absent.is_empty() {
            log::info!("{franchise}: imputing absent seasons {absent:?}");
        }
        let values = years
            .iter()
            .map(|y| seasons.get(y).and_then(|r| r.rate(stat)))
            .collect();
        out.push(fill(years.clone(), values)?);
    }
    Panel::new(out, recipe.franchises.clone(), years)
}

/// Season z-scores of the team statistics for one franchise over every
/// season it played.
///
/// Peers are all teams with the statistic recorded that season. Seasons where
/// the franchise's own value is missing or the season cannot be standardized
/// are imputed from the franchise's other seasons.
pub fn build_team_panel(
    rows: &[TeamSeason],
    franchise: &str,
    stats: &[Stat],
    min_seg: usize,
) -> Result<Panel> {
    let own: BTreeMap<i32, &TeamSeason> = rows
        .iter()
        .filter(|r| r.franchise == franchise)
        .map(|r| (r.year, r))
        .collect();
    if own.len() < 2 * min_seg {
        return Err(Error::FranchiseTooShort {
            franchise: franchise.to_string(),
            seasons: own.len(),
            required: 2 * min_seg,
        });
    }
    let years: Vec<i32> = own.keys().copied().collect();
    let mut out = Vec::with_capacity(stats.len());
    for &stat in stats {
        let mut peers: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
        for r in rows.iter().filter(|r| own.contains_key(&r.year)) {
            if let Some(v) = r.rate(stat) {
                peers.entry(r.year).or_default().push(v);
            }
        }
        let values = years
            .iter()
            .map(|y| {
                let v = own[y].rate(stat)?;
                season_zscore(v, peers.get(y).map_or(&[][..], Vec::as_slice)).ok()
            })
            .collect();
        out.push(fill(years.clone(), values)?);
    }
    let ids = stats.iter().map(|s| s.to_string()).collect();
    Panel::new(out, ids, years)
}

/// Reads a wide CSV: a year column first, then one column per series.
/// Empty cells are missing and imputed per series.
pub fn load_wide_csv(path: &Path) -> Result<Panel> {
    parse_wide_csv(std::fs::File::open(path)?)
}

pub fn parse_wide_csv<R: Read>(reader: R) -> Result<Panel> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            row: 1,
            column: String::new(),
            reason: e.to_string(),
        })?
        .clone();
    if headers.len() < 2 {
        return Err(Error::Parse {
            row: 1,
            column: String::new(),
            reason: "need a time column and at least one series".into(),
        });
    }
    let ids: Vec<String> = headers.iter().skip(1).map(|h| h.trim().to_string()).collect();
    let mut years = Vec::new();
    let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::new(); ids.len()];
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            row,
            column: String::new(),
            reason: e.to_string(),
        })?;
        let year = rec[0].trim();
        years.push(year.parse::<i32>().map_err(|_| Error::Parse {
            row,
            column: headers[0].to_string(),
            reason: format!("not an integer time label: {year:?}"),
        })?);
        for (k, col) in cols.iter_mut().enumerate() {
            let text = rec.get(k + 1).map(str::trim).unwrap_or("");
            if text.is_empty() {
                col.push(None);
                continue;
            }
            let v: f64 = text.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                Error::Parse {
                    row,
                    column: ids[k].clone(),
                    reason: format!("not a number: {text:?}"),
                }
            })?;
            col.push(Some(v));
        }
    }
    if years.is_empty() {
        return Err(Error::EmptyPanel("no data rows".into()));
    }
    if let Some(i) = years.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::UnorderedTimeIndex(i + 1));
    }
    let rows = cols
        .into_iter()
        .map(|c| fill(years.clone(), c))
        .collect::<Result<Vec<_>>>()?;
    Panel::new(rows, ids, years)
}
