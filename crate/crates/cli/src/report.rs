// SPDX-License-Identifier: MIT OR Apache-2.0

//! Result and threshold documents, and the panels they describe.

use std::path::Path;

use serde::{Deserialize, Serialize};

use eras::baseball::{
    build_league_panel, build_stat_panel, build_team_panel, load_teams_csv_with, load_wide_csv,
    FranchiseMap, PanelRecipe, TEAM_STATS,
};
use eras::cusum::ScaleMethod;
use eras::pipeline::{AnalysisConfig, ThresholdMethod, Thresholds};
use eras::{DcConfig, DetectionResult, Error, Panel, WaveletScaleSet};

use crate::args::Recipe;

pub const RESULT_FORMAT: &str = "eras-result/1";
pub const THRESHOLD_FORMAT: &str = "eras-thresholds/1";

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: String,
    pub recipe: Recipe,
    pub phi: f64,
    pub min_seg: usize,
    pub scales: Vec<i32>,
    pub variance: bool,
    pub threshold: ThresholdMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub franchise_map: Option<String>,
}

impl RunConfig {
    pub fn analysis(&self) -> Result<AnalysisConfig, Error> {
        let scales: WaveletScaleSet = self
            .scales
            .iter()
            .map(i32::to_string)
            .collect::<Vec<_>>()
            .join(",")
            .parse()?;
        Ok(AnalysisConfig {
            dc: DcConfig {
                phi: self.phi,
                scale: ScaleMethod::default(),
            },
            min_seg: self.min_seg,
            threshold: self.threshold,
            scales,
            variance_scale: ScaleMethod::SdDiff,
            variance: self.variance,
        })
    }

    /// Settings that must agree between a threshold file and a detect run.
    pub fn same_problem(&self, other: &RunConfig) -> bool {
        self.input == other.input
            && self.recipe == other.recipe
            && self.phi == other.phi
            && self.min_seg == other.min_seg
            && self.scales == other.scales
            && self.variance == other.variance
            && self.franchise_map == other.franchise_map
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelResult {
    pub name: String,
    pub title: String,
    pub fingerprint: String,
    pub thresholds: Thresholds,
    pub mean: DetectionResult,
    pub variance: Option<DetectionResult>,
    pub panel: Panel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDoc {
    pub format: String,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_file: Option<String>,
    pub panels: Vec<PanelResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelThresholds {
    pub name: String,
    pub fingerprint: String,
    pub thresholds: Thresholds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdDoc {
    pub format: String,
    pub config: RunConfig,
    pub panels: Vec<PanelThresholds>,
}

pub struct NamedPanel {
    pub name: String,
    pub title: String,
    pub panel: Panel,
}

/// Loads the input and builds the panels the recipe asks for.
pub fn build_panels(config: &RunConfig) -> Result<Vec<NamedPanel>, Error> {
    let input = Path::new(&config.input);
    if config.recipe == Recipe::Generic {
        let panel = load_wide_csv(input)?;
        let title = input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "generic".into());
        return Ok(vec![NamedPanel {
            name: "generic".into(),
            title,
            panel,
        }]);
    }
    let map = match &config.franchise_map {
        Some(p) => FranchiseMap::from_path(Path::new(p))?,
        None => FranchiseMap::builtin(),
    };
    let rows = load_teams_csv_with(input, &map)?;
    let one = |name: String, title: String, panel| vec![NamedPanel { name, title, panel }];
    match &config.recipe {
        Recipe::League => Ok(one(
            "league".into(),
            "League averages per game".into(),
            build_league_panel(&rows, &PanelRecipe::league())?,
        )),
        Recipe::Stat(stat) => Ok(one(
            format!("stat-{}", stat.column()),
            format!("{stat} per game by franchise"),
            build_stat_panel(&rows, *stat, &PanelRecipe::per_statistic(*stat))?,
        )),
        Recipe::Team(query) => {
            let f = map
                .find(query)
                .ok_or_else(|| Error::UnknownFranchise(query.clone()))?;
            Ok(one(
                format!("team-{}", f.label),
                f.modern_name.clone(),
                build_team_panel(&rows, &f.canonical_id, &TEAM_STATS, config.min_seg)?,
            ))
        }
        Recipe::AllTeams => {
            let mut out = Vec::new();
            for f in map.franchises().into_iter().filter(|f| f.active) {
                match build_team_panel(&rows, &f.canonical_id, &TEAM_STATS, config.min_seg) {
                    Ok(panel) => out.push(NamedPanel {
                        name: format!("team-{}", f.label),
                        title: f.modern_name.clone(),
                        panel,
                    }),
                    Err(Error::FranchiseTooShort { .. }) => {
                        log::warn!("skipping {}: too few seasons", f.label)
                    }
                    Err(e) => return Err(e),
                }
            }
            out.sort_by(|a, b| a.title.cmp(&b.title));
            Ok(out)
        }
        Recipe::Generic => unreachable!("handled above"),
    }
}

fn years(r: &DetectionResult) -> String {
    if r.change_points.is_empty() {
        return "none".into();
    }
    r.labels()
        .iter()
        .map(i32::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// One line per panel for the terminal.
pub fn summary(doc: &ResultDoc) -> String {
    let mut out = String::new();
    for p in &doc.panels {
        out.push_str(&format!("{:<24} mean: {}", p.name, years(&p.mean)));
        if let Some(v) = &p.variance {
            out.push_str(&format!("  variance: {}", years(v)));
        }
        out.push('\n');
    }
    out
}
