// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use eras::baseball::Stat;
use eras::threshold::{DEFAULT_ALPHA, DEFAULT_REPS, MIN_REPS};

#[derive(Debug, Parser)]
#[command(name = "eras", version, about = "Mean and variance change points in panel time series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run mean and variance detection and write result.json.
    Detect(DetectArgs),
    /// Calibrate thresholds only and write thresholds.json.
    Calibrate(CommonArgs),
    /// Render SVG figures from a result document.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Lahman Teams.csv, or a wide CSV for the generic recipe.
    #[arg(long)]
    pub input: PathBuf,
    /// league | stat:<name> | team:<franchise> | team:all | generic
    #[arg(long, default_value = "generic")]
    pub recipe: Recipe,
    #[arg(long, default_value_t = 0.5)]
    pub phi: f64,
    #[arg(long, default_value_t = 5)]
    pub min_seg: usize,
    /// bootstrap | fixed:<C>
    #[arg(long, default_value = "bootstrap")]
    pub threshold: ThresholdArg,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub boot_reps: Option<usize>,
    /// Number of factors in the bootstrap model (default: eigenvalue ratio).
    #[arg(long)]
    pub factors: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Wavelet scales, `J` or a list like `-1,-2`.
    #[arg(long, default_value = "-1,-2", allow_hyphen_values = true)]
    pub scales: String,
    /// Skip the variance pass.
    #[arg(long)]
    pub mean_only: bool,
    /// Custom franchise map CSV.
    #[arg(long)]
    pub franchise_map: Option<PathBuf>,
    #[arg(long, default_value = "eras-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also write SVG figures next to the result.
    #[arg(long)]
    pub plots: bool,
    /// Reuse thresholds written by `calibrate`.
    #[arg(long)]
    pub threshold_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// A result.json written by `detect`.
    pub result: PathBuf,
    /// Output directory (default: the result's directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Recipe {
    League,
    Stat(Stat),
    Team(String),
    AllTeams,
    Generic,
}

impl FromStr for Recipe {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "league" => Ok(Recipe::League),
            None if s == "generic" => Ok(Recipe::Generic),
            Some(("stat", name)) => name.parse().map(Recipe::Stat).map_err(|e| e.to_string()),
            Some(("team", "all")) => Ok(Recipe::AllTeams),
            Some(("team", f)) if !f.is_empty() => Ok(Recipe::Team(f.to_ascii_uppercase())),
            _ => Err(format!(
                "unknown recipe {s:?} (league, stat:<name>, team:<franchise>, team:all, generic)"
            )),
        }
    }
}

impl std::fmt::Display for Recipe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Recipe::League => f.write_str("league"),
            Recipe::Stat(s) => write!(f, "stat:{s}"),
            Recipe::Team(t) => write!(f, "team:{t}"),
            Recipe::AllTeams => f.write_str("team:all"),
            Recipe::Generic => f.write_str("generic"),
        }
    }
}

impl From<Recipe> for String {
    fn from(r: Recipe) -> String {
        r.to_string()
    }
}

impl TryFrom<String> for Recipe {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdArg {
    Bootstrap,
    Fixed(f64),
}

impl FromStr for ThresholdArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "bootstrap" {
            return Ok(ThresholdArg::Bootstrap);
        }
        let c = s
            .strip_prefix("fixed:")
            .ok_or_else(|| format!("expected bootstrap or fixed:<C>, got {s:?}"))?;
        let c: f64 = c.parse().map_err(|_| format!("bad constant in {s:?}"))?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(format!("fixed threshold constant must be positive, got {c}"));
        }
        Ok(ThresholdArg::Fixed(c))
    }
}

/// Bootstrap parameters with defaults filled in.
pub fn bootstrap_params(args: &CommonArgs) -> (f64, usize) {
    (
        args.alpha.unwrap_or(DEFAULT_ALPHA),
        args.boot_reps.unwrap_or(DEFAULT_REPS),
    )
}

/// Flag checks that need more than one flag or a domain test; all run
/// before any input is read.
pub fn check(args: &CommonArgs, threshold_file: bool) -> Result<(), String> {
    if !(0.0..=1.0).contains(&args.phi) {
        return Err(format!("--phi {} outside [0, 1]", args.phi));
    }
    if args.min_seg < 2 {
        return Err(format!("--min-seg {} must be at least 2", args.min_seg));
    }
    if let Some(a) = args.alpha {
        if !(a > 0.0 && a < 1.0) {
            return Err(format!("--alpha {a} outside (0, 1)"));
        }
    }
    if let Some(r) = args.boot_reps {
        if r < MIN_REPS {
            return Err(format!("--boot-reps {r} below the minimum of {MIN_REPS}"));
        }
    }
    if args.factors == Some(0) {
        return Err("--factors must be positive; omit it for automatic selection".into());
    }
    args.scales
        .parse::<eras::WaveletScaleSet>()
        .map_err(|e| format!("--scales: {e}"))?;
    let bootstrap_flags = args.alpha.is_some()
        || args.boot_reps.is_some()
        || args.factors.is_some()
        || args.seed.is_some();
    if threshold_file {
        if bootstrap_flags || args.threshold != ThresholdArg::Bootstrap {
            return Err("--threshold-file cannot be combined with threshold flags".into());
        }
        return Ok(());
    }
    match args.threshold {
        ThresholdArg::Bootstrap if args.seed.is_none() => {
            Err("--seed is required for bootstrap thresholds".into())
        }
        ThresholdArg::Fixed(_) if bootstrap_flags => {
            Err("--alpha, --boot-reps, --factors and --seed only apply to bootstrap thresholds".into())
        }
        _ => Ok(()),
    }
}
