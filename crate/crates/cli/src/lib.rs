// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command implementations behind the `eras` binary.
//!
//! Exit codes: 0 success, 2 usage, 3 ingest or malformed document,
//! 4 numeric or configuration, 5 I/O.

#![forbid(unsafe_code)]

pub mod args;
pub mod plot;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use eras::pipeline::{analyze, analyze_with_thresholds, calibrate, ThresholdMethod};
use eras::BootstrapOptions;

use args::{bootstrap_params, check, CommonArgs, DetectArgs, PlotArgs, ThresholdArg};
use report::{
    build_panels, summary, PanelResult, PanelThresholds, ResultDoc, RunConfig, ThresholdDoc,
    RESULT_FORMAT, THRESHOLD_FORMAT,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Ingest(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
    #[error("malformed result: {0}")]
    MalformedResult(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Ingest(_) | CliError::MalformedResult(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Io(_) => 5,
        }
    }

    /// Wraps a library error, naming the stage it came from.
    fn from_lib(stage: &str, e: eras::Error) -> Self {
        let msg = format!("{stage}: {e}");
        match e {
            eras::Error::Io(_) => CliError::Io(msg),
            e if e.is_ingest() => CliError::Ingest(msg),
            _ => CliError::Numeric(msg),
        }
    }

    /// Anything that goes wrong while turning input files into panels.
    fn ingest(e: eras::Error) -> Self {
        match e {
            eras::Error::Io(_) => CliError::Io(format!("ingest: {e}")),
            e => CliError::Ingest(format!("ingest: {e}")),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn run_config(args: &CommonArgs) -> RunConfig {
    let threshold = match args.threshold {
        ThresholdArg::Fixed(constant) => ThresholdMethod::Fixed { constant },
        ThresholdArg::Bootstrap => {
            let (alpha, n_reps) = bootstrap_params(args);
            ThresholdMethod::Bootstrap(BootstrapOptions {
                n_reps,
                alpha,
                n_factors: args.factors,
                seed: args.seed.unwrap_or_default(),
            })
        }
    };
    RunConfig {
        input: args.input.display().to_string(),
        recipe: args.recipe.clone(),
        phi: args.phi,
        min_seg: args.min_seg,
        scales: args.scales.parse::<eras::WaveletScaleSet>().map(|s| s.scales()).unwrap_or_default(),
        variance: !args.mean_only,
        threshold,
        franchise_map: args.franchise_map.as_ref().map(|p| p.display().to_string()),
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes next to the target and renames, so readers never see a partial file.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numeric(format!("serialize: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> std::result::Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::MalformedResult(format!("{}: {e}", path.display())))
}

fn load_thresholds(path: &Path) -> Result<ThresholdDoc> {
    let doc: ThresholdDoc = read_json(path).map_err(|e| match e {
        CliError::MalformedResult(m) => CliError::Ingest(format!("threshold file: {m}")),
        other => other,
    })?;
    if doc.format != THRESHOLD_FORMAT {
        return Err(CliError::Ingest(format!(
            "threshold file: format {:?}, expected {THRESHOLD_FORMAT:?}",
            doc.format
        )));
    }
    Ok(doc)
}

/// Runs detection and writes `result.json` (plus figures with `--plots`).
/// Returns the path written and a one-line-per-panel summary.
pub fn run_detect(args: &DetectArgs) -> Result<(PathBuf, String)> {
    let common = &args.common;
    check(common, args.threshold_file.is_some()).map_err(CliError::Usage)?;
    let mut config = run_config(common);
    let saved = match &args.threshold_file {
        Some(path) => {
            let doc = load_thresholds(path)?;
            if !doc.config.same_problem(&config) {
                return Err(CliError::Usage(format!(
                    "{} was calibrated for a different input or settings",
                    path.display()
                )));
            }
            config.threshold = doc.config.threshold;
            Some(doc)
        }
        None => None,
    };
    let analysis_config = config.analysis().map_err(|e| CliError::from_lib("config", e))?;
    let panels = build_panels(&config).map_err(CliError::ingest)?;

    let mut results = Vec::with_capacity(panels.len());
    for named in panels {
        let fingerprint = named.panel.fingerprint();
        let analysis = match &saved {
            Some(doc) => {
                let entry = doc.panels.iter().find(|p| p.name == named.name).ok_or_else(|| {
                    CliError::Usage(format!("threshold file has no entry for panel {}", named.name))
                })?;
                if entry.fingerprint != fingerprint {
                    return Err(CliError::Usage(format!(
                        "threshold file was calibrated on different data for panel {}",
                        named.name
                    )));
                }
                analyze_with_thresholds(&named.panel, &analysis_config, &entry.thresholds)
            }
            None => analyze(&named.panel, &analysis_config),
        }
        .map_err(|e| CliError::from_lib(&format!("detect {}", named.name), e))?;
        results.push(PanelResult {
            name: named.name,
            title: named.title,
            fingerprint,
            thresholds: analysis.thresholds,
            mean: analysis.mean,
            variance: analysis.variance,
            panel: named.panel,
        });
    }
    let doc = ResultDoc {
        format: RESULT_FORMAT.into(),
        config,
        threshold_file: args.threshold_file.as_ref().map(|p| p.display().to_string()),
        panels: results,
    };
    let path = common.out.join("result.json");
    write_json(&path, &doc)?;
    if args.plots {
        write_plots(&doc, &common.out)?;
    }
    Ok((path, summary(&doc)))
}

/// Calibrates thresholds only and writes `thresholds.json`.
pub fn run_calibrate(args: &CommonArgs) -> Result<PathBuf> {
    check(args, false).map_err(CliError::Usage)?;
    let config = run_config(args);
    let analysis_config = config.analysis().map_err(|e| CliError::from_lib("config", e))?;
    let panels = build_panels(&config).map_err(CliError::ingest)?;
    let mut out = Vec::with_capacity(panels.len());
    for named in panels {
        let thresholds = calibrate(&named.panel, &analysis_config)
            .map_err(|e| CliError::from_lib(&format!("calibrate {}", named.name), e))?;
        out.push(PanelThresholds {
            fingerprint: named.panel.fingerprint(),
            name: named.name,
            thresholds,
        });
    }
    let doc = ThresholdDoc {
        format: THRESHOLD_FORMAT.into(),
        config,
        panels: out,
    };
    let path = args.out.join("thresholds.json");
    write_json(&path, &doc)?;
    Ok(path)
}

/// Checks that a result document is internally consistent before drawing it.
pub fn validate_result(doc: &ResultDoc) -> Result<()> {
    let bad = |m: String| Err(CliError::MalformedResult(m));
    if doc.format != RESULT_FORMAT {
        return bad(format!("format {:?}, expected {RESULT_FORMAT:?}", doc.format));
    }
    for p in &doc.panels {
        if p.panel.fingerprint() != p.fingerprint {
            return bad(format!("panel {} does not match its fingerprint", p.name));
        }
        let t = p.panel.len();
        for r in std::iter::once(&p.mean).chain(p.variance.as_ref()) {
            for c in &r.change_points {
                if c.index == 0 || c.index >= t || p.panel.label(c.index) != c.time_label {
                    return bad(format!("panel {}: change point {} out of place", p.name, c.time_label));
                }
            }
        }
    }
    Ok(())
}

fn write_plots(doc: &ResultDoc, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (name, svg) in plot::render(doc) {
        let safe: String = name
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
            .collect();
        let path = dir.join(safe);
        write_atomic(&path, svg.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

/// Renders figures for an existing result document.
pub fn run_plot(args: &PlotArgs) -> Result<Vec<PathBuf>> {
    let doc: ResultDoc = read_json(&args.result)?;
    validate_result(&doc)?;
    let dir = match &args.out {
        Some(d) => d.clone(),
        None => args
            .result
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    write_plots(&doc, &dir)
}
