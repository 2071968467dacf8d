//! Campaign artifacts: CSV table, JSON manifest and SVG plot.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::experiments::{Campaign, PointTiming};
use crate::plot::{self, PlotError};

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("plot: {0}")]
    Plot(#[from] PlotError),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> OutputError + '_ {
    move |source| OutputError::Io { path: path.to_path_buf(), source }
}

/// The campaign table, one row per algorithm and sweep point.
pub fn campaign_csv(campaign: &Campaign) -> Result<String, OutputError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &campaign.rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| OutputError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("CSV is UTF-8"))
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: &'static str,
    pub command: Vec<String>,
    pub seed: u64,
    pub workers: usize,
    pub csv: String,
    pub svg: String,
    pub rows: usize,
    pub node_limit_trials: usize,
    pub timings: &'a [PointTiming],
    pub notes: Vec<String>,
    /// Full configuration after command-line overrides; running the same
    /// experiment with it reproduces the CSV.
    pub config: &'a RunConfig,
}

pub struct Written {
    pub csv: PathBuf,
    pub svg: PathBuf,
    pub manifest: PathBuf,
}

fn notes(config: &RunConfig, campaign: &Campaign) -> Vec<String> {
    let mut out = Vec::new();
    let trials = config.experiment.trials;
    if campaign.experiment.id() == "fig4" {
        for g in &config.experiment.fig4.grids {
            if let Some(t) = g.trials.filter(|t| *t < trials) {
                out.push(format!(
                    "grid {}x{} runs {t} trials instead of {trials}; finer grids dominate the runtime (see timings)",
                    g.cols, g.rows
                ));
            }
        }
    }
    let limited = campaign.node_limit_trials();
    if limited > 0 {
        out.push(format!(
            "{limited} algorithm evaluations stopped at the node limit of {} and report their best assignment",
            config.solver.node_limit
        ));
    }
    out
}

/// Writes `<id>.csv`, `<id>.svg` and `<id>.manifest.json` under `dir`.
pub fn write_campaign(
    dir: &Path,
    config: &RunConfig,
    campaign: &Campaign,
    command: Vec<String>,
    workers: usize,
) -> Result<Written, OutputError> {
    let id = campaign.experiment.id();
    let csv_text = campaign_csv(campaign)?;
    let svg_text = plot::render(&csv_text)?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv = dir.join(format!("{id}.csv"));
    let svg = dir.join(format!("{id}.svg"));
    let manifest = dir.join(format!("{id}.manifest.json"));
    fs::write(&csv, &csv_text).map_err(io_err(&csv))?;
    fs::write(&svg, &svg_text).map_err(io_err(&svg))?;
    let m = Manifest {
        tool: "oris",
        version: env!("CARGO_PKG_VERSION"),
        experiment: id,
        command,
        seed: config.seed,
        workers,
        csv: format!("{id}.csv"),
        svg: format!("{id}.svg"),
        rows: campaign.rows.len(),
        node_limit_trials: campaign.node_limit_trials(),
        timings: &campaign.timings,
        notes: notes(config, campaign),
        config,
    };
    let mut text = serde_json::to_string_pretty(&m).expect("manifest serializes");
    text.push('\n');
    fs::write(&manifest, text).map_err(io_err(&manifest))?;
    Ok(Written { csv, svg, manifest })
}

/// Renders an existing CSV to SVG; nothing is written on failure.
pub fn plot_file(csv_path: &Path, svg_path: &Path) -> Result<(), OutputError> {
    let text = fs::read_to_string(csv_path).map_err(io_err(csv_path))?;
    let svg = plot::render(&text)?;
    fs::write(svg_path, svg).map_err(io_err(svg_path))
}
