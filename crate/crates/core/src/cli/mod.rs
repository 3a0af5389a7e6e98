//! Command-line front end: scenario configuration, figure presets, runs and
//! CSV/JSON export. The `suslov-hk` binary is a thin wrapper over [`run`].

mod config;
mod output;
mod run;

use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::SuslovError;

pub use config::{
    figure_preset, preset, FigurePreset, Mode, OutputFormat, RawConfig, ScenarioConfig,
    FIGURE_PRESETS, FIGURE_STEPS, PRESET_OMEGA0,
};
pub use output::{Cell, Table};
pub use run::{
    audit_conservation, compare_closedform, convergence_study, execute, relative_drift, run,
    sidecar_path, simn_columns, Execution, OrderSummary, RunSummary, CLOSEDFORM_COLUMNS,
    CONVERGENCE_COLUMNS, CONVERGENCE_HORIZON, REFERENCE_REFINEMENT, SIM3_COLUMNS,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown figure {0}; presets exist for figures 1 to 4")]
    UnknownFigure(i64),
    #[error(transparent)]
    Model(SuslovError),
    #[error("run stopped at a pole after {} steps: {source}", summary.steps_completed)]
    PoleAbort {
        summary: Box<RunSummary>,
        source: SuslovError,
    },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for configuration problems, 3 for a pole mid-run, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::UnknownFigure(_) | CliError::Model(_) => 2,
            CliError::PoleAbort { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }
}

/// Output path for figure `k` when all four figures go to one base path:
/// `traj.csv` becomes `traj_fig1.csv`.
pub fn figure_output_path(base: &Path, figure: u8) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}_fig{figure}.{}", ext.to_string_lossy()),
        None => format!("{stem}_fig{figure}"),
    };
    base.with_file_name(name)
}

/// Run every figure preset, writing one output per figure.
pub fn run_all_figures(raw: &RawConfig) -> Result<Vec<RunSummary>, CliError> {
    let base = raw
        .get("out")
        .map(PathBuf::from)
        .ok_or_else(|| CliError::Config("figures without --figure needs --out".into()))?;
    FIGURE_PRESETS
        .iter()
        .map(|p| {
            let mut per = raw.clone();
            per.set("figure", p.id.to_string())?;
            per.set(
                "out",
                figure_output_path(&base, p.id)
                    .to_string_lossy()
                    .into_owned(),
            )?;
            run(&per.into_config()?)
        })
        .collect()
}
