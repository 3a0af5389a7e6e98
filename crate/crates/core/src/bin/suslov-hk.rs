use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use suslov_hk::cli::{self, CliError, Mode, RawConfig, RunSummary};

/// Discrete Suslov problem: trajectories, conservation audits, closed-form
/// comparison and convergence studies.
#[derive(Debug, Parser)]
#[command(name = "suslov-hk", version)]
struct Args {
    /// sim3, simN, closedform, conserve, convergence or figures
    mode: String,
    /// Flat `key = value` config file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    /// I1,I2,I13,I23
    #[arg(long, allow_hyphen_values = true)]
    inertia: Option<String>,
    /// Third principal moment (not used by the reduced map)
    #[arg(long, allow_hyphen_values = true)]
    i3: Option<String>,
    /// Initial velocity, W1,W2 (or n-1 values for simN)
    #[arg(long, allow_hyphen_values = true)]
    omega0: Option<String>,
    /// Figure preset 1-4
    #[arg(long)]
    figure: Option<String>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// n-dimensional I_11,...,I_nn
    #[arg(long, allow_hyphen_values = true)]
    nd_diag: Option<String>,
    /// n-dimensional I_1n,...,I_{n-1,n}
    #[arg(long, allow_hyphen_values = true)]
    nd_off: Option<String>,
}

fn raw_config(args: &Args) -> Result<RawConfig, CliError> {
    let mut raw = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::new(),
    };
    let mut flags = RawConfig::new();
    flags.set("mode", args.mode.clone())?;
    let pairs = [
        ("epsilon", &args.epsilon),
        ("steps", &args.steps),
        ("inertia", &args.inertia),
        ("i3", &args.i3),
        ("omega0", &args.omega0),
        ("figure", &args.figure),
        ("format", &args.format),
        ("nd_diag", &args.nd_diag),
        ("nd_off", &args.nd_off),
    ];
    for (key, value) in pairs {
        if let Some(v) = value {
            flags.set(key, v.clone())?;
        }
    }
    if let Some(out) = &args.out {
        flags.set("out", out.to_string_lossy().into_owned())?;
    }
    raw = raw.merge(flags);
    Ok(raw)
}

fn report(summary: &RunSummary) {
    match serde_json::to_string_pretty(summary) {
        Ok(text) => eprintln!("{text}"),
        Err(e) => eprintln!("could not serialize summary: {e}"),
    }
}

fn main_inner(args: Args) -> Result<(), CliError> {
    let raw = raw_config(&args)?;
    let mode: Mode = raw.get("mode").unwrap_or_default().parse()?;
    if mode == Mode::Figures && raw.get("figure").is_none() {
        for summary in cli::run_all_figures(&raw)? {
            report(&summary);
        }
        return Ok(());
    }
    let summary = cli::run(&raw.into_config()?)?;
    report(&summary);
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if let CliError::PoleAbort { summary, .. } = &err {
                report(summary);
            }
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
