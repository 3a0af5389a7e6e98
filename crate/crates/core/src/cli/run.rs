use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::config::{Mode, OutputFormat, ScenarioConfig};
use super::output::{Cell, Table};
use super::CliError;
use crate::closedform::{fit_params, omega_closed};
use crate::model3::{
    hk_step, planar_step, to_planar, BodyOmega, PlanarState, StepSize, TrajectorySample,
};
use crate::modeln::{constraint_candidate, hk_step_nd, kinetic_candidate, NDOmega};
use crate::reference::{estimate_order, euler_integrate, rk4_integrate, Suslov3d, SuslovPlanar};
use crate::SuslovError;

pub const SIM3_COLUMNS: [&str; 9] = [
    "n",
    "t",
    "omega1",
    "omega2",
    "x",
    "y",
    "F",
    "E",
    "constraint",
];

pub const CLOSEDFORM_COLUMNS: [&str; 7] = [
    "n",
    "omega1_iter",
    "omega2_iter",
    "omega1_closed",
    "omega2_closed",
    "diff1",
    "diff2",
];

pub const CONVERGENCE_COLUMNS: [&str; 3] = ["method", "eps", "error"];

/// Step levels of the convergence study, coarsest first, relative to the
/// configured epsilon.
pub const CONVERGENCE_LEVELS: usize = 4;

/// Integration horizon of the convergence study.
pub const CONVERGENCE_HORIZON: f64 = 1.0;

/// RK4 reference step as a fraction of the method step.
pub const REFERENCE_REFINEMENT: f64 = 100.0;

pub fn simn_columns(dim: usize) -> Vec<String> {
    let mut cols = vec!["n".to_string(), "t".to_string()];
    cols.extend((1..dim).map(|i| format!("omega_{i}n")));
    cols
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderSummary {
    pub method: String,
    pub estimated_order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure: Option<u8>,
    pub steps_completed: usize,
    /// Largest `|Q_n - Q_0| / |Q_0|` over the emitted rows (absolute when
    /// `Q_0 = 0`), where `Q` is named by `drift_quantity`.
    #[serde(rename = "max_F_drift")]
    pub max_f_drift: f64,
    pub drift_quantity: String,
    pub final_constraint_residual: f64,
    pub pole_encountered: bool,
    pub wall_time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_closedform_diff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orders: Option<Vec<OrderSummary>>,
}

impl RunSummary {
    fn new(config: &ScenarioConfig, quantity: &str) -> Self {
        Self {
            mode: config.mode,
            figure: config.figure_id,
            steps_completed: 0,
            max_f_drift: 0.0,
            drift_quantity: quantity.into(),
            final_constraint_residual: 0.0,
            pole_encountered: false,
            wall_time: 0.0,
            max_closedform_diff: None,
            orders: None,
        }
    }
}

/// `max_n |q_n - q_0| / |q_0|`, or the absolute drift when `q_0 = 0`.
pub fn relative_drift(values: &[f64]) -> f64 {
    let Some(&first) = values.first() else {
        return 0.0;
    };
    let scale = if first == 0.0 { 1.0 } else { first.abs() };
    values
        .iter()
        .map(|v| (v - first).abs() / scale)
        .fold(0.0, f64::max)
}

/// Result of executing a scenario before anything is written.
#[derive(Debug, Clone)]
pub struct Execution {
    pub table: Table,
    pub summary: RunSummary,
    pub pole: Option<SuslovError>,
}

fn model_err(e: SuslovError) -> CliError {
    CliError::Model(e)
}

fn omega3(config: &ScenarioConfig) -> BodyOmega {
    BodyOmega::new(config.omega0[0], config.omega0[1])
}

fn simulate3(config: &ScenarioConfig) -> Result<Execution, CliError> {
    let inertia = config.inertia3()?;
    let eps = config.step_size()?;
    let mut table = Table::new(SIM3_COLUMNS);
    let mut summary = RunSummary::new(config, "F");
    let mut f_values = Vec::with_capacity(config.steps + 1);
    let mut pole = None;

    let mut push = |n: usize, w: BodyOmega, table: &mut Table| {
        let s = TrajectorySample::new(n as i64, 0.0, w, &inertia, eps);
        f_values.push(s.first_integral);
        table.push(vec![
            Cell::Int(s.n),
            s.t.into(),
            s.omega.omega1.into(),
            s.omega.omega2.into(),
            s.planar.x.into(),
            s.planar.y.into(),
            s.first_integral.into(),
            s.energy.into(),
            s.constraint.into(),
        ]);
        s.constraint
    };

    let mut w = omega3(config);
    summary.final_constraint_residual = push(0, w, &mut table);
    for n in 1..=config.steps {
        match hk_step(w, &inertia, eps) {
            Ok(next) => {
                w = next;
                summary.steps_completed = n;
                summary.final_constraint_residual = push(n, w, &mut table);
            }
            Err(e) => {
                pole = Some(e);
                break;
            }
        }
    }
    summary.max_f_drift = relative_drift(&f_values);
    summary.pole_encountered = pole.is_some();
    Ok(Execution {
        table,
        summary,
        pole,
    })
}

fn simulate_nd(config: &ScenarioConfig) -> Result<Execution, CliError> {
    let inertia = config.nd_inertia()?;
    let eps = config.step_size()?;
    let mut table = Table::new(simn_columns(inertia.n()));
    let mut summary = RunSummary::new(config, "kinetic_candidate");
    let mut quantity = Vec::with_capacity(config.steps + 1);
    let mut pole = None;

    let row = |n: usize, w: &NDOmega| {
        let mut cells = vec![Cell::Int(n as i64), (n as f64 * eps.get()).into()];
        cells.extend(w.values().iter().map(|&v| Cell::Float(v)));
        cells
    };

    let mut w = NDOmega(config.omega0.clone());
    quantity.push(kinetic_candidate(&w, inertia));
    table.push(row(0, &w));
    for n in 1..=config.steps {
        match hk_step_nd(&w, inertia, eps) {
            Ok(next) => {
                w = next;
                summary.steps_completed = n;
                quantity.push(kinetic_candidate(&w, inertia));
                table.push(row(n, &w));
            }
            Err(e) => {
                pole = Some(e);
                break;
            }
        }
    }
    summary.final_constraint_residual = constraint_candidate(&w, inertia);
    summary.max_f_drift = relative_drift(&quantity);
    summary.pole_encountered = pole.is_some();
    Ok(Execution {
        table,
        summary,
        pole,
    })
}

/// Iterated map against the fitted closed-form orbit through `omega0`.
pub fn compare_closedform(config: &ScenarioConfig) -> Result<Execution, CliError> {
    let inertia = config.inertia3()?;
    let eps = config.step_size()?;
    let w0 = omega3(config);
    let params = fit_params(w0, &inertia, eps).map_err(model_err)?;

    let mut table = Table::new(CLOSEDFORM_COLUMNS);
    let mut summary = RunSummary::new(config, "F");
    let mut f_values = vec![crate::model3::first_integral(w0, &inertia, eps)];
    let mut worst = 0.0_f64;
    let mut pole = None;

    let mut w = w0;
    for n in 0..=config.steps {
        if n > 0 {
            match hk_step(w, &inertia, eps) {
                Ok(next) => {
                    w = next;
                    summary.steps_completed = n;
                    f_values.push(crate::model3::first_integral(w, &inertia, eps));
                }
                Err(e) => {
                    pole = Some(e);
                    break;
                }
            }
        }
        let exact = omega_closed(n as i64, &params).map_err(model_err)?;
        let (d1, d2) = (
            (w.omega1 - exact.omega1).abs(),
            (w.omega2 - exact.omega2).abs(),
        );
        worst = worst.max(d1).max(d2);
        table.push(vec![
            Cell::Int(n as i64),
            w.omega1.into(),
            w.omega2.into(),
            exact.omega1.into(),
            exact.omega2.into(),
            d1.into(),
            d2.into(),
        ]);
    }
    summary.max_closedform_diff = Some(worst);
    summary.max_f_drift = relative_drift(&f_values);
    summary.final_constraint_residual = crate::model3::constraint_residual(w, &inertia);
    summary.pole_encountered = pole.is_some();
    Ok(Execution {
        table,
        summary,
        pole,
    })
}

fn halving_levels(coarsest: f64) -> Vec<f64> {
    (0..CONVERGENCE_LEVELS)
        .map(|k| coarsest / f64::powi(2.0, k as i32))
        .collect()
}

/// Number of map steps covering the convergence horizon at step `eps`.
fn horizon_steps(eps: f64) -> usize {
    (CONVERGENCE_HORIZON / eps).round().max(1.0) as usize
}

fn iterate_planar(
    p0: PlanarState,
    inertia: &crate::model3::Inertia3,
    eps: f64,
) -> crate::Result<Vec<f64>> {
    let step = StepSize::new(eps)?;
    let mut p = p0;
    for _ in 0..horizon_steps(eps) {
        p = planar_step(p, inertia, step)?;
    }
    Ok(vec![p.x, p.y])
}

fn iterate_3d(
    w0: BodyOmega,
    inertia: &crate::model3::Inertia3,
    eps: f64,
) -> crate::Result<Vec<f64>> {
    let step = StepSize::new(eps)?;
    let mut w = w0;
    for _ in 0..horizon_steps(eps) {
        w = hk_step(w, inertia, step)?;
    }
    Ok(vec![w.omega1, w.omega2])
}

/// Convergence study from `omega0`: forward Euler on the planar system as the
/// first-order control, then the discrete map in planar and 3D form, each
/// against RK4 with a step `REFERENCE_REFINEMENT` times smaller.
pub fn convergence_study(config: &ScenarioConfig) -> Result<Execution, CliError> {
    let inertia = config.inertia3()?;
    let levels = halving_levels(config.epsilon);
    let w0 = omega3(config);
    let p0 = to_planar(w0, &inertia);
    let p0v = [p0.x, p0.y];
    let w0v = [w0.omega1, w0.omega2];
    let planar = SuslovPlanar(inertia);
    let body = Suslov3d(inertia);
    let end = |eps: f64| horizon_steps(eps) as f64 * eps;

    let studies = [
        (
            "euler_planar",
            estimate_order(
                |e| euler_integrate(&planar, &p0v, end(e), e),
                |e| rk4_integrate(&planar, &p0v, end(e), e / REFERENCE_REFINEMENT),
                &levels,
            ),
        ),
        (
            "hk_planar",
            estimate_order(
                |e| iterate_planar(p0, &inertia, e),
                |e| rk4_integrate(&planar, &p0v, end(e), e / REFERENCE_REFINEMENT),
                &levels,
            ),
        ),
        (
            "hk_3d",
            estimate_order(
                |e| iterate_3d(w0, &inertia, e),
                |e| rk4_integrate(&body, &w0v, end(e), e / REFERENCE_REFINEMENT),
                &levels,
            ),
        ),
    ];

    let mut table = Table::new(CONVERGENCE_COLUMNS);
    let mut summary = RunSummary::new(config, "none");
    let mut orders = Vec::new();
    for (name, report) in studies {
        let report = report.map_err(model_err)?;
        for (eps, err) in report.eps_levels.iter().zip(&report.errors) {
            table.push(vec![Cell::Text(name.into()), (*eps).into(), (*err).into()]);
        }
        orders.push(OrderSummary {
            method: name.into(),
            estimated_order: report.estimated_order,
        });
    }
    summary.orders = Some(orders);
    summary.steps_completed = horizon_steps(levels[CONVERGENCE_LEVELS - 1]);
    Ok(Execution {
        table,
        summary,
        pole: None,
    })
}

/// Execute a scenario without writing anything.
pub fn execute(config: &ScenarioConfig) -> Result<Execution, CliError> {
    match config.mode {
        Mode::Sim3 | Mode::Figures => simulate3(config),
        Mode::SimN => simulate_nd(config),
        Mode::Conserve if config.is_nd() => simulate_nd(config),
        Mode::Conserve => simulate3(config),
        Mode::ClosedForm => compare_closedform(config),
        Mode::Convergence => convergence_study(config),
    }
}

/// Conservation audit: the run summary of a 3D or n-dimensional trajectory.
/// A pole is reported through `pole_encountered` together with the summary
/// of the steps completed before it.
pub fn audit_conservation(config: &ScenarioConfig) -> Result<RunSummary, CliError> {
    let exec = if config.is_nd() {
        simulate_nd(config)?
    } else {
        simulate3(config)?
    };
    match exec.pole {
        Some(source) => Err(CliError::PoleAbort {
            summary: Box::new(exec.summary),
            source,
        }),
        None => Ok(exec.summary),
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ScenarioConfig,
    omega0: &'a [f64],
    omega0_source: &'static str,
}

fn metadata(config: &ScenarioConfig) -> Metadata<'_> {
    Metadata {
        tool: "suslov-hk",
        version: env!("CARGO_PKG_VERSION"),
        config,
        omega0: &config.omega0,
        omega0_source: if config.omega0_from_preset {
            "preset default"
        } else {
            "user"
        },
    }
}

fn write_table<W: Write>(config: &ScenarioConfig, table: &Table, w: W) -> io::Result<()> {
    match config.output_format {
        OutputFormat::Csv => table.write_csv(w),
        OutputFormat::Json => table.write_json(&metadata(config), w),
    }
}

/// Path of the metadata written next to a CSV file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn emit(config: &ScenarioConfig, table: &Table) -> Result<(), CliError> {
    match &config.output_path {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            write_table(config, table, BufWriter::new(file)).map_err(|e| CliError::io(path, e))?;
            if config.output_format == OutputFormat::Csv {
                let meta = sidecar_path(path);
                let file = File::create(&meta).map_err(|e| CliError::io(&meta, e))?;
                let mut w = BufWriter::new(file);
                serde_json::to_writer_pretty(&mut w, &metadata(config))
                    .map_err(|e| CliError::io(&meta, e.into()))?;
                writeln!(w).map_err(|e| CliError::io(&meta, e))?;
            }
            Ok(())
        }
        None => write_table(config, table, io::stdout().lock())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

/// Execute a scenario and write its table. On a pole the rows computed so
/// far are still written and `PoleAbort` carries the partial summary.
pub fn run(config: &ScenarioConfig) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let mut exec = execute(config)?;
    exec.summary.wall_time = start.elapsed().as_secs_f64();
    emit(config, &exec.table)?;
    match exec.pole {
        Some(source) => Err(CliError::PoleAbort {
            summary: Box::new(exec.summary),
            source,
        }),
        None => Ok(exec.summary),
    }
}
