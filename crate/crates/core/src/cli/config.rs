use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use super::CliError;
use crate::model3::{Inertia3, StepSize};
use crate::modeln::NDInertia;

/// Default number of steps for figure runs.
pub const FIGURE_STEPS: usize = 5000;

/// Initial velocity used by every figure preset; the figures themselves do
/// not fix one.
pub const PRESET_OMEGA0: [f64; 2] = [1.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    #[serde(rename = "sim3")]
    Sim3,
    #[serde(rename = "simN")]
    SimN,
    #[serde(rename = "closedform")]
    ClosedForm,
    #[serde(rename = "conserve")]
    Conserve,
    #[serde(rename = "convergence")]
    Convergence,
    #[serde(rename = "figures")]
    Figures,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Sim3 => "sim3",
            Mode::SimN => "simN",
            Mode::ClosedForm => "closedform",
            Mode::Conserve => "conserve",
            Mode::Convergence => "convergence",
            Mode::Figures => "figures",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "sim3" => Mode::Sim3,
            "simN" | "simn" => Mode::SimN,
            "closedform" => Mode::ClosedForm,
            "conserve" => Mode::Conserve,
            "convergence" => Mode::Convergence,
            "figures" => Mode::Figures,
            other => return Err(CliError::Config(format!("unknown mode `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(CliError::Config(format!("unknown output format `{other}`"))),
        }
    }
}

/// Parameters of one of the four published figures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigurePreset {
    pub id: u8,
    pub epsilon: f64,
    pub i1: f64,
    pub i2: f64,
    pub i13: f64,
    pub i23: f64,
}

pub const FIGURE_PRESETS: [FigurePreset; 4] = [
    FigurePreset {
        id: 1,
        epsilon: 0.2,
        i1: 4.0,
        i2: 1.0,
        i13: -0.5,
        i23: -0.3,
    },
    FigurePreset {
        id: 2,
        epsilon: 0.2,
        i1: 4.0,
        i2: 3.0,
        i13: -0.4,
        i23: -0.2,
    },
    FigurePreset {
        id: 3,
        epsilon: 0.02,
        i1: 4.0,
        i2: 2.0,
        i13: 0.0,
        i23: -0.2,
    },
    FigurePreset {
        id: 4,
        epsilon: 1.0,
        i1: 3.0,
        i2: 3.0,
        i13: -0.2,
        i23: -0.2,
    },
];

pub fn figure_preset(figure_id: i64) -> Result<FigurePreset, CliError> {
    FIGURE_PRESETS
        .iter()
        .find(|p| i64::from(p.id) == figure_id)
        .copied()
        .ok_or(CliError::UnknownFigure(figure_id))
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inertia3: Option<Inertia3>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nd_inertia: Option<NDInertia>,
    pub omega0: Vec<f64>,
    /// Set when `omega0` was filled in from [`PRESET_OMEGA0`].
    pub omega0_from_preset: bool,
    pub epsilon: f64,
    pub steps: usize,
    pub output_format: OutputFormat,
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure_id: Option<u8>,
}

impl ScenarioConfig {
    pub fn step_size(&self) -> Result<StepSize, CliError> {
        StepSize::new(self.epsilon).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn inertia3(&self) -> Result<Inertia3, CliError> {
        self.inertia3
            .ok_or_else(|| CliError::Config(format!("mode {} needs --inertia", self.mode)))
    }

    pub fn nd_inertia(&self) -> Result<&NDInertia, CliError> {
        self.nd_inertia
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("mode {} needs --nd-diag/--nd-off", self.mode)))
    }

    pub fn is_nd(&self) -> bool {
        self.nd_inertia.is_some()
    }
}

/// The figure-`k` run: its step size and inertia, `omega0 = (1, 1)`,
/// [`FIGURE_STEPS`] steps, CSV output.
pub fn preset(figure_id: i64) -> Result<ScenarioConfig, CliError> {
    let p = figure_preset(figure_id)?;
    Ok(ScenarioConfig {
        mode: Mode::Figures,
        inertia3: Some(
            Inertia3::new(p.i1, p.i2, p.i13, p.i23).map_err(|e| CliError::Config(e.to_string()))?,
        ),
        nd_inertia: None,
        omega0: PRESET_OMEGA0.to_vec(),
        omega0_from_preset: true,
        epsilon: p.epsilon,
        steps: FIGURE_STEPS,
        output_format: OutputFormat::Csv,
        output_path: None,
        figure_id: Some(p.id),
    })
}

/// Unvalidated `key = value` settings from a config file and/or flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

const KEYS: [&str; 11] = [
    "mode", "epsilon", "steps", "inertia", "i3", "omega0", "figure", "format", "out", "nd_diag",
    "nd_off",
];

impl RawConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse flat `key = value` text. `#` starts a comment; blank lines are
    /// ignored; lists are comma-separated.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut raw = Self::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            raw.set(key.trim(), value.trim())?;
        }
        Ok(raw)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), CliError> {
        let key = key.replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        self.values.insert(key, value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Entries of `other` replace entries of `self`.
    pub fn merge(mut self, other: RawConfig) -> Self {
        self.values.extend(other.values);
        self
    }

    fn number<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        let s = s.trim();
                        s.parse::<f64>().map_err(|_| {
                            CliError::Config(format!("`{key}`: cannot parse `{s}` as a number"))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()
    }

    /// Validate against the requirements of the selected mode.
    pub fn into_config(self) -> Result<ScenarioConfig, CliError> {
        let config_err = |msg: String| CliError::Config(msg);
        let mode: Mode = self
            .get("mode")
            .ok_or_else(|| config_err("no mode given".into()))?
            .parse()?;

        let figure: Option<i64> = self.number("figure")?;
        let preset = figure.map(figure_preset).transpose()?;

        let inertia_list = self.list("inertia")?;
        let nd_diag = self.list("nd_diag")?;
        let nd_off = self.list("nd_off")?;
        let has_3d = inertia_list.is_some() || preset.is_some();
        let has_nd = nd_diag.is_some() || nd_off.is_some();

        if has_3d && has_nd {
            return Err(config_err(
                "both 3D (--inertia/--figure) and n-dimensional inertia given".into(),
            ));
        }
        let wants_nd = match mode {
            Mode::SimN => true,
            Mode::Conserve => has_nd,
            _ => false,
        };
        if wants_nd && has_3d {
            return Err(config_err(format!(
                "mode {mode} takes --nd-diag/--nd-off, not --inertia/--figure"
            )));
        }
        if !wants_nd && has_nd {
            return Err(config_err(format!(
                "mode {mode} does not take n-dimensional inertia"
            )));
        }

        let (inertia3, nd_inertia) = if wants_nd {
            let diag = nd_diag.ok_or_else(|| config_err("missing nd_diag".into()))?;
            let off = nd_off.ok_or_else(|| config_err("missing nd_off".into()))?;
            let nd = NDInertia::new(diag, off).map_err(|e| config_err(e.to_string()))?;
            (None, Some(nd))
        } else {
            let inertia = match (inertia_list, preset) {
                (Some(v), _) => {
                    if v.len() != 4 {
                        return Err(config_err(format!(
                            "`inertia` expects I1,I2,I13,I23, got {} values",
                            v.len()
                        )));
                    }
                    Inertia3::new(v[0], v[1], v[2], v[3])
                }
                (None, Some(p)) => Inertia3::new(p.i1, p.i2, p.i13, p.i23),
                (None, None) => {
                    return Err(config_err(format!(
                        "mode {mode} needs --inertia or --figure"
                    )))
                }
            }
            .map_err(|e| config_err(e.to_string()))?;
            let inertia = match self.number::<f64>("i3")? {
                Some(i3) => inertia.with_i3(i3).map_err(|e| config_err(e.to_string()))?,
                None => inertia,
            };
            (Some(inertia), None)
        };

        let expected_len = nd_inertia.as_ref().map_or(2, |nd| nd.n() - 1);
        let (omega0, omega0_from_preset) = match self.list("omega0")? {
            Some(v) => (v, false),
            None if preset.is_some() => (PRESET_OMEGA0.to_vec(), true),
            None => return Err(config_err("missing omega0".into())),
        };
        if omega0.len() != expected_len {
            return Err(config_err(format!(
                "omega0 needs {expected_len} values, got {}",
                omega0.len()
            )));
        }
        if !omega0.iter().all(|v| v.is_finite()) {
            return Err(config_err("omega0 must be finite".into()));
        }

        let epsilon = match (self.number::<f64>("epsilon")?, preset, mode) {
            (Some(e), _, _) => e,
            (None, _, Mode::Convergence) => 0.1,
            (None, Some(p), _) => p.epsilon,
            (None, None, _) => return Err(config_err("missing epsilon".into())),
        };
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(config_err(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }

        let steps = match (self.number::<i64>("steps")?, mode) {
            (Some(s), _) => s,
            (None, Mode::Figures) => FIGURE_STEPS as i64,
            (None, Mode::Convergence) => 1,
            (None, _) => return Err(config_err("missing steps".into())),
        };
        if steps < 1 {
            return Err(config_err(format!("steps must be at least 1, got {steps}")));
        }

        let output_format = match self.get("format") {
            Some(f) => f.parse()?,
            None => OutputFormat::Csv,
        };

        Ok(ScenarioConfig {
            mode,
            inertia3,
            nd_inertia,
            omega0,
            omega0_from_preset,
            epsilon,
            steps: steps as usize,
            output_format,
            output_path: self.get("out").map(PathBuf::from),
            figure_id: preset.map(|p| p.id),
        })
    }
}
