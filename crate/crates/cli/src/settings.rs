//! Run settings: built-in preset, overridden by a TOML file, overridden by
//! command-line flags.

use crate::error::CliError;
use clap::{Args, ValueEnum};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    #[value(name = "two_qubit")]
    TwoQubit,
    #[value(name = "four_qubit")]
    FourQubit,
    #[value(name = "spin_bath")]
    SpinBath,
    Position,
    Wcm,
    Clock,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::TwoQubit => "two_qubit",
            Scenario::FourQubit => "four_qubit",
            Scenario::SpinBath => "spin_bath",
            Scenario::Position => "position",
            Scenario::Wcm => "wcm",
            Scenario::Clock => "clock",
        }
    }
}

/// Starting point for the scenario parameters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    /// Published configuration of the chosen scenario.
    #[default]
    Paper,
    /// Spin bath read out by a four-level object.
    Extended,
    /// Spin bath with couplings drawn uniformly from (0, 1) using the seed.
    Random,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    #[value(name = "monte_carlo")]
    MonteCarlo,
    Auto,
}

/// Every tunable of `run`. Unset fields fall through to the next layer.
#[derive(Clone, Debug, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Scenario to run.
    #[arg(long, value_enum)]
    pub scenario: Option<Scenario>,
    /// Built-in parameter set the other settings modify.
    #[arg(long, value_enum)]
    pub preset: Option<PresetName>,
    /// First readout centre of the t0 sweep.
    #[arg(long, allow_hyphen_values = true)]
    pub t0_start: Option<f64>,
    /// Last readout centre of the t0 sweep.
    #[arg(long, allow_hyphen_values = true)]
    pub t0_stop: Option<f64>,
    /// Number of readout centres in the t0 sweep.
    #[arg(long)]
    pub t0_count: Option<usize>,
    /// Single readout centre for the point diagnostics.
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    /// Precision of the readout-time law.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Half-width of the readout window.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Number of bath qubits.
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed of every random draw (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Configuration samples in Monte Carlo mode.
    #[arg(long)]
    pub samples: Option<usize>,
    /// How the spin-bath trace is evaluated.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Elapsed time read by the clock.
    #[arg(long)]
    pub t: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),+) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )+
    };
}

impl Settings {
    /// `self` with every field that `top` sets replaced.
    pub fn overlaid(mut self, top: &Settings) -> Settings {
        overlay!(
            self, top, scenario, preset, t0_start, t0_stop, t0_count, t0, lambda, dt, n, seed,
            samples, mode, t, out, format
        );
        self
    }

    pub fn from_toml(text: &str) -> Result<Settings, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parameter(format!("config file: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parameter(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    /// Names of the set fields among `fields`.
    pub fn set_fields(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let mut mark = |name, set: bool| {
            if set {
                v.push(name)
            }
        };
        mark("t0_start", self.t0_start.is_some());
        mark("t0_stop", self.t0_stop.is_some());
        mark("t0_count", self.t0_count.is_some());
        mark("t0", self.t0.is_some());
        mark("lambda", self.lambda.is_some());
        mark("dt", self.dt.is_some());
        mark("n", self.n.is_some());
        mark("samples", self.samples.is_some());
        mark("mode", self.mode.is_some());
        mark("t", self.t.is_some());
        v
    }

    /// The t0 sweep with unset ends taken from `default`.
    pub fn t0_grid(&self, default: &[f64]) -> Result<Vec<f64>, CliError> {
        if self.t0_start.is_none() && self.t0_stop.is_none() && self.t0_count.is_none() {
            return Ok(default.to_vec());
        }
        let start = self.t0_start.unwrap_or(default[0]);
        let stop = self.t0_stop.unwrap_or(*default.last().unwrap_or(&start));
        let count = self.t0_count.unwrap_or(default.len());
        if count == 0 {
            return Err(CliError::Parameter("t0 count must be at least 1".into()));
        }
        if !start.is_finite() || !stop.is_finite() {
            return Err(CliError::Parameter("t0 range must be finite".into()));
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        Ok((0..count)
            .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn later_layers_win() {
        let preset = Settings {
            lambda: Some(1.0),
            dt: Some(3.0),
            ..Default::default()
        };
        let file = Settings::from_toml("lambda = 2.0\nn = 8\n").unwrap();
        let flags = Settings {
            n: Some(4),
            ..Default::default()
        };
        let s = preset.overlaid(&file).overlaid(&flags);
        assert_eq!(s.lambda, Some(2.0));
        assert_eq!(s.dt, Some(3.0));
        assert_eq!(s.n, Some(4));
        assert_eq!(s.seed(), 0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(Settings::from_toml("lamda = 2.0"), Err(CliError::Parameter(_))));
        let s = Settings::from_toml("scenario = \"spin_bath\"\nmode = \"monte_carlo\"").unwrap();
        assert_eq!(s.scenario, Some(Scenario::SpinBath));
        assert_eq!(s.mode, Some(Mode::MonteCarlo));
    }

    #[test]
    fn grid_overrides() {
        let s = Settings {
            t0_count: Some(3),
            t0_stop: Some(2.0),
            ..Default::default()
        };
        assert_eq!(s.t0_grid(&[0.0, 5.0]).unwrap(), vec![0.0, 1.0, 2.0]);
        let s = Settings {
            t0_count: Some(0),
            ..Default::default()
        };
        assert!(s.t0_grid(&[0.0]).is_err());
    }
}
