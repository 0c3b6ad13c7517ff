//! Turns resolved settings into a scenario spec and runs it.

use crate::error::CliError;
use crate::settings::{Mode, PresetName, Scenario, Settings};
use ltd_core::localtime::LawParameters;
use ltd_core::models::{
    clock_scenario, four_qubit_scenario, position_scenario, spin_bath_scenario, two_qubit_scenario,
    wcm_scenario, BathMode, ClockSpec, FockSpec, FourQubitSpec, PositionSpec, ScenarioReport,
    SpinBathSpec, TwoQubitSpec,
};

/// Bath size when `--n` is not given.
pub const DEFAULT_QUBITS: usize = 12;

/// Rejects settings the scenario has no use for, so a typo never runs
/// silently with defaults.
fn only(s: &Settings, scenario: Scenario, allowed: &[&str]) -> Result<(), CliError> {
    let extra: Vec<&str> = s.set_fields().into_iter().filter(|f| !allowed.contains(f)).collect();
    if extra.is_empty() {
        Ok(())
    } else {
        Err(CliError::Parameter(format!(
            "{} does not take: {}",
            scenario.name(),
            extra.join(", ")
        )))
    }
}

fn apply_law(law: &mut LawParameters, s: &Settings) {
    if let Some(l) = s.lambda {
        law.lambda = l;
    }
    if let Some(dt) = s.dt {
        law.dt = dt;
    }
}

const GRID: [&str; 3] = ["t0_start", "t0_stop", "t0_count"];

fn with_grid<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["lambda", "dt"];
    v.extend(GRID);
    v.extend_from_slice(extra);
    v
}

pub fn run_scenario(s: &Settings) -> Result<ScenarioReport, CliError> {
    let scenario = s
        .scenario
        .ok_or_else(|| CliError::Parameter("no scenario given (--scenario or config)".into()))?;
    let preset = s.preset.unwrap_or_default();
    if preset != PresetName::Paper && scenario != Scenario::SpinBath {
        return Err(CliError::Parameter(format!(
            "preset {preset:?} applies only to spin_bath"
        )));
    }
    let mut report = match scenario {
        Scenario::TwoQubit => {
            only(s, scenario, &with_grid(&["t0"]))?;
            let mut spec = TwoQubitSpec::default();
            apply_law(&mut spec.law, s);
            spec.t0 = s.t0.unwrap_or(spec.t0);
            spec.t0_grid = s.t0_grid(&spec.t0_grid)?;
            two_qubit_scenario(&spec)?
        }
        Scenario::FourQubit => {
            only(s, scenario, &with_grid(&["t0"]))?;
            let mut spec = FourQubitSpec::default();
            apply_law(&mut spec.law, s);
            spec.t0 = s.t0.unwrap_or(spec.t0);
            spec.t0_grid = s.t0_grid(&spec.t0_grid)?;
            four_qubit_scenario(&spec)?
        }
        Scenario::SpinBath => {
            only(s, scenario, &with_grid(&["n", "samples", "mode"]))?;
            let n = s.n.unwrap_or(DEFAULT_QUBITS);
            let mut spec = match preset {
                PresetName::Paper => SpinBathSpec::preset(n),
                PresetName::Extended => SpinBathSpec::extended(n),
                PresetName::Random => SpinBathSpec::random(n, s.seed()),
            };
            spec.seed = s.seed();
            apply_law(&mut spec.law, s);
            spec.t0_grid = s.t0_grid(&spec.t0_grid)?;
            if let Some(k) = s.samples {
                spec.samples = k;
            }
            if let Some(m) = s.mode {
                spec.mode = match m {
                    Mode::Exact => BathMode::Exact,
                    Mode::MonteCarlo => BathMode::MonteCarlo,
                    Mode::Auto => BathMode::Auto,
                };
            }
            spin_bath_scenario(&spec)?
        }
        Scenario::Position => {
            only(s, scenario, &with_grid(&[]))?;
            let mut spec = PositionSpec::default();
            apply_law(&mut spec.law, s);
            spec.t0_grid = s.t0_grid(&spec.t0_grid)?;
            position_scenario(&spec)?
        }
        Scenario::Wcm => {
            only(s, scenario, &["lambda", "dt", "t0"])?;
            let mut spec = FockSpec::default();
            apply_law(&mut spec.law, s);
            spec.t0 = s.t0.unwrap_or(spec.t0);
            wcm_scenario(&spec)?
        }
        Scenario::Clock => {
            only(s, scenario, &["t"])?;
            let mut spec = ClockSpec::default();
            spec.t = s.t.unwrap_or(spec.t);
            clock_scenario(&spec)?
        }
    };
    report.param("seed", s.seed());
    report.param("preset", format!("{preset:?}").to_lowercase());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inapplicable_setting_is_a_parameter_error() {
        let s = Settings {
            scenario: Some(Scenario::TwoQubit),
            n: Some(4),
            ..Default::default()
        };
        assert!(matches!(run_scenario(&s), Err(CliError::Parameter(_))));
    }

    #[test]
    fn lambda_reaches_the_report() {
        let s = Settings {
            scenario: Some(Scenario::TwoQubit),
            lambda: Some(2.0),
            ..Default::default()
        };
        let r = run_scenario(&s).unwrap();
        assert_eq!(r.value("coherence_factor"), Some((-1.0f64 / 32.0).exp()));
    }

    #[test]
    fn invalid_lambda_is_a_parameter_error() {
        let s = Settings {
            scenario: Some(Scenario::Position),
            lambda: Some(-1.0),
            ..Default::default()
        };
        assert!(matches!(run_scenario(&s), Err(CliError::Parameter(_))));
    }
}
