//! Every published figure of the worked models next to its recomputed
//! value.

use super::position::{coherent_matrix_element, CoherentPacket};
use super::qubits::{four_qubit_scenario, two_qubit_scenario, FourQubitSpec, TwoQubitSpec};
use super::report::ScenarioReport;
use super::spin_bath::{bath_moments, split_terms_min, uniform_configuration_factors, SpinBathSpec};
use super::wcm::{wcm_scenario, FockSpec};
use crate::error::{Error, Result};
use crate::localtime::{coherence_factor, LawParameters, Preset, TimeBound};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Bath size standing in for the many-qubit limit.
pub const LARGE_BATH: usize = 10_000;
/// Tolerance for figures printed to three decimals.
const PRINTED: f64 = 1e-3;
/// Tolerance for figures printed to two decimals.
const PRINTED_COARSE: f64 = 5e-3;
/// Tolerance of the stated exact fidelity.
const FIDELITY_TOL: f64 = 3e-3;

/// How a recomputed value is checked against its published figure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RowCheck {
    Equal { tolerance: f64 },
    /// The value must not exceed the figure.
    UpperBound,
    /// The value must not fall below the figure.
    LowerBound,
    /// The value must lie strictly between two figures.
    Range { low: f64, high: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub paper_value: f64,
    pub value: f64,
    pub deviation: f64,
    pub check: RowCheck,
    pub passed: bool,
}

impl TableRow {
    fn new(label: &str, paper_value: f64, value: f64, check: RowCheck) -> Self {
        let passed = match check {
            RowCheck::Equal { tolerance } => (value - paper_value).abs() <= tolerance,
            RowCheck::UpperBound => value <= paper_value,
            RowCheck::LowerBound => value >= paper_value,
            RowCheck::Range { low, high } => low < value && value < high,
        };
        Self {
            label: label.to_string(),
            paper_value,
            value,
            deviation: (value - paper_value).abs(),
            check,
            passed,
        }
    }
}

/// Rows for one worked model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaperTable {
    pub scenario: String,
    pub rows: Vec<TableRow>,
}

impl PaperTable {
    fn new(scenario: &str) -> Self {
        Self {
            scenario: scenario.to_string(),
            rows: Vec::new(),
        }
    }

    fn equal(&mut self, label: &str, paper: f64, value: f64, tolerance: f64) -> &mut Self {
        self.rows.push(TableRow::new(label, paper, value, RowCheck::Equal { tolerance }));
        self
    }

    fn push(&mut self, label: &str, paper: f64, value: f64, check: RowCheck) -> &mut Self {
        self.rows.push(TableRow::new(label, paper, value, check));
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &TableRow> {
        self.rows.iter().filter(|r| !r.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Model(e.to_string()))
    }

    /// Columns `label,value,paper_value,deviation,passed`.
    pub fn to_csv(&self) -> Result<String> {
        let err = |e: csv::Error| Error::Model(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["label", "value", "paper_value", "deviation", "passed"]).map_err(err)?;
        for r in &self.rows {
            w.write_record([
                r.label.clone(),
                r.value.to_string(),
                r.paper_value.to_string(),
                r.deviation.to_string(),
                r.passed.to_string(),
            ])
            .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Model(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Model(e.to_string()))
    }
}

/// Options for regenerating the tables.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TableOptions {
    /// Replaces every published `λ`.
    pub lambda: Option<f64>,
}

fn law(preset: Preset, opts: &TableOptions) -> LawParameters {
    let (dt, lambda) = preset.pair();
    LawParameters {
        dt,
        lambda: opts.lambda.unwrap_or(lambda),
    }
}

fn value(r: &ScenarioReport, label: &str) -> Result<f64> {
    r.value(label)
        .ok_or_else(|| Error::Model(format!("{} report lacks {label}", r.scenario)))
}

fn two_qubit_table(opts: &TableOptions) -> Result<PaperTable> {
    let spec = TwoQubitSpec {
        law: law(Preset::TwoQubit, opts),
        ..Default::default()
    };
    let r = two_qubit_scenario(&spec)?;
    let mut t = PaperTable::new("two_qubit");
    let factor = value(&r, "coherence_factor")?;
    t.equal("gaussian_factor", 0.939, factor, PRINTED)
        .equal("off_diagonal_factor", 0.939, coherence_factor(0.5, spec.law.lambda), PRINTED)
        .push("fidelity_deficit", 0.062, value(&r, "fidelity_deficit")?, RowCheck::UpperBound)
        .equal("tau_min_half", PI, value(&r, "tau_min_half")?, PRINTED);
    Ok(t)
}

fn four_qubit_table(opts: &TableOptions) -> Result<PaperTable> {
    let spec = FourQubitSpec {
        law: law(Preset::FourQubit, opts),
        ..Default::default()
    };
    let r = four_qubit_scenario(&spec)?;
    let f = value(&r, "fidelity")?;
    let mut t = PaperTable::new("four_qubit");
    t.equal("smallest_factor", 0.755, value(&r, "smallest_factor")?, PRINTED)
        .equal("largest_factor", 0.969, value(&r, "largest_factor")?, PRINTED)
        .equal("fidelity_lower_bound", 0.869, value(&r, "fidelity_lower_bound")?, PRINTED)
        .equal("fidelity_upper_bound", 0.984, value(&r, "fidelity_upper_bound")?, PRINTED)
        .push(
            "fidelity_within_bounds",
            0.894,
            f,
            RowCheck::Range {
                low: value(&r, "fidelity_lower_bound")?,
                high: value(&r, "fidelity_upper_bound")?,
            },
        )
        .equal("fidelity", 0.894, f, FIDELITY_TOL)
        .equal("tau_min_half", PI / 3.0, value(&r, "tau_min_half_gap_branch")?, PRINTED);
    Ok(t)
}

fn spin_bath_table(opts: &TableOptions) -> Result<PaperTable> {
    let mut spec = SpinBathSpec::preset(LARGE_BATH);
    spec.law = law(Preset::SpinBath, opts);
    let lambda = spec.law.lambda;
    let span = spec.coupling_span();
    let m = bath_moments(&spec);
    let bound = TimeBound::from_moments(m.weighted_spread, m.gap)?;
    let (smallest, _) = uniform_configuration_factors(1.0, -1.0, span, lambda);
    let mut t = PaperTable::new("spin_bath");
    t.equal("delta_h", 3f64.sqrt().recip(), m.weighted_spread, PRINTED)
        .equal("ground_gap", 0.5, m.gap, PRINTED)
        .equal("tau_min_half", FRAC_PI_2, bound.tau_min / 2.0, PRINTED)
        .push("window_inside_time_bound", bound.tau_min / 2.0, spec.law.dt, RowCheck::UpperBound)
        .equal("smallest_factor", 0.779, smallest, PRINTED)
        .equal("smallest_factor_alt", 0.778, smallest, PRINTED)
        .equal("split_terms_min", 0.94, split_terms_min(&spec.effective_couplings(), lambda), PRINTED);
    let pairs = [
        ("pair(2,-1).smallest_factor", 0.57, 2.0, -1.0, true, PRINTED_COARSE),
        ("pair(2,-1).largest_factor", 0.939, 2.0, -1.0, false, PRINTED),
        ("pair(2,-2).smallest_factor", 0.368, 2.0, -2.0, true, PRINTED),
        ("pair(2,-2).largest_factor", 1.0, 2.0, -2.0, false, PRINTED),
        ("coarse_pair(2,0).smallest_factor", 0.778, 2.0, 0.0, true, PRINTED),
        ("coarse_pair(2,0).largest_factor", 0.778, 2.0, 0.0, false, PRINTED),
    ];
    for (label, paper, a, b, small, tol) in pairs {
        let (s, l) = uniform_configuration_factors(a, b, span, lambda);
        t.equal(label, paper, if small { s } else { l }, tol);
    }
    Ok(t)
}

fn position_table(opts: &TableOptions) -> Result<PaperTable> {
    let l = law(Preset::Position, opts);
    let a = CoherentPacket::new(0.0, 1.0, 0.0);
    let b = CoherentPacket::new(4.0, 1.0, 0.0);
    let mut t = PaperTable::new("position");
    t.equal("gaussian_denominator", 12.0, 4.0 * l.lambda, 1e-12)
        .push("window_inside_time_bound", FRAC_PI_4, l.dt, RowCheck::UpperBound)
        .equal("coherent_overlap", (-4.0f64).exp(), coherent_matrix_element(&a, &b, 0).norm(), 1e-12);
    Ok(t)
}

fn wcm_table(opts: &TableOptions) -> Result<PaperTable> {
    let spec = FockSpec {
        law: law(Preset::Oscillator, opts),
        ..Default::default()
    };
    let r = wcm_scenario(&spec)?;
    let mut t = PaperTable::new("wcm");
    t.equal("object_diagonal_error", 0.0, value(&r, "object_diagonal_max_error")?, 1e-12)
        .equal("overlap_formula_error", 0.0, value(&r, "overlap_formula_max_error")?, 1e-8)
        .push("window_inside_time_bound", FRAC_PI_4, spec.law.dt, RowCheck::UpperBound);
    Ok(t)
}

/// Regenerates one table per worked model.
pub fn paper_tables(opts: &TableOptions) -> Result<Vec<PaperTable>> {
    Ok(vec![
        two_qubit_table(opts)?,
        four_qubit_table(opts)?,
        spin_bath_table(opts)?,
        position_table(opts)?,
        wcm_table(opts)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_rows() {
        let tables = paper_tables(&TableOptions::default()).unwrap();
        let failed: Vec<String> = tables
            .iter()
            .flat_map(|t| t.failures().map(move |r| format!("{}.{}", t.scenario, r.label)))
            .collect();
        // The stated exact fidelity is the only figure that is not reproduced.
        assert_eq!(failed, vec!["four_qubit.fidelity".to_string()]);
        let two = &tables[0];
        assert!(two.rows.iter().all(|r| r.passed && r.deviation < 1e-3 || r.label == "fidelity_deficit"));
    }

    #[test]
    fn tampered_lambda_fails_rows() {
        let tables = paper_tables(&TableOptions { lambda: Some(0.25) }).unwrap();
        let failing: Vec<&str> = tables[0].failures().map(|r| r.label.as_str()).collect();
        assert!(failing.contains(&"gaussian_factor"));
    }

    #[test]
    fn csv_has_one_line_per_row() {
        let t = &paper_tables(&TableOptions::default()).unwrap()[2];
        assert_eq!(t.to_csv().unwrap().lines().count(), t.rows.len() + 1);
    }
}
