use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A scalar parameter recorded with a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Integer(i64),
    Unsigned(u64),
    Number(f64),
    Text(String),
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Number(v)
    }
}

impl From<usize> for ParamValue {
    fn from(v: usize) -> Self {
        ParamValue::Integer(v as i64)
    }
}

impl From<u64> for ParamValue {
    fn from(v: u64) -> Self {
        i64::try_from(v).map_or(ParamValue::Unsigned(v), ParamValue::Integer)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

impl From<String> for ParamValue {
    fn from(v: String) -> Self {
        ParamValue::Text(v)
    }
}

/// A computed number, optionally with the published value it reproduces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub label: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paper_value: Option<f64>,
}

impl Quantity {
    pub fn deviation(&self) -> Option<f64> {
        self.paper_value.map(|p| self.value - p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `measured < threshold`.
    Below,
    /// `measured ≤ threshold`.
    AtMost,
    /// `measured > threshold`.
    Above,
}

impl Comparison {
    pub fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Comparison::Below => measured < threshold,
            Comparison::AtMost => measured <= threshold,
            Comparison::Above => measured > threshold,
        }
    }
}

/// A pass/fail decision and the numbers it was derived from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub comparison: Comparison,
}

/// Structured output of one scenario run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub parameters: BTreeMap<String, ParamValue>,
    pub gaussian_factors: Vec<Quantity>,
    pub diagnostics: Vec<Quantity>,
    pub verdicts: Vec<Verdict>,
    /// Maps a reported label to the published quantity it reproduces, or
    /// explains how it was obtained.
    pub provenance: BTreeMap<String, String>,
}

impl ScenarioReport {
    pub fn new(scenario: &str) -> Self {
        Self {
            scenario: scenario.to_string(),
            ..Default::default()
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<ParamValue>) -> &mut Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn factor(&mut self, label: &str, value: f64, paper_value: Option<f64>) -> &mut Self {
        self.gaussian_factors.push(Quantity {
            label: label.to_string(),
            value,
            paper_value,
        });
        self
    }

    pub fn diag(&mut self, label: &str, value: f64) -> &mut Self {
        self.diag_ref(label, value, None)
    }

    pub fn diag_ref(&mut self, label: &str, value: f64, paper_value: Option<f64>) -> &mut Self {
        self.diagnostics.push(Quantity {
            label: label.to_string(),
            value,
            paper_value,
        });
        self
    }

    pub fn verdict(
        &mut self,
        label: &str,
        measured: f64,
        comparison: Comparison,
        threshold: f64,
    ) -> &mut Self {
        self.verdicts.push(Verdict {
            label: label.to_string(),
            passed: comparison.holds(measured, threshold),
            measured,
            threshold,
            comparison,
        });
        self
    }

    pub fn note(&mut self, key: &str, text: impl Into<String>) -> &mut Self {
        self.provenance.insert(key.to_string(), text.into());
        self
    }

    /// Looks a label up among factors, then diagnostics.
    pub fn value(&self, label: &str) -> Option<f64> {
        self.gaussian_factors
            .iter()
            .chain(&self.diagnostics)
            .find(|q| q.label == label)
            .map(|q| q.value)
    }

    pub fn find_verdict(&self, label: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.label == label)
    }

    pub fn to_json(&self) -> Result<String> {
        let nonfinite = self
            .gaussian_factors
            .iter()
            .chain(&self.diagnostics)
            .find(|q| !q.value.is_finite());
        if let Some(q) = nonfinite {
            return Err(Error::Model(format!("{} is not finite", q.label)));
        }
        serde_json::to_string_pretty(self).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))
    }

    /// One row per parameter, factor, diagnostic and verdict with columns
    /// `label,value,paper_value,deviation,tag`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Model(e.to_string());
        w.write_record(["label", "value", "paper_value", "deviation", "tag"])
            .map_err(err)?;
        for (k, v) in &self.parameters {
            let value = match v {
                ParamValue::Integer(i) => i.to_string(),
                ParamValue::Unsigned(u) => u.to_string(),
                ParamValue::Number(x) => x.to_string(),
                ParamValue::Text(s) => s.clone(),
            };
            w.write_record([k.as_str(), &value, "", "", "parameter"]).map_err(err)?;
        }
        for (tag, list) in [("gaussian_factor", &self.gaussian_factors), ("diagnostic", &self.diagnostics)] {
            for q in list {
                let paper = q.paper_value.map(|p| p.to_string()).unwrap_or_default();
                let dev = q.deviation().map(|d| d.to_string()).unwrap_or_default();
                w.write_record([q.label.as_str(), &q.value.to_string(), &paper, &dev, tag])
                    .map_err(err)?;
            }
        }
        for v in &self.verdicts {
            let passed = if v.passed { "1" } else { "0" };
            w.write_record([v.label.as_str(), passed, "", "", "verdict"]).map_err(err)?;
            let measured = format!("{}.measured", v.label);
            w.write_record([measured.as_str(), &v.measured.to_string(), "", "", "verdict"])
                .map_err(err)?;
            let threshold = format!("{}.threshold", v.label);
            w.write_record([threshold.as_str(), &v.threshold.to_string(), "", "", "verdict"])
                .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Model(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Model(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ScenarioReport {
        let mut r = ScenarioReport::new("demo");
        r.param("lambda", 1.0)
            .param("n", 12usize)
            .param("preset", "paper")
            .factor("smallest", (-0.0625f64).exp(), Some(0.939))
            .diag("fidelity", 0.1 + 0.2)
            .verdict("ok", 0.01, Comparison::Below, 0.05)
            .note("fidelity", "closed form");
        r
    }

    #[test]
    fn json_round_trip_is_exact() {
        let r = sample();
        let back = ScenarioReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.value("fidelity"), Some(0.1 + 0.2));
    }

    #[test]
    fn csv_has_fixed_columns_and_exact_values() {
        let csv = sample().to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("label,value,paper_value,deviation,tag"));
        let row = csv.lines().find(|l| l.starts_with("fidelity")).unwrap();
        let value: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(value, 0.1 + 0.2);
        assert!(csv.contains("ok,1,,,verdict"));
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let mut r = ScenarioReport::new("bad");
        r.diag("x", f64::NAN);
        assert!(r.to_json().is_err());
    }
}
