//! Experiment reports and their JSON / CSV forms.
//!
//! Floats are written with 17 significant digits, which is enough for every
//! `f64` to read back bit-for-bit. Non-finite values become `null` and read
//! back as NaN.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        })
    }
}

/// A named comparison of one metric against a threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub metric: String,
    pub relation: Relation,
    #[serde(with = "float17")]
    pub threshold: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    #[serde(with = "float17::map")]
    pub metrics: BTreeMap<String, f64>,
    #[serde(with = "float17::option")]
    pub bound: Option<f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(with = "float17")]
    pub runtime_ms: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>, seed: u64) -> Self {
        ExperimentReport {
            name: name.into(),
            params: BTreeMap::new(),
            seed,
            metrics: BTreeMap::new(),
            bound: None,
            checks: Vec::new(),
            passed: true,
            runtime_ms: 0.0,
            notes: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn metric(&mut self, key: &str, value: f64) -> &mut Self {
        self.metrics.insert(key.to_string(), value);
        self.evaluate();
        self
    }

    pub fn bound(&mut self, value: f64) -> &mut Self {
        self.bound = Some(value);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn check_at_most(&mut self, name: &str, metric: &str, threshold: f64) -> &mut Self {
        self.add_check(name, metric, Relation::AtMost, threshold)
    }

    pub fn check_at_least(&mut self, name: &str, metric: &str, threshold: f64) -> &mut Self {
        self.add_check(name, metric, Relation::AtLeast, threshold)
    }

    fn add_check(&mut self, name: &str, metric: &str, relation: Relation, threshold: f64) -> &mut Self {
        self.checks.retain(|c| c.name != name);
        self.checks.push(Check { name: name.into(), metric: metric.into(), relation, threshold, holds: false });
        self.evaluate();
        self
    }

    /// Recomputes every check and the overall flag from the metrics.
    pub fn evaluate(&mut self) {
        for c in &mut self.checks {
            c.holds = match self.metrics.get(&c.metric) {
                Some(&v) if v.is_finite() => match c.relation {
                    Relation::AtMost => v <= c.threshold,
                    Relation::AtLeast => v >= c.threshold,
                },
                _ => false,
            };
        }
        self.passed = self.checks.iter().all(|c| c.holds);
    }

    pub fn get(&self, metric: &str) -> Option<f64> {
        self.metrics.get(metric).copied()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Whether the named check exists and holds.
    pub fn holds(&self, name: &str) -> bool {
        self.check(name).is_some_and(|c| c.holds)
    }

    /// Copies metrics and checks from `other` under `prefix.`.
    pub fn absorb(&mut self, prefix: &str, other: &ExperimentReport) -> &mut Self {
        for (k, v) in &other.metrics {
            self.metrics.insert(format!("{prefix}.{k}"), *v);
        }
        for c in &other.checks {
            self.checks.push(Check { name: format!("{prefix}.{}", c.name), metric: format!("{prefix}.{}", c.metric), ..c.clone() });
        }
        for n in &other.notes {
            if !self.notes.contains(n) {
                self.notes.push(n.clone());
            }
        }
        self.evaluate();
        self
    }

    /// Metrics and checks with the timing stripped, for reproducibility checks.
    pub fn fingerprint(&self) -> ExperimentReport {
        ExperimentReport { runtime_ms: 0.0, ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Flat projection: one row per metric.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["experiment", "seed", "metric", "value"]).expect("in-memory write");
        for (k, v) in &self.metrics {
            w.write_record([self.name.as_str(), &self.seed.to_string(), k, &float17::format(*v)]).expect("in-memory write");
        }
        if let Some(b) = self.bound {
            w.write_record([self.name.as_str(), &self.seed.to_string(), "bound", &float17::format(b)]).expect("in-memory write");
        }
        let passed = if self.passed { "1" } else { "0" };
        w.write_record([self.name.as_str(), &self.seed.to_string(), "passed", passed]).expect("in-memory write");
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    /// One line: name, verdict, and each check.
    pub fn summary(&self) -> String {
        let checks: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                let v = self.get(&c.metric).map(float17::short).unwrap_or_else(|| "missing".into());
                format!("{}{} {} {} {}", if c.holds { "" } else { "!" }, c.name, v, c.relation, float17::short(c.threshold))
            })
            .collect();
        format!("{} [{}] {}", self.name, if self.passed { "PASS" } else { "FAIL" }, checks.join("; "))
    }
}

pub mod float17 {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::value::RawValue;

    pub fn format(x: f64) -> String {
        format!("{x:.16e}")
    }

    pub fn short(x: f64) -> String {
        if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e6) {
            format!("{x:.3e}")
        } else {
            format!("{x:.6}")
        }
    }

    /// Finite values as 17-digit numbers; inf, -inf and NaN as strings.
    fn raw(x: f64) -> Box<RawValue> {
        let text = if x.is_finite() {
            format(x)
        } else if x.is_nan() {
            "\"NaN\"".into()
        } else if x > 0.0 {
            "\"inf\"".into()
        } else {
            "\"-inf\"".into()
        };
        RawValue::from_string(text).expect("valid JSON value")
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Wire {
        Number(f64),
        Text(String),
        Null(()),
    }

    impl Wire {
        fn value<E: serde::de::Error>(self) -> Result<f64, E> {
            match self {
                Wire::Number(x) => Ok(x),
                Wire::Null(()) => Ok(f64::NAN),
                Wire::Text(t) => match t.as_str() {
                    "NaN" => Ok(f64::NAN),
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    other => Err(E::custom(format!("not a number: {other}"))),
                },
            }
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        raw(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Wire::deserialize(d)?.value()
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Option::<Wire>::deserialize(d)?.map(Wire::value).transpose()
        }
    }

    pub mod map {
        use std::collections::BTreeMap;

        use super::*;

        pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
            let raw: BTreeMap<&String, Box<RawValue>> = m.iter().map(|(k, v)| (k, super::raw(*v))).collect();
            raw.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
            let m = BTreeMap::<String, Wire>::deserialize(d)?;
            if m.keys().any(|k| k.is_empty()) {
                return Err(D::Error::custom("empty metric name"));
            }
            m.into_iter().map(|(k, v)| Ok((k, v.value()?))).collect()
        }
    }
}
