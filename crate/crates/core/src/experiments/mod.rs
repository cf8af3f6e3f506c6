//! Numerical verification drivers and their reports.
//!
//! Every driver returns a [`VerificationReport`]: one [`CaseRecord`] per
//! checked inequality or identity, each carrying the measured value, the
//! bound it is compared against and the outcome. Bounds for inequalities with
//! unnamed constants come from fixture files produced by [`calibrate`].

pub mod atoms;
pub mod calibrate;
pub mod counterexample;
pub mod fixtures;
pub mod kernel_checks;
pub mod oracle;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::group::{GeneratorSequence, GroupSpec};
use crate::io::write_atomic;

pub use fixtures::{Fixture, FixtureStore};

/// How a measured value is compared against its bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    /// `|measured - bound| <= tolerance`; the tolerance is a parameter.
    #[serde(rename = "~")]
    Near,
    /// Recorded only; always passes.
    #[serde(rename = "info")]
    Info,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Near => "~",
            Relation::Info => "info",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case: String,
    pub params: BTreeMap<String, Value>,
    pub measured: f64,
    pub bound: Option<f64>,
    pub relation: Relation,
    pub pass: bool,
}

impl CaseRecord {
    fn new(
        case: impl Into<String>,
        measured: f64,
        bound: Option<f64>,
        relation: Relation,
        pass: bool,
    ) -> Self {
        Self {
            case: case.into(),
            params: BTreeMap::new(),
            measured,
            bound,
            relation,
            pass,
        }
    }

    pub fn at_most(case: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(
            case,
            measured,
            Some(bound),
            Relation::AtMost,
            measured <= bound,
        )
    }

    pub fn at_least(case: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(
            case,
            measured,
            Some(bound),
            Relation::AtLeast,
            measured >= bound,
        )
    }

    pub fn near(case: impl Into<String>, measured: f64, target: f64, tol: f64) -> Self {
        Self::new(
            case,
            measured,
            Some(target),
            Relation::Near,
            (measured - target).abs() <= tol,
        )
        .with("tol", tol)
    }

    pub fn flag(case: impl Into<String>, ok: bool) -> Self {
        Self::new(
            case,
            if ok { 1.0 } else { 0.0 },
            Some(1.0),
            Relation::Near,
            ok,
        )
        .with("tol", 0.0)
    }

    pub fn info(case: impl Into<String>, measured: f64) -> Self {
        Self::new(case, measured, None, Relation::Info, true)
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    fn params_text(&self) -> String {
        self.params
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}={s}"),
                other => format!("{k}={other}"),
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub experiment: String,
    pub group: GroupSpec,
    pub parameters: BTreeMap<String, Value>,
    pub cases: Vec<CaseRecord>,
    /// Headline measured quantities.
    pub summary: BTreeMap<String, Value>,
    pub fixtures: Vec<Fixture>,
    pub notes: Vec<String>,
    pub pass: bool,
    pub runtime_ms: f64,
    /// Filled in by front ends that know how the run was configured.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config: Option<Value>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    experiment: &'a str,
    case: &'a str,
    params: String,
    measured: f64,
    bound: Option<f64>,
    relation: &'static str,
    pass: bool,
}

impl VerificationReport {
    pub fn new(experiment: &str, g: &GeneratorSequence) -> Self {
        Self {
            experiment: experiment.to_string(),
            group: g.clone().into(),
            parameters: BTreeMap::new(),
            cases: Vec::new(),
            summary: BTreeMap::new(),
            fixtures: Vec::new(),
            notes: Vec::new(),
            pass: true,
            runtime_ms: 0.0,
            config: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn record(&mut self, case: CaseRecord) -> &mut Self {
        if !case.pass {
            log::warn!(
                "{}: case '{}' failed ({})",
                self.experiment,
                case.case,
                case.params_text()
            );
        }
        self.pass &= case.pass;
        self.cases.push(case);
        self
    }

    pub fn summarize(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.summary.insert(key.to_string(), value.into());
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn use_fixture(&mut self, f: &Fixture) -> f64 {
        self.fixtures.push(f.clone());
        f.value
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseRecord> {
        self.cases.iter().filter(|c| !c.pass)
    }

    /// One row per case; runtime is left out so reruns give identical bytes.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.cases {
            w.serialize(CsvRow {
                experiment: &self.experiment,
                case: &c.case,
                params: c.params_text(),
                measured: c.measured,
                bound: c.bound,
                relation: c.relation.symbol(),
                pass: c.pass,
            })?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| crate::error::Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `<stem>.json` and `<stem>.csv` atomically.
    pub fn write(&self, stem: &Path) -> Result<()> {
        write_atomic(&stem.with_extension("json"), self.to_json()?.as_bytes())?;
        write_atomic(&stem.with_extension("csv"), self.to_csv()?.as_bytes())
    }
}

/// Runs `body` and stamps the elapsed wall time on its report.
pub(crate) fn timed(
    body: impl FnOnce() -> Result<VerificationReport>,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut report = body()?;
    report.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Short tag for a group, used in fixture names: the shortest period of its
/// radices, e.g. `m2`, `m2-3`.
pub fn group_tag(g: &GeneratorSequence) -> String {
    let r = g.radices();
    let period = (1..=r.len())
        .find(|&p| (p..r.len()).all(|i| r[i] == r[i - p]))
        .unwrap_or(r.len());
    let parts: Vec<String> = r[..period].iter().map(|m| m.to_string()).collect();
    format!("m{}", parts.join("-"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags() {
        assert_eq!(group_tag(&GeneratorSequence::walsh(9).unwrap()), "m2");
        assert_eq!(
            group_tag(&GeneratorSequence::periodic(&[2, 3], 6).unwrap()),
            "m2-3"
        );
        assert_eq!(
            group_tag(&GeneratorSequence::new(&[3, 2, 2], 3).unwrap()),
            "m3-2-2"
        );
    }

    #[test]
    fn csv_is_stable_and_excludes_runtime() {
        let g = GeneratorSequence::walsh(3).unwrap();
        let mut r = VerificationReport::new("demo", &g);
        r.record(
            CaseRecord::at_most("bound", 1.5, 2.0)
                .with("n", 3)
                .with("conv", "lagged"),
        );
        r.record(CaseRecord::info("note", 0.25));
        let a = r.to_csv().unwrap();
        r.runtime_ms = 123.0;
        assert_eq!(a, r.to_csv().unwrap());
        assert!(a.starts_with("experiment,case,params,measured,bound,relation,pass\n"));
        assert!(a.contains("demo,bound,conv=lagged;n=3,1.5,2.0,<=,true"));
        assert!(r.pass);
        r.record(CaseRecord::at_least("lower", 0.1, 0.2));
        assert!(!r.pass);
        assert_eq!(r.failures().count(), 1);
    }
}
