use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;

use crate::error::CliError;

/// How `measured` is compared with `target` and `tolerance`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// |measured − target| ≤ tolerance
    Abs,
    /// |measured − target| ≤ tolerance·|target|
    Rel,
    /// measured ≤ tolerance
    AtMost,
    /// measured ≥ tolerance
    AtLeast,
    /// measured > tolerance
    Above,
    /// measured is 1 for true
    Holds,
    /// recorded, never fails
    Info,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Abs => "abs",
            Relation::Rel => "rel",
            Relation::AtMost => "le",
            Relation::AtLeast => "ge",
            Relation::Above => "gt",
            Relation::Holds => "holds",
            Relation::Info => "info",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub parameters: String,
    pub measured: f64,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub relation: Relation,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, parameters: &str, measured: f64, target: Option<f64>, tolerance: Option<f64>, relation: Relation, pass: bool) -> Self {
        Self { name: name.into(), parameters: parameters.into(), measured, target, tolerance, relation, pass }
    }

    pub fn abs(name: &str, parameters: &str, measured: f64, target: f64, tol: f64) -> Self {
        Self::new(name, parameters, measured, Some(target), Some(tol), Relation::Abs, (measured - target).abs() <= tol)
    }

    pub fn rel(name: &str, parameters: &str, measured: f64, target: f64, tol: f64) -> Self {
        let pass = (measured - target).abs() <= tol * target.abs();
        Self::new(name, parameters, measured, Some(target), Some(tol), Relation::Rel, pass)
    }

    pub fn at_most(name: &str, parameters: &str, measured: f64, bound: f64) -> Self {
        Self::new(name, parameters, measured, None, Some(bound), Relation::AtMost, measured <= bound)
    }

    pub fn at_least(name: &str, parameters: &str, measured: f64, bound: f64) -> Self {
        Self::new(name, parameters, measured, None, Some(bound), Relation::AtLeast, measured >= bound)
    }

    pub fn above(name: &str, parameters: &str, measured: f64, bound: f64) -> Self {
        Self::new(name, parameters, measured, None, Some(bound), Relation::Above, measured > bound)
    }

    pub fn holds(name: &str, parameters: &str, ok: bool) -> Self {
        Self::new(name, parameters, if ok { 1.0 } else { 0.0 }, None, None, Relation::Holds, ok)
    }

    pub fn info(name: &str, parameters: &str, measured: f64) -> Self {
        Self::new(name, parameters, measured, None, None, Relation::Info, true)
    }
}

/// One criterion or experiment run: a summary plus its checks.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: String,
    pub title: String,
    pub checks: Vec<Check>,
    pub runtime_s: f64,
    pub error: Option<String>,
}

impl Outcome {
    /// Runs `f`, timing it; a library error becomes a failed outcome.
    pub fn run(id: &str, title: &str, f: impl FnOnce() -> Result<Vec<Check>, CliError>) -> Self {
        let start = Instant::now();
        let res = f();
        let runtime_s = start.elapsed().as_secs_f64();
        let (checks, error) = match res {
            Ok(c) => (c, None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        Self { id: id.into(), title: title.into(), checks, runtime_s, error }
    }

    pub fn pass(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// A flat row of the CSV detail file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub experiment: String,
    pub criterion: String,
    pub kind: &'static str,
    pub check: String,
    pub parameters: String,
    pub measured: f64,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub relation: &'static str,
    pub pass: bool,
    pub runtime_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub name: String,
    pub outcomes: Vec<Outcome>,
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

impl Report {
    pub fn new(name: &str, outcomes: Vec<Outcome>) -> Self {
        Self { name: name.into(), outcomes }
    }

    pub fn pass(&self) -> bool {
        self.outcomes.iter().all(Outcome::pass)
    }

    pub fn outcome(&self, id: &str) -> Option<&Outcome> {
        self.outcomes.iter().find(|o| o.id == id)
    }

    /// One summary row per outcome followed by its detail rows.
    pub fn rows(&self) -> Vec<ReportRow> {
        let mut rows = Vec::new();
        for o in &self.outcomes {
            let passed = o.checks.iter().filter(|c| c.pass).count();
            rows.push(ReportRow {
                experiment: self.name.clone(),
                criterion: o.id.clone(),
                kind: "summary",
                check: o.title.clone(),
                parameters: o.error.clone().unwrap_or_default(),
                measured: passed as f64,
                target: Some(o.checks.len() as f64),
                tolerance: None,
                relation: "passed_of",
                pass: o.pass(),
                runtime_s: o.runtime_s,
            });
            if let Some(e) = &o.error {
                rows.push(ReportRow {
                    experiment: self.name.clone(),
                    criterion: o.id.clone(),
                    kind: "detail",
                    check: "error".into(),
                    parameters: e.clone(),
                    measured: f64::NAN,
                    target: None,
                    tolerance: None,
                    relation: "holds",
                    pass: false,
                    runtime_s: 0.0,
                });
            }
            for c in &o.checks {
                rows.push(ReportRow {
                    experiment: self.name.clone(),
                    criterion: o.id.clone(),
                    kind: "detail",
                    check: c.name.clone(),
                    parameters: c.parameters.clone(),
                    measured: c.measured,
                    target: c.target,
                    tolerance: c.tolerance,
                    relation: c.relation.as_str(),
                    pass: c.pass,
                    runtime_s: 0.0,
                });
            }
        }
        rows
    }

    /// CSV without runtimes, so equal inputs give equal bytes.
    pub fn csv_body(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["experiment", "criterion", "kind", "check", "parameters", "measured", "target", "tolerance", "relation", "pass"])
            .expect("in-memory write");
        for r in self.rows() {
            let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
            w.write_record([
                r.experiment,
                r.criterion,
                r.kind.to_string(),
                r.check,
                r.parameters,
                num(r.measured),
                opt(r.target),
                opt(r.tolerance),
                r.relation.to_string(),
                r.pass.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn summary_json(&self) -> serde_json::Value {
        let generated = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        json!({
            "experiment": self.name,
            "generated_unix": generated,
            "pass": self.pass(),
            "criteria": self.outcomes.iter().map(|o| json!({
                "id": o.id,
                "title": o.title,
                "pass": o.pass(),
                "checks": o.checks.len(),
                "failed": o.failed_checks().map(|c| c.name.clone()).collect::<Vec<_>>(),
                "error": o.error,
                "runtime_s": o.runtime_s,
            })).collect::<Vec<_>>(),
        })
    }

    /// Writes `<name>.csv` (timestamp only in the leading comment line) and
    /// `<name>.summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let io = |p: &Path| {
            let path = p.display().to_string();
            move |source| CliError::Output { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let generated = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let csv_path = dir.join(format!("{}.csv", self.name));
        std::fs::write(&csv_path, format!("# generated_unix={generated}\n{}", self.csv_body())).map_err(io(&csv_path))?;
        let json_path = dir.join(format!("{}.summary.json", self.name));
        let text = serde_json::to_string_pretty(&self.summary_json()).expect("summary serializes");
        std::fs::write(&json_path, text + "\n").map_err(io(&json_path))?;
        Ok(())
    }

    /// Human-readable lines: one per outcome, failing checks indented below.
    pub fn render(&self, verbose: bool) -> String {
        let mut out = String::new();
        for o in &self.outcomes {
            let status = if o.pass() { "PASS" } else { "FAIL" };
            out += &format!("{:<4} {status}  {}  ({:.2} s)\n", o.id, o.title, o.runtime_s);
            if let Some(e) = &o.error {
                out += &format!("       error: {e}\n");
            }
            for c in &o.checks {
                if verbose || !c.pass {
                    out += &format!("       {} {}: {}", if c.pass { "ok " } else { "BAD" }, c.name, num(c.measured));
                    match (c.relation, c.target, c.tolerance) {
                        (Relation::Info | Relation::Holds, _, _) => {}
                        (r, Some(t), Some(tol)) => out += &format!(" vs {} ({} {})", num(t), r.as_str(), num(tol)),
                        (r, None, Some(tol)) => out += &format!(" ({} {})", r.as_str(), num(tol)),
                        _ => {}
                    }
                    if !c.parameters.is_empty() {
                        out += &format!("  [{}]", c.parameters);
                    }
                    out += "\n";
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(Check::abs("a", "", 1.0, 1.05, 0.1).pass);
        assert!(!Check::rel("a", "", 1.0, 1.05, 0.01).pass);
        assert!(Check::at_most("a", "", 1.0, 1.0).pass);
        assert!(!Check::above("a", "", 1.0, 1.0).pass);
        assert!(!Check::at_least("a", "", f64::NAN, 0.0).pass);
        assert!(Check::info("a", "", f64::NAN).pass);
    }

    #[test]
    fn one_summary_row_per_outcome() {
        let ok = Outcome::run("A0", "demo", || Ok(vec![Check::holds("x", "", true), Check::info("y", "p", 2.5)]));
        let bad = Outcome::run("A9", "broken", || Err(CliError::Config("nope".into())));
        let r = Report::new("demo", vec![ok, bad]);
        let rows = r.rows();
        assert_eq!(rows.iter().filter(|r| r.kind == "summary").count(), 2);
        assert_eq!(rows.len(), 2 + 2 + 1);
        assert!(!r.pass());
        let body = r.csv_body();
        assert!(body.starts_with("experiment,criterion,kind"));
        assert_eq!(body.lines().count(), 6);
    }
}
