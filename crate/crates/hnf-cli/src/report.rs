//! Report envelope shared by every subcommand.
//!
//! Reports carry no timings or host details, so two runs with the same
//! arguments produce identical bytes. Exact coefficients are written as
//! canonical strings.

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub check: String,
    pub params: Value,
    pub n_range: Option<[usize; 2]>,
    pub first_failure: Option<usize>,
    /// Per-index slack; nonnegative where the check holds, `null` when unbounded.
    pub margins: Vec<Option<f64>>,
    pub pass: bool,
}

impl Check {
    pub fn new(check: &str, params: Value) -> Self {
        Self { check: check.into(), params, n_range: None, first_failure: None, margins: Vec::new(), pass: true }
    }

    /// A check over indices `lo..=hi`, one pass flag and margin per index.
    pub fn over(check: &str, params: Value, lo: usize, outcomes: &[(bool, Option<f64>)]) -> Self {
        let first_failure = outcomes.iter().position(|(ok, _)| !ok).map(|k| lo + k);
        Self {
            check: check.into(),
            params,
            n_range: (!outcomes.is_empty()).then(|| [lo, lo + outcomes.len() - 1]),
            first_failure,
            margins: outcomes.iter().map(|(_, m)| m.filter(|m| m.is_finite())).collect(),
            pass: first_failure.is_none(),
        }
    }

    pub fn single(check: &str, params: Value, pass: bool, margin: Option<f64>) -> Self {
        Self {
            check: check.into(),
            params,
            n_range: None,
            first_failure: (!pass).then_some(0),
            margins: vec![margin.filter(|m| m.is_finite())],
            pass,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CsvFile {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub params: Value,
    pub checks: Vec<Check>,
    pub result: Value,
    pub csv: Vec<CsvFile>,
    pub ledger: Option<Value>,
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    command: &'a str,
    params: &'a Value,
    checks: &'a [Check],
    failures: Vec<&'a str>,
    result: &'a Value,
}

impl Report {
    pub fn new(command: &str, params: Value) -> Self {
        Self { command: command.into(), params, checks: Vec::new(), result: Value::Null, csv: Vec::new(), ledger: None }
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.check.as_str()).collect()
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        let env = Envelope {
            schema_version: SCHEMA_VERSION,
            command: &self.command,
            params: &self.params,
            checks: &self.checks,
            failures: self.failures(),
            result: &self.result,
        };
        let mut s = serde_json::to_string_pretty(&env)?;
        s.push('\n');
        Ok(s)
    }

    pub fn ledger_json(&self) -> Result<Option<String>, serde_json::Error> {
        self.ledger
            .as_ref()
            .map(|entries| {
                let v = serde_json::json!({ "schema_version": SCHEMA_VERSION, "entries": entries });
                serde_json::to_string_pretty(&v).map(|mut s| {
                    s.push('\n');
                    s
                })
            })
            .transpose()
    }

    pub fn add_csv<R: IntoIterator<Item = Vec<String>>>(
        &mut self,
        name: &str,
        header: &[&str],
        rows: R,
    ) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        self.csv.push(CsvFile { name: name.into(), contents: String::from_utf8(bytes).expect("csv is utf-8") });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn over_locates_first_failure() {
        let c = Check::over("x", json!({}), 2, &[(true, Some(1.0)), (false, Some(-0.5)), (false, None)]);
        assert_eq!(c.n_range, Some([2, 4]));
        assert_eq!(c.first_failure, Some(3));
        assert!(!c.pass);
        assert_eq!(c.margins, vec![Some(1.0), Some(-0.5), None]);
    }

    #[test]
    fn envelope_lists_failures() {
        let mut r = Report::new("demo", json!({"n": 1}));
        r.checks.push(Check::single("good", json!({}), true, Some(0.0)));
        r.checks.push(Check::single("bad", json!({}), false, Some(f64::INFINITY)));
        let v: Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["failures"], json!(["bad"]));
        assert_eq!(v["checks"][1]["margins"], json!([null]));
        assert!(!r.passed());
    }

    #[test]
    fn csv_quotes_fields() {
        let mut r = Report::new("demo", json!({}));
        r.add_csv("a.csv", &["k", "v"], vec![vec!["1".into(), "x,y".into()]]).unwrap();
        assert_eq!(r.csv[0].contents, "k,v\n1,\"x,y\"\n");
    }
}
