//! Bundled example configurations with stored expected values.

use std::fmt::Write as _;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::Value;

use crate::job::{run, Job};

pub const BUNDLED: &str = include_str!("../suite/examples.json");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub name: String,
    pub job: Job,
    #[serde(default)]
    pub exit: i32,
    pub expect: Vec<Expect>,
}

/// One golden check against the report. Paths are JSON pointers into the report.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expect {
    /// Weight at a support point of the design at `design` (default `/result/design`).
    WeightAt {
        x: Vec<f64>,
        w: f64,
        tol: f64,
        #[serde(default)]
        design: Option<String>,
    },
    /// Every support point of the design lies within `tol` of one of `points`.
    SupportWithin {
        points: Vec<Vec<f64>>,
        tol: f64,
        #[serde(default)]
        design: Option<String>,
    },
    /// Array length at `path`.
    Count { path: String, count: usize },
    Approx { path: String, value: f64, tol: f64 },
    AtMost { path: String, value: f64 },
    Equals { path: String, value: Value },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

pub fn parse(text: &str) -> Result<Vec<Entry>> {
    serde_json::from_str(text).context("malformed example suite")
}

fn at<'a>(report: &'a Value, path: &str) -> std::result::Result<&'a Value, String> {
    report.pointer(path).ok_or_else(|| format!("{path} missing"))
}

fn atoms(report: &Value, design: &Option<String>) -> std::result::Result<Vec<(Vec<f64>, f64)>, String> {
    let path = design.as_deref().unwrap_or("/result/design");
    let list = at(report, &format!("{path}/atoms"))?.as_array().ok_or_else(|| format!("{path}/atoms is not an array"))?;
    list.iter()
        .map(|a| {
            let x: Vec<f64> = serde_json::from_value(a["x"].clone()).map_err(|e| e.to_string())?;
            let w = a["w"].as_f64().ok_or("atom without weight")?;
            Ok((x, w))
        })
        .collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl Expect {
    fn check(&self, report: &Value) -> std::result::Result<(), String> {
        match self {
            Expect::WeightAt { x, w, tol, design } => {
                let atoms = atoms(report, design)?;
                let found = atoms.iter().find(|(p, _)| dist(p, x) <= 1e-9).map_or(0.0, |a| a.1);
                if (found - w).abs() <= *tol {
                    Ok(())
                } else {
                    Err(format!("weight at {x:?} is {found}, expected {w} +- {tol}"))
                }
            }
            Expect::SupportWithin { points, tol, design } => {
                for (p, _) in atoms(report, design)? {
                    let d = points.iter().map(|q| dist(&p, q)).fold(f64::INFINITY, f64::min);
                    if d > *tol {
                        return Err(format!("support point {p:?} is {d} away from the expected set"));
                    }
                }
                Ok(())
            }
            Expect::Count { path, count } => {
                let n = at(report, path)?.as_array().map(Vec::len).ok_or_else(|| format!("{path} is not an array"))?;
                if n == *count {
                    Ok(())
                } else {
                    Err(format!("{path} has {n} entries, expected {count}"))
                }
            }
            Expect::Approx { path, value, tol } => {
                let v = at(report, path)?.as_f64().ok_or_else(|| format!("{path} is not a number"))?;
                if (v - value).abs() <= *tol {
                    Ok(())
                } else {
                    Err(format!("{path} = {v}, expected {value} +- {tol}"))
                }
            }
            Expect::AtMost { path, value } => {
                let v = at(report, path)?.as_f64().ok_or_else(|| format!("{path} is not a number"))?;
                if v <= *value {
                    Ok(())
                } else {
                    Err(format!("{path} = {v}, expected at most {value}"))
                }
            }
            Expect::Equals { path, value } => {
                let v = at(report, path)?;
                if v == value {
                    Ok(())
                } else {
                    Err(format!("{path} = {v}, expected {value}"))
                }
            }
        }
    }
}

pub fn run_entry(e: &Entry) -> Row {
    let fail = |detail: String| Row { name: e.name.clone(), passed: false, detail };
    let out = match run(&e.job) {
        Ok(o) => o,
        Err(err) if e.exit == 2 => return Row { name: e.name.clone(), passed: true, detail: format!("rejected: {err:#}") },
        Err(err) => return fail(format!("error: {err:#}")),
    };
    let code = out.status.exit_code();
    if code != e.exit {
        return fail(format!("exit {code}, expected {}", e.exit));
    }
    for x in &e.expect {
        if let Err(msg) = x.check(&out.report) {
            return fail(msg);
        }
    }
    Row { name: e.name.clone(), passed: true, detail: format!("{} checks", e.expect.len()) }
}

/// `*` matches any run of characters, `?` a single one.
pub fn matches(pattern: &str, name: &str) -> bool {
    glob::Pattern::new(pattern).map(|p| p.matches(name)).unwrap_or(false)
}

/// Runs the selected entries in parallel; rows come back in suite order.
pub fn run_suite(entries: &[Entry], filter: Option<&str>) -> Vec<Row> {
    let selected: Vec<&Entry> = entries.iter().filter(|e| filter.is_none_or(|f| matches(f, &e.name))).collect();
    selected.par_iter().map(|e| run_entry(e)).collect()
}

pub fn table(rows: &[Row]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let mut out = String::new();
    let _ = writeln!(out, "{:width$}  result  detail", "name");
    for r in rows {
        let _ = writeln!(out, "{:width$}  {:6}  {}", r.name, if r.passed { "pass" } else { "FAIL" }, r.detail);
    }
    let passed = rows.iter().filter(|r| r.passed).count();
    let _ = writeln!(out, "{passed}/{} passed", rows.len());
    out
}
