//! A single command with its inputs, shared by the CLI and the example suite.

use anyhow::{anyhow, bail, Result};
use optdesign_core::conditional::{conditional_audit, decompose, find_dominator, product_audit, recompose_check, Budget, Verdict};
use optdesign_core::{
    certify, garza_report, polytope_report, round_to_n, solve, Criterion, InitDesign, SolverOptions,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::files::{design_from_json, exact_design_json, parse_slice_map, LoadedModel, ModelFile};
use crate::report::{self, envelope, trace_csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Solve,
    Certify,
    Geometry,
    Garza,
    Audit,
    Decompose,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Certify => "certify",
            Command::Geometry => "geometry",
            Command::Garza => "garza",
            Command::Audit => "audit",
            Command::Decompose => "decompose",
        }
    }
}

/// Everything a command reads. Its canonical JSON is what the config hash covers.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Job {
    pub command: Command,
    pub model: ModelFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_design: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice_map: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub product: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_tol: Option<f64>,
}

impl Job {
    pub fn new(command: Command, model: ModelFile) -> Self {
        Job {
            command,
            model,
            criterion: None,
            max_iters: None,
            tol: None,
            seed: None,
            init_design: None,
            round: None,
            design: None,
            slice_map: None,
            product: false,
            budget: None,
            norm_tol: None,
        }
    }
}

/// How a finished command maps onto the exit-code contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The result is a validation failure even though a report exists
    /// (sensitivity not slack at a truncated boundary).
    Invalid,
    /// Solver budget exhausted or admissibility search inconclusive.
    Inconclusive,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Invalid => 2,
            Status::Inconclusive => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    /// `(file name, contents)` of per-candidate traces.
    pub traces: Vec<(String, String)>,
    pub status: Status,
    pub diagnostics: Vec<String>,
}

fn criterion(job: &Job) -> Result<Criterion> {
    Ok(job.criterion.as_deref().unwrap_or("D").parse()?)
}

fn design(job: &Job) -> Result<optdesign_core::Design> {
    design_from_json(job.design.as_ref().ok_or_else(|| anyhow!("{} needs a design", job.command.name()))?)
}

fn solver_options(job: &Job) -> Result<SolverOptions> {
    let mut o = SolverOptions::default();
    if let Some(n) = job.max_iters {
        o.max_outer_iters = n;
    }
    if let Some(t) = job.tol {
        o.kkt_tol = t;
    }
    if let Some(s) = job.seed {
        o.seed = s;
    }
    if let Some(d) = &job.init_design {
        o.init = InitDesign::User(design_from_json(d)?);
    }
    Ok(o)
}

fn budget(job: &Job) -> Budget {
    job.budget.map(Budget::with_steps).unwrap_or_default()
}

/// Certification tolerance: twice the solver's slack by default.
fn certify_tol(job: &Job) -> f64 {
    2.0 * job.tol.unwrap_or(SolverOptions::default().kkt_tol)
}

pub fn run(job: &Job) -> Result<Outcome> {
    let config = serde_json::to_value(job)?;
    let LoadedModel { model, candidates } = job.model.load()?;
    let mut traces = Vec::new();
    let mut diagnostics = Vec::new();
    let mut status = Status::Ok;
    let result = match job.command {
        Command::Solve => {
            let crit = criterion(job)?;
            let opts = solver_options(job)?;
            let r = solve(&model, &candidates, &crit, &opts)?;
            let cert = certify(&r.design, &model, &candidates, &crit, certify_tol(job))?;
            if !r.converged {
                status = Status::Inconclusive;
                diagnostics.push(format!("solver stopped after {} iterations with violation {:e}", r.iterations, r.max_sensitivity_violation));
            }
            if !cert.warnings.is_empty() {
                status = Status::Invalid;
                diagnostics.extend(cert.warnings.iter().cloned());
            }
            traces.push(("sensitivity.csv".into(), trace_csv(&candidates, "sensitivity", &cert.sensitivities)));
            let mut v = report::solve_json(&r);
            v["criterion"] = json!(crit.name());
            v["certify"] = report::certify_json(&cert);
            if let Some(n) = job.round {
                v["exact_design"] = exact_design_json(&round_to_n(&r.design, n)?);
            }
            v
        }
        Command::Certify | Command::Geometry => {
            let crit = criterion(job)?;
            let d = design(job)?;
            let cert = certify(&d, &model, &candidates, &crit, certify_tol(job))?;
            diagnostics.extend(cert.warnings.iter().cloned());
            traces.push(("sensitivity.csv".into(), trace_csv(&candidates, "sensitivity", &cert.sensitivities)));
            let mut v = json!({ "criterion": crit.name(), "certify": report::certify_json(&cert) });
            if job.command == Command::Geometry {
                if !cert.optimal {
                    bail!("geometry needs a certified-optimal design (max violation {:e})", cert.max_violation);
                }
                let poly = polytope_report(&cert.certificate, &d, &model, &candidates, certify_tol(job))?;
                v["polytope"] = report::polytope_json(&poly);
            }
            v
        }
        Command::Garza => {
            let g = garza_report(&model, &candidates, job.norm_tol.unwrap_or(1e-9))?;
            traces.push(("norms.csv".into(), trace_csv(&candidates, "norm_squared", &g.norm_values)));
            report::garza_json(&g)
        }
        Command::Audit => {
            let d = design(job)?;
            let b = budget(job);
            let (v, inconclusive) = match (&job.slice_map, job.product) {
                (Some(_), true) => bail!("audit takes either a slice map or --product"),
                (None, true) => {
                    let a = product_audit(&d, &model, &candidates, &b)?;
                    let inc = a.factors.iter().any(|f| f.verdict.verdict == Verdict::Inconclusive);
                    (json!({ "mode": "product", "product": report::product_json(&a) }), inc)
                }
                (Some(s), false) => {
                    let a = conditional_audit(&d, &parse_slice_map(s)?, &model, &candidates, &b)?;
                    let inc = a.verdict == Verdict::Inconclusive || a.evidence.iter().any(|e| e.verdict == Verdict::Inconclusive);
                    (json!({ "mode": "conditional", "verdict": report::verdict_json(&a) }), inc)
                }
                (None, false) => {
                    let a = find_dominator(&d, &candidates, &model, &b)?;
                    let inc = a.verdict == Verdict::Inconclusive;
                    (json!({ "mode": "full", "verdict": report::verdict_json(&a) }), inc)
                }
            };
            if inconclusive {
                status = Status::Inconclusive;
                diagnostics.push("admissibility search inconclusive within the budget".into());
            }
            v
        }
        Command::Decompose => {
            let d = design(job)?;
            let s = job.slice_map.as_deref().ok_or_else(|| anyhow!("decompose needs a slice map"))?;
            let tmap = parse_slice_map(s)?;
            let dec = decompose(&d, &tmap, &model)?;
            report::decomposition_json(&dec, recompose_check(&d, &tmap, &model)?)
        }
    };
    Ok(Outcome { report: envelope(job.command.name(), &config, result), traces, status, diagnostics })
}
