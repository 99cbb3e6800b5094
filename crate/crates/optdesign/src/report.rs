//! JSON reports and CSV traces.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use nalgebra::{DMatrix, DVector};
use optdesign_core::conditional::{AdmissibilityVerdict, ProductAudit, SliceDecomposition};
use optdesign_core::{CandidateSet, CertifyReport, GarzaReport, PolytopeReport, SolveReport};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::files::design_json;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Non-finite numbers become strings so that every report stays valid JSON.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn matrix(m: &DMatrix<f64>) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| num(m[(i, j)])).collect())).collect())
}

pub fn vector(v: &DVector<f64>) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

/// SHA-256 of the canonical (key-sorted, compact) configuration.
pub fn config_hash(config: &Value) -> String {
    let digest = Sha256::digest(config.to_string().as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Wraps a command result with the tool version and the config and its hash.
pub fn envelope(command: &str, config: &Value, result: Value) -> Value {
    json!({
        "tool": "optdesign",
        "version": VERSION,
        "command": command,
        "config_hash": config_hash(config),
        "config": config,
        "result": result,
    })
}

pub fn solve_json(r: &SolveReport) -> Value {
    json!({
        "design": design_json(&r.design),
        "criterion_value": num(r.criterion_value),
        "iterations": r.iterations,
        "max_sensitivity_violation": num(r.max_sensitivity_violation),
        "converged": r.converged,
        "history": nums(&r.history),
    })
}

pub fn certify_json(r: &CertifyReport) -> Value {
    json!({
        "optimal": r.optimal,
        "tol": num(r.tol),
        "duality_products": { "trace_mn": num(r.trace_mn), "phi_times_polar": num(r.phi_times_polar) },
        "criterion_value": num(r.criterion_value),
        "max_sensitivity": num(r.max_sensitivity),
        "max_violation": num(r.max_violation),
        "violating_point": r.violating_point.as_ref().map(|p| p.coords().to_vec()),
        "support_equalities": nums(&r.support_sensitivities),
        "max_support_deviation": num(r.max_support_deviation),
        "truncation_slack": r.truncation_slack.map(num),
        "warnings": r.warnings,
        "certificate": {
            "N": matrix(r.certificate.matrix()),
            "Z": matrix(r.certificate.z()),
            "Lambda": vector(r.certificate.lambda()),
            "bound": num(r.certificate.bound()),
        },
    })
}

pub fn polytope_json(r: &PolytopeReport) -> Value {
    json!({
        "Z": matrix(&r.z),
        "Lambda": vector(&r.lambda),
        "hyperplanes": r.hyperplanes.iter().map(|h| json!({
            "c": vector(&h.c),
            "active_support": h.active_support.iter().map(|p| p.coords().to_vec()).collect::<Vec<_>>(),
            "lengths": nums(&h.lengths),
        })).collect::<Vec<_>>(),
        "support_coords": r.support_coords.iter().map(|(p, c)| json!({ "x": p.coords(), "P": vector(c) })).collect::<Vec<_>>(),
        "length_groups": r.length_groups.iter().map(|g| g.iter().map(|p| p.coords().to_vec()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "max_length_spread": num(r.max_length_spread),
        "max_constraint": num(r.max_constraint),
    })
}

pub fn garza_json(r: &GarzaReport) -> Value {
    json!({
        "k": r.k,
        "max_equal_group_size": r.max_equal_group_size,
        "saturation_bound": r.saturation_bound,
        "injective": r.injective,
        "monotone_axis_note": r.monotone_axis_note,
    })
}

pub fn verdict_json(v: &AdmissibilityVerdict) -> Value {
    json!({
        "verdict": v.verdict.name(),
        "admissible": v.admissible,
        "note": "admissible means no dominator was found within the budget; inadmissible is backed by a verified dominator",
        "dominator": v.dominator.as_ref().map(design_json),
        "evidence": v.evidence.iter().map(|e| json!({
            "t": num(e.t),
            "verdict": e.verdict.name(),
            "dominator": e.dominator.as_ref().map(design_json),
        })).collect::<Vec<_>>(),
    })
}

pub fn product_json(a: &ProductAudit) -> Value {
    json!({
        "support_bound": a.support_bound,
        "factors": a.factors.iter().map(|f| json!({
            "axis": f.axis,
            "marginal_design": design_json(&f.marginal_design),
            "class_points": f.class_points,
            "verdict": verdict_json(&f.verdict),
        })).collect::<Vec<_>>(),
    })
}

pub fn decomposition_json(d: &SliceDecomposition, recompose_error: f64) -> Value {
    json!({
        "recompose_max_abs_error": num(recompose_error),
        "slices": d.slices.iter().map(|s| json!({
            "t": num(s.t),
            "marginal_weight": num(s.marginal_weight),
            "conditional_design": design_json(&s.design),
            "p_t": s.model.p(),
            "C": matrix(&s.model.c),
            "slice_space": s.model.slice_space,
        })).collect::<Vec<_>>(),
    })
}

/// One row per candidate: coordinates then the traced value.
pub fn trace_csv(candidates: &CandidateSet, column: &str, values: &[f64]) -> String {
    let q = candidates.space().dimension();
    let mut out = String::new();
    let header: Vec<String> = (0..q).map(|j| format!("x{j}")).chain([column.to_string()]).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (p, v) in candidates.points().iter().zip(values) {
        for c in p.coords() {
            let _ = write!(out, "{c},");
        }
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_key_order() {
        let a: Value = serde_json::from_str(r#"{"b": 1, "a": [1, 2]}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"a": [1, 2], "b": 1}"#).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
        assert_ne!(config_hash(&a), config_hash(&json!({"a": [2, 1], "b": 1})));
    }

    #[test]
    fn non_finite_numbers_stay_json() {
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(0.5), json!(0.5));
    }
}
