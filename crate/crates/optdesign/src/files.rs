//! Model-spec, design and slice-map file formats.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use optdesign_core::conditional::SliceMap;
use optdesign_core::{
    discretize, truncate, CandidateSet, Design, DesignSpace, Efficiency, ExactDesign, Family, Interval, ModelSpec,
    Point,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Grid step used when a model file gives none.
pub const DEFAULT_STEP: f64 = 0.01;

/// Truncation point of `[0, inf)` for exponential sums, in units of `1 / lambda_1`.
pub const EXP_TRUNCATION: f64 = 3.0;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub family: String,
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub space: Option<SpaceFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    /// `null` as an upper bound means unbounded.
    #[serde(default)]
    pub bounds: Option<Vec<(f64, Option<f64>)>>,
    #[serde(default)]
    pub steps: Option<Vec<f64>>,
    /// Upper bound replacing every unbounded axis.
    #[serde(default)]
    pub truncate_at: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Degree {
    degree: usize,
    #[serde(default)]
    efficiency: Option<EfficiencyFile>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum EfficiencyFile {
    Constant { value: f64 },
    Exp { rate: f64 },
    Affine { intercept: f64, slope: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpSum {
    a: Vec<f64>,
    lambda: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Theta {
    theta: [f64; 3],
    #[serde(default)]
    b: Option<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Theta3 {
    theta3: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

fn params<T: for<'de> Deserialize<'de>>(v: &Value, family: &str) -> Result<T> {
    let v = if v.is_null() { json!({}) } else { v.clone() };
    serde_json::from_value(v).with_context(|| format!("bad params for family '{family}'"))
}

/// A loaded model with the candidate grid of its design space.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: ModelSpec,
    pub candidates: CandidateSet,
}

impl ModelFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read model file {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("malformed model file {}", path.display()))
    }

    pub fn family(&self) -> Result<(Family, Option<DesignSpace>)> {
        let name = self.family.as_str();
        let p = &self.params;
        let family = match name {
            "polynomial" | "weighted-polynomial" => {
                let d: Degree = params(p, name)?;
                let efficiency = match d.efficiency {
                    None => None,
                    Some(EfficiencyFile::Constant { value }) => Some(Efficiency::Constant(value)),
                    Some(EfficiencyFile::Exp { rate }) => Some(Efficiency::Exponential { rate }),
                    Some(EfficiencyFile::Affine { intercept, slope }) => Some(Efficiency::Affine { intercept, slope }),
                };
                match (name, efficiency) {
                    ("polynomial", None) => Family::Polynomial { degree: d.degree },
                    ("polynomial", Some(_)) => bail!("polynomial takes no efficiency; use weighted-polynomial"),
                    (_, e) => Family::WeightedPolynomial { degree: d.degree, efficiency: e.unwrap_or(Efficiency::Constant(1.0)) },
                }
            }
            "linear-2f-no-intercept" => {
                params::<NoParams>(p, name)?;
                Family::Linear2fNoIntercept
            }
            "interaction-2f" => {
                params::<NoParams>(p, name)?;
                Family::Interaction2f
            }
            "exponential-sum" => {
                let e: ExpSum = params(p, name)?;
                Family::ExponentialSum { amplitudes: e.a, rates: e.lambda }
            }
            "exp-growth-2f" => {
                let t: Theta = params(p, name)?;
                if t.b.is_some() {
                    bail!("exp-growth-2f takes no 'b'");
                }
                Family::ExpGrowth2f { theta: t.theta }
            }
            "exp-product-2f" => {
                let t: Theta = params(p, name)?;
                let space = match t.b {
                    Some([b1, b2]) => Some(DesignSpace::new(vec![Interval::new(0.0, b1), Interval::new(0.0, b2)])?),
                    None => None,
                };
                return Ok((Family::ExpProduct2f { theta: t.theta }, space));
            }
            "mixture-poly-exp" => {
                let t: Theta3 = params(p, name)?;
                Family::MixturePolyExp { theta3: t.theta3 }
            }
            other => bail!("unknown model family '{other}'"),
        };
        Ok((family, None))
    }

    /// Builds the model and its candidate grid, truncating unbounded axes.
    pub fn load(&self) -> Result<LoadedModel> {
        let (family, family_space) = self.family()?;
        let spec = self.space.clone().unwrap_or(SpaceFile { bounds: None, steps: None, truncate_at: None });
        let mut space = match &spec.bounds {
            Some(b) => DesignSpace::new(b.iter().map(|&(lo, hi)| Interval::new(lo, hi.unwrap_or(f64::INFINITY))).collect())?,
            None => family_space
                .or_else(|| family.default_space())
                .ok_or_else(|| anyhow!("family '{}' has no default design space; give space.bounds", self.family))?,
        };
        for axis in 0..space.dimension() {
            if space.bounds()[axis].is_bounded() {
                continue;
            }
            let hi = match (spec.truncate_at, &family) {
                (Some(h), _) => h,
                (None, Family::ExponentialSum { rates, .. }) => EXP_TRUNCATION / rates[0],
                _ => bail!("axis {axis} is unbounded; set space.truncate_at"),
            };
            space = truncate(&space, axis, hi)?;
        }
        let steps = spec.steps.clone().unwrap_or_else(|| vec![DEFAULT_STEP; space.dimension()]);
        let candidates = discretize(&space, &steps)?;
        let model = ModelSpec::new(family, space)?;
        Ok(LoadedModel { model, candidates })
    }
}

/// Reads an approximate design, or an exact one (`n` and integer `reps`) as its proportions.
pub fn read_design(path: &Path) -> Result<Design> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read design file {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("malformed design file {}", path.display()))?;
    design_from_json(&v)
}

pub fn design_from_json(v: &Value) -> Result<Design> {
    let atoms = v.get("atoms").and_then(Value::as_array).ok_or_else(|| anyhow!("design needs an 'atoms' array"))?;
    let n = v.get("n").and_then(Value::as_u64);
    let mut out = Vec::with_capacity(atoms.len());
    for a in atoms {
        let x: Vec<f64> = serde_json::from_value(a.get("x").cloned().unwrap_or(Value::Null)).context("atom needs coordinates 'x'")?;
        let w = match (a.get("w").and_then(Value::as_f64), a.get("reps").and_then(Value::as_u64), n) {
            (Some(w), None, _) => w,
            (None, Some(r), Some(n)) if n > 0 => r as f64 / n as f64,
            _ => bail!("atom needs a weight 'w', or 'reps' with a total 'n'"),
        };
        out.push((Point::try_new(x)?, w));
    }
    if let Some(n) = n {
        let total: u64 = atoms.iter().filter_map(|a| a.get("reps").and_then(Value::as_u64)).sum();
        if total != n {
            bail!("replications sum to {total}, not n = {n}");
        }
    }
    Ok(Design::new(out)?)
}

pub fn design_json(d: &Design) -> Value {
    json!({ "atoms": d.atoms().iter().map(|a| json!({ "x": a.point.coords(), "w": a.weight })).collect::<Vec<_>>() })
}

pub fn exact_design_json(d: &ExactDesign) -> Value {
    json!({
        "n": d.n,
        "atoms": d.atoms.iter().map(|(p, r)| json!({ "x": p.coords(), "reps": r })).collect::<Vec<_>>(),
    })
}

/// `axis:<j>` (0-based) or `linear:<a1>,<a2>,...`.
pub fn parse_slice_map(s: &str) -> Result<SliceMap> {
    let s = s.trim();
    if let Some(j) = s.strip_prefix("axis:") {
        return Ok(SliceMap::coordinate(j.trim().parse().with_context(|| format!("bad axis in slice map '{s}'"))?));
    }
    if let Some(a) = s.strip_prefix("linear:") {
        let alpha = a
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("bad coefficients in slice map '{s}'"))?;
        return Ok(SliceMap::linear(alpha)?);
    }
    bail!("slice map '{s}' is neither axis:<j> nor linear:<a1>,<a2>")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(v: Value) -> Result<LoadedModel> {
        serde_json::from_value::<ModelFile>(v)?.load()
    }

    #[test]
    fn default_spaces_and_steps() {
        let m = model(json!({"family": "linear-2f-no-intercept"})).unwrap();
        assert_eq!(m.candidates.len(), 101 * 101);
        let m = model(json!({"family": "polynomial", "params": {"degree": 2}, "space": {"steps": [0.25]}})).unwrap();
        assert_eq!(m.candidates.len(), 5);
    }

    #[test]
    fn exponential_sum_is_truncated() {
        let m = model(json!({"family": "exponential-sum", "params": {"a": [1.0], "lambda": [2.0]}})).unwrap();
        assert_eq!(m.model.space().bounds()[0].hi, 1.5);
        assert!(m.model.space().truncation_note().is_some());
        let m = model(json!({"family": "exponential-sum", "params": {"a": [1.0], "lambda": [1.0]},
            "space": {"bounds": [[0.0, null]], "truncate_at": 5.0, "steps": [0.5]}}))
        .unwrap();
        assert_eq!(m.candidates.len(), 11);
    }

    #[test]
    fn rejects_bad_models() {
        assert!(model(json!({"family": "quartic"})).is_err());
        assert!(model(json!({"family": "interaction-2f", "params": {"theta": [1, 1, 1]}})).is_err());
        assert!(model(json!({"family": "exp-growth-2f", "params": {"theta": [0.0, 0.5, 1.0]}})).is_err());
        assert!(model(json!({"family": "exp-product-2f", "params": {"theta": [1.0, 1.0, 1.0]}})).is_err());
        assert!(model(json!({"family": "polynomial", "params": {"degree": 2}, "space": {"bounds": [[0.0, null]]}})).is_err());
    }

    #[test]
    fn exact_designs_read_as_proportions() {
        let d = design_from_json(&json!({"n": 4, "atoms": [{"x": [0.0], "reps": 1}, {"x": [1.0], "reps": 3}]})).unwrap();
        assert_eq!(d.weights(), vec![0.25, 0.75]);
        assert!(design_from_json(&json!({"n": 5, "atoms": [{"x": [0.0], "reps": 1}, {"x": [1.0], "reps": 3}]})).is_err());
        assert!(design_from_json(&json!({"atoms": [{"x": [0.0], "w": 0.4}]})).is_err());
    }

    #[test]
    fn design_round_trip() {
        let d = Design::new(vec![(Point::new(vec![0.0, 1.0]), 0.5), (Point::new(vec![1.0, 0.0]), 0.5)]).unwrap();
        assert_eq!(design_from_json(&design_json(&d)).unwrap(), d);
    }

    #[test]
    fn slice_maps() {
        assert!(parse_slice_map("axis:1").is_ok());
        assert!(parse_slice_map("linear:1, 1").is_ok());
        assert!(parse_slice_map("linear:0,0").is_err());
        assert!(parse_slice_map("diag").is_err());
    }
}
