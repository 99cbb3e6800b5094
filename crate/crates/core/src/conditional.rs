//! Slicing a design space by `t(x)`, conditional and marginal designs, lift
//! maps `C(t)` with `f(x) = C(t) f~_t(x)` on a slice, Loewner dominance and
//! the admissibility audits built on it.
//!
//! "Inadmissible" always comes with a verified dominator. "No dominator
//! found" only means the search failed within its budget.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::barrier;
use crate::design::{info_matrix, Design, InfoMatrix};
use crate::error::{Error, Result};
use crate::linalg::{lambda_min, max_abs, SymEigen};
use crate::math::{exp, sqrt};
use crate::model::{add_outer, CandidateSet, DesignSpace, Family, Interval, ModelSpec, Point, Regressors, Term};

/// Default absolute tolerance for matching atoms to a slice.
pub const SLICE_TOL: f64 = 1e-9;
/// Default relative tolerance of [`dominates`].
pub const DOMINANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum SliceKind {
    /// `t(x) = x[axis]` (0-based).
    Coordinate(usize),
    /// `t(x) = alpha . x`
    Linear(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceMap {
    pub kind: SliceKind,
    pub tol: f64,
}

impl SliceMap {
    pub fn coordinate(axis: usize) -> Self {
        SliceMap { kind: SliceKind::Coordinate(axis), tol: SLICE_TOL }
    }

    pub fn linear(alpha: Vec<f64>) -> Result<Self> {
        if alpha.iter().all(|a| *a == 0.0) || alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("linear slice map needs finite, not all zero coefficients".into()));
        }
        Ok(SliceMap { kind: SliceKind::Linear(alpha), tol: SLICE_TOL })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        match &self.kind {
            SliceKind::Coordinate(j) => x
                .coords()
                .get(*j)
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("axis {j} out of range for a {}-dimensional point", x.dim()))),
            SliceKind::Linear(a) => {
                if a.len() != x.dim() {
                    return Err(Error::InvalidArgument(format!("slice map has {} coefficients for a {}-dimensional point", a.len(), x.dim())));
                }
                Ok(a.iter().zip(x.coords()).map(|(a, x)| a * x).sum())
            }
        }
    }
}

/// Conditional regression model on the slice `{x : t(x) = t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalModel {
    pub t: f64,
    /// `f~_t`, evaluated on full points of the slice.
    pub f_tilde: ModelSpec,
    /// `k x p_t` lift matrix.
    pub c: DMatrix<f64>,
    pub slice_space: String,
}

impl ConditionalModel {
    pub fn p(&self) -> usize {
        self.f_tilde.k()
    }
}

fn mono(p: [u32; 2]) -> Term {
    Term::monomial(p.to_vec())
}

fn expo(p: [u32; 2], r: [f64; 2]) -> Term {
    Term::exp_monomial(1.0, p.to_vec(), r.to_vec())
}

/// Looks up the registered conditional model of `model` given `tmap = t`.
pub fn conditional_model(model: &ModelSpec, tmap: &SliceMap, t: f64) -> Result<ConditionalModel> {
    let missing = || {
        Error::NoConditionalModel(format!("no conditional model registered for {} with slice map {:?}", model.family().name(), tmap.kind))
    };
    let m = |rows: usize, cols: usize, v: &[f64]| DMatrix::from_row_slice(rows, cols, v);
    let (terms, c, desc): (Vec<Term>, DMatrix<f64>, String) = match (model.family(), &tmap.kind) {
        (_, SliceKind::Coordinate(0)) if model.q() == 1 => {
            let f = model.eval_f(&Point::new(vec![t]))?;
            let c = DMatrix::from_column_slice(f.len(), 1, f.as_slice());
            (vec![Term::monomial(vec![0])], c, format!("{{x = {t}}}"))
        }
        (Family::Interaction2f, SliceKind::Coordinate(0)) => {
            (vec![mono([0, 0]), mono([0, 1])], m(4, 2, &[1.0, 0.0, t, 0.0, 0.0, 1.0, 0.0, t]), format!("{{x[0] = {t}}}"))
        }
        (Family::Interaction2f, SliceKind::Coordinate(1)) => {
            (vec![mono([0, 0]), mono([1, 0])], m(4, 2, &[1.0, 0.0, 0.0, 1.0, t, 0.0, 0.0, t]), format!("{{x[1] = {t}}}"))
        }
        (Family::Interaction2f, SliceKind::Linear(a)) if a.len() == 2 && a[1] != 0.0 => {
            let (u, v) = (t / a[1], -a[0] / a[1]);
            (
                vec![mono([0, 0]), mono([1, 0]), mono([2, 0])],
                m(4, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, u, v, 0.0, 0.0, u, v]),
                format!("{{{} x[0] + {} x[1] = {t}}}", a[0], a[1]),
            )
        }
        (Family::ExpGrowth2f { theta }, SliceKind::Coordinate(0)) => (
            vec![mono([0, 0]), expo([0, 1], [0.0, -theta[2]])],
            m(3, 2, &[1.0, 0.0, -t * exp(-theta[1] * t), 0.0, 0.0, -1.0]),
            format!("{{x[0] = {t}}}"),
        ),
        (Family::ExpGrowth2f { theta }, SliceKind::Coordinate(1)) => (
            vec![mono([0, 0]), expo([1, 0], [-theta[1], 0.0])],
            m(3, 2, &[1.0, 0.0, 0.0, -1.0, -t * exp(-theta[2] * t), 0.0]),
            format!("{{x[1] = {t}}}"),
        ),
        (Family::ExpProduct2f { theta }, SliceKind::Coordinate(0)) => {
            let e = exp(theta[1] * t);
            (
                vec![expo([0, 0], [0.0, theta[2]]), expo([0, 1], [0.0, theta[2]])],
                m(3, 2, &[e, 0.0, theta[0] * t * e, 0.0, 0.0, theta[0] * e]),
                format!("{{x[0] = {t}}}"),
            )
        }
        (Family::ExpProduct2f { theta }, SliceKind::Coordinate(1)) => {
            let e = exp(theta[2] * t);
            (
                vec![expo([0, 0], [theta[1], 0.0]), expo([1, 0], [theta[1], 0.0])],
                m(3, 2, &[e, 0.0, 0.0, theta[0] * e, theta[0] * t * e, 0.0]),
                format!("{{x[1] = {t}}}"),
            )
        }
        (Family::ExpProduct2f { theta }, SliceKind::Linear(a)) if a.len() == 2 => {
            // Only maps proportional to (theta1, theta2) keep exp(theta . x) constant on a slice.
            let cross = a[0] * theta[2] - a[1] * theta[1];
            let norm = sqrt(a[0] * a[0] + a[1] * a[1]) * sqrt(theta[1] * theta[1] + theta[2] * theta[2]);
            if cross.abs() > 1e-12 * norm {
                return Err(missing());
            }
            let ratio = if a[0] != 0.0 { a[0] / theta[1] } else { a[1] / theta[2] };
            let e = exp(t / ratio);
            (
                vec![mono([0, 0]), mono([1, 0]), mono([0, 1])],
                m(3, 3, &[e, 0.0, 0.0, 0.0, theta[0] * e, 0.0, 0.0, 0.0, theta[0] * e]),
                format!("{{{} x[0] + {} x[1] = {t}}}", a[0], a[1]),
            )
        }
        (Family::MixturePolyExp { theta3 }, SliceKind::Coordinate(0)) => (
            vec![mono([0, 0]), expo([0, 1], [0.0, -theta3])],
            m(4, 2, &[1.0, 0.0, t, 0.0, t * t * t, 0.0, 0.0, -1.0]),
            format!("{{x[0] = {t}}}"),
        ),
        (Family::MixturePolyExp { theta3 }, SliceKind::Coordinate(1)) => (
            vec![mono([0, 0]), mono([1, 0]), mono([3, 0])],
            m(4, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, -t * exp(-theta3 * t), 0.0, 0.0]),
            format!("{{x[1] = {t}}}"),
        ),
        _ => return Err(missing()),
    };
    let f_tilde = ModelSpec::new(Family::Terms(terms), model.space().clone())?;
    Ok(ConditionalModel { t, f_tilde, c, slice_space: desc })
}

/// One-factor marginal model of a product-space model, with the number of
/// support points of its admissible class.
pub fn marginal_model(model: &ModelSpec, axis: usize) -> Result<(ModelSpec, usize)> {
    let missing = || Error::NoConditionalModel(format!("no marginal model registered for {} on axis {axis}", model.family().name()));
    let one = |p: u32| Term::monomial(vec![p]);
    let ex = |p: u32, r: f64| Term::exp_monomial(1.0, vec![p], vec![r]);
    let (terms, points) = match (model.family(), axis) {
        (Family::ExpGrowth2f { theta }, 0 | 1) => (vec![one(0), ex(1, -theta[axis + 1])], 2),
        (Family::Interaction2f, 0 | 1) => (vec![one(0), one(1)], 2),
        (Family::ExpProduct2f { theta }, 0 | 1) => (vec![ex(0, theta[axis + 1]), ex(1, theta[axis + 1])], 2),
        (Family::MixturePolyExp { .. }, 0) => (vec![one(0), one(1), one(3)], 4),
        (Family::MixturePolyExp { theta3 }, 1) => (vec![one(0), ex(1, -theta3)], 2),
        _ => return Err(missing()),
    };
    let b = model.space().bounds()[axis];
    let space = DesignSpace::new(vec![Interval::new(b.lo, b.hi)])?;
    Ok((ModelSpec::new(Family::Terms(terms), space)?, points))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub t: f64,
    pub marginal_weight: f64,
    /// `xi_{x|t}` on full points.
    pub design: Design,
    pub model: ConditionalModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceDecomposition {
    pub tmap: SliceMap,
    /// Slices in ascending `t`.
    pub slices: Vec<Slice>,
}

/// Groups atoms by `t(x)` within `tmap.tol` and attaches conditional models.
pub fn decompose(design: &Design, tmap: &SliceMap, model: &ModelSpec) -> Result<SliceDecomposition> {
    let mut ts: Vec<(f64, usize)> = Vec::with_capacity(design.len());
    for (i, a) in design.atoms().iter().enumerate() {
        ts.push((tmap.eval(&a.point)?, i));
    }
    ts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut groups: Vec<Vec<(f64, usize)>> = Vec::new();
    for entry in ts {
        match groups.last_mut() {
            Some(g) if (entry.0 - g[g.len() - 1].0).abs() <= tmap.tol => g.push(entry),
            _ => groups.push(vec![entry]),
        }
    }
    let mut slices = Vec::with_capacity(groups.len());
    for g in groups {
        let t = g[0].0;
        let cm = conditional_model(model, tmap, t)?;
        let weight: f64 = g.iter().map(|&(_, i)| design.atoms()[i].weight).sum();
        let atoms: Vec<(Point, f64)> = g.iter().map(|&(_, i)| (design.atoms()[i].point.clone(), design.atoms()[i].weight / weight)).collect();
        for (p, _) in &atoms {
            check_lift(model, &cm, p)?;
        }
        slices.push(Slice { t, marginal_weight: weight, design: Design::normalized(atoms)?, model: cm });
    }
    Ok(SliceDecomposition { tmap: tmap.clone(), slices })
}

fn check_lift(model: &ModelSpec, cm: &ConditionalModel, x: &Point) -> Result<()> {
    let f = model.eval_f(x)?;
    let lifted = &cm.c * cm.f_tilde.eval_f(x)?;
    let err = (&f - &lifted).amax();
    if err > 1e-10 * (1.0 + f.amax()) {
        return Err(Error::Inconsistent(format!("f(x) != C(t) f~(x) at {x} (error {err:e})")));
    }
    Ok(())
}

/// Largest entry of `M(design) - sum_t xi_t C(t) M_t(xi_{x|t}) C(t)^T`.
pub fn recompose_check(design: &Design, tmap: &SliceMap, model: &ModelSpec) -> Result<f64> {
    let dec = decompose(design, tmap, model)?;
    let k = model.k();
    let mut total = DMatrix::zeros(k, k);
    for s in &dec.slices {
        let mt = info_matrix(&s.design, &s.model.f_tilde)?;
        total += (&s.model.c * mt.matrix() * s.model.c.transpose()) * s.marginal_weight;
    }
    let m = info_matrix(design, model)?;
    Ok(max_abs(&(m.matrix() - total)))
}

/// Strict Loewner dominance of information matrices, relative to their scale.
pub fn dominates_matrices(m2: &DMatrix<f64>, m1: &DMatrix<f64>, tol: f64) -> bool {
    let scale = max_abs(m1).max(max_abs(m2)).max(f64::MIN_POSITIVE);
    let diff = m2 - m1;
    lambda_min(&diff) >= -tol * scale && max_abs(&diff) > tol * scale
}

/// `M(d2) >= M(d1)` in the Loewner order with `M(d2) != M(d1)`.
pub fn dominates(d2: &Design, d1: &Design, model: &ModelSpec, tol: f64) -> Result<bool> {
    let m2 = info_matrix(d2, model)?;
    let m1 = info_matrix(d1, model)?;
    Ok(dominates_matrices(m2.matrix(), m1.matrix(), tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// A dominating design was found and verified.
    Inadmissible,
    /// Both search phases failed within the budget; not a proof of admissibility.
    NoDominatorFound,
    /// The penalized ascent still pointed at a dominator the polish could not verify.
    Inconclusive,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Inadmissible => "inadmissible",
            Verdict::NoDominatorFound => "no-dominator-found",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceEvidence {
    pub t: f64,
    pub verdict: Verdict,
    pub dominator: Option<Design>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityVerdict {
    pub verdict: Verdict,
    /// `true` only for [`Verdict::NoDominatorFound`].
    pub admissible: bool,
    pub dominator: Option<Design>,
    pub evidence: Vec<SliceEvidence>,
}

impl AdmissibilityVerdict {
    fn new(verdict: Verdict, dominator: Option<Design>) -> Self {
        AdmissibilityVerdict { verdict, admissible: verdict == Verdict::NoDominatorFound, dominator, evidence: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Budget {
    /// Ascent steps for every penalty level.
    pub steps_per_stage: usize,
    pub penalties: Vec<f64>,
    /// Exhaustive two-point sweep for `p <= 2` and at most this many candidates.
    pub oracle_max_candidates: usize,
    pub oracle_grid: usize,
    pub tol: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            steps_per_stage: 500,
            penalties: vec![1e1, 1e2, 1e3, 1e4, 1e5, 1e6],
            oracle_max_candidates: 200,
            oracle_grid: 64,
            tol: DOMINANCE_TOL,
        }
    }
}

impl Budget {
    pub fn with_steps(steps: usize) -> Self {
        Budget { steps_per_stage: steps, ..Default::default() }
    }
}

struct Search<'a> {
    rows: &'a Regressors,
    outers: Vec<DMatrix<f64>>,
    m1: DMatrix<f64>,
    scale: f64,
    tol: f64,
}

impl Search<'_> {
    fn matrix(&self, idx: &[usize], w: &[f64]) -> DMatrix<f64> {
        let k = self.m1.nrows();
        let mut m = DMatrix::zeros(k, k);
        for (&i, &wi) in idx.iter().zip(w) {
            if wi != 0.0 {
                add_outer(&mut m, self.rows.row(i), wi);
            }
        }
        m
    }

    fn accept(&self, idx: &[usize], w: &[f64]) -> Option<(DMatrix<f64>, f64)> {
        let m2 = self.matrix(idx, w);
        dominates_matrices(&m2, &self.m1, self.tol).then(|| {
            let gain = (&m2 - &self.m1).trace();
            (m2, gain)
        })
    }

    /// Penalized supergradient ascent over all candidates; returns the best
    /// weights and the final penalized value.
    fn penalized_ascent(&self, budget: &Budget) -> (Vec<f64>, f64) {
        let n = self.rows.len();
        let mut w = vec![1.0 / n as f64; n];
        let all: Vec<usize> = (0..n).collect();
        let norms: Vec<f64> = self.rows.rows().map(|f| f.iter().map(|v| v * v).sum()).collect();
        let gmax = norms.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut best_w = w.clone();
        let mut last_value = f64::NEG_INFINITY;
        for &rho in &budget.penalties {
            let value = |w: &[f64]| -> (f64, Option<nalgebra::DVector<f64>>) {
                let d = self.matrix(&all, w) - &self.m1;
                let eig = SymEigen::new(&d);
                let lo = eig.min();
                let z = (lo < 0.0).then(|| eig.vectors.column(eig.values.len() - 1).into_owned());
                (d.trace() + rho * lo.min(0.0), z)
            };
            let (mut best, _) = value(&w);
            best_w.clone_from(&w);
            for step in 0..budget.steps_per_stage {
                let (_, z) = value(&w);
                let grad: Vec<f64> = (0..n)
                    .map(|i| {
                        let f = self.rows.row(i);
                        let proj = z.as_ref().map_or(0.0, |z| {
                            let s: f64 = f.iter().zip(z.iter()).map(|(a, b)| a * b).sum();
                            s * s
                        });
                        norms[i] + rho * proj
                    })
                    .collect();
                let eta = 1.0 / (gmax * (1.0 + rho) * sqrt(step as f64 + 1.0));
                let raw: Vec<f64> = w.iter().zip(&grad).map(|(wi, g)| wi + eta * g).collect();
                w = crate::solver::project_simplex(&raw);
                let (v, _) = value(&w);
                if v > best {
                    best = v;
                    best_w.clone_from(&w);
                }
            }
            w.clone_from(&best_w);
            last_value = best;
        }
        (best_w, last_value)
    }

    /// Exact weights on a reduced support: largest smallest eigenvalue of the
    /// difference, then the largest trace gain at that level.
    fn polish(&self, idx: &[usize], w0: &[f64]) -> Option<Vec<f64>> {
        let fs: Vec<DMatrix<f64>> = idx.iter().map(|&i| self.outers[i].clone()).collect();
        let (w, s) = barrier::max_min_eigen(&fs, &self.m1, w0, 1e-13).ok()?;
        if s < -0.5 * self.tol * self.scale {
            return Some(w);
        }
        let level = s - 0.5 * self.tol * self.scale;
        barrier::max_trace_at_level(&fs, &self.m1, level, &w, 1e-13).ok().or(Some(w))
    }

    /// All two-point supports with a coarse weight scan refined by golden section.
    fn oracle(&self, grid: usize) -> Option<(Vec<usize>, Vec<f64>, f64)> {
        let n = self.rows.len();
        let mut best: Option<(Vec<usize>, Vec<f64>, f64)> = None;
        let lam = |a: usize, b: usize, x: f64| lambda_min(&(&self.outers[a] * x + &self.outers[b] * (1.0 - x) - &self.m1));
        for a in 0..n {
            for b in a..n {
                let (mut bx, mut bl) = (0.0, f64::NEG_INFINITY);
                let steps = if a == b { 0 } else { grid };
                for j in 0..=steps {
                    let x = if steps == 0 { 1.0 } else { j as f64 / steps as f64 };
                    let l = lam(a, b, x);
                    if l > bl {
                        bl = l;
                        bx = x;
                    }
                }
                if steps > 0 {
                    let h = 1.0 / steps as f64;
                    let (mut lo, mut hi) = ((bx - h).max(0.0), (bx + h).min(1.0));
                    let r = 0.5 * (sqrt(5.0) - 1.0);
                    for _ in 0..80 {
                        let x1 = hi - r * (hi - lo);
                        let x2 = lo + r * (hi - lo);
                        if lam(a, b, x1) >= lam(a, b, x2) {
                            hi = x2;
                        } else {
                            lo = x1;
                        }
                    }
                    let x = 0.5 * (lo + hi);
                    let l = lam(a, b, x);
                    if l > bl {
                        bx = x;
                    }
                }
                let (idx, w) = if a == b { (vec![a], vec![1.0]) } else { (vec![a, b], vec![bx, 1.0 - bx]) };
                if let Some((_, gain)) = self.accept(&idx, &w) {
                    if best.as_ref().is_none_or(|(_, _, g)| gain > *g) {
                        best = Some((idx, w, gain));
                    }
                }
            }
        }
        best
    }
}

fn design_from(points: &[Point], idx: &[usize], w: &[f64]) -> Result<Design> {
    Design::normalized(idx.iter().zip(w).filter(|(_, wi)| **wi > 0.0).map(|(&i, &wi)| (points[i].clone(), wi)).collect())
}

/// Searches the candidates for a design whose information matrix strictly
/// dominates that of `d1`.
pub fn find_dominator(d1: &Design, candidates: &CandidateSet, model: &ModelSpec, budget: &Budget) -> Result<AdmissibilityVerdict> {
    if budget.steps_per_stage == 0 {
        return Err(Error::InvalidArgument("budget needs at least one ascent step".into()));
    }
    let m1 = info_matrix(d1, model)?;
    let rows = model.regressors(candidates.points())?;
    let gram = InfoMatrix::from_sym(rows.gram());
    if gram.rank() < m1.rank() {
        return Err(Error::DegenerateModel { rank: gram.rank(), k: m1.rank() });
    }
    let k = model.k();
    let outers: Vec<DMatrix<f64>> = rows
        .rows()
        .map(|f| {
            let mut o = DMatrix::zeros(k, k);
            add_outer(&mut o, f, 1.0);
            o
        })
        .collect();
    let scale = max_abs(m1.matrix()).max(outers.iter().map(max_abs).fold(0.0, f64::max)).max(f64::MIN_POSITIVE);
    let search = Search { rows: &rows, outers, m1: m1.matrix().clone(), scale, tol: budget.tol };
    let points = candidates.points();
    let mut found: Option<(Design, f64)> = None;
    let offer = |d: Design, gain: f64, found: &mut Option<(Design, f64)>| {
        if found.as_ref().is_none_or(|(_, g)| gain > *g) {
            *found = Some((d, gain));
        }
    };

    let (w, ascent_value) = search.penalized_ascent(budget);
    let wmax = w.iter().copied().fold(0.0, f64::max);
    let mut idx: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 1e-3 * wmax).collect();
    idx.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    idx.truncate(60);
    idx.sort_unstable();
    let sub: Vec<f64> = idx.iter().map(|&i| w[i]).collect();
    let mut proposals: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
    if let Some(pw) = search.polish(&idx, &sub) {
        proposals.push((idx.clone(), pw));
    }
    proposals.push((idx, sub));
    if k <= 2 && rows.len() <= budget.oracle_max_candidates {
        if let Some((idx, w, _)) = search.oracle(budget.oracle_grid.max(1)) {
            proposals.push((idx, w));
        }
    }
    for (idx, w) in proposals {
        // Dust left by the barrier is dropped when the cleaned design still dominates.
        let top = w.iter().copied().fold(0.0, f64::max);
        let clean: Vec<f64> = w.iter().map(|&x| if x < 1e-9 * top { 0.0 } else { x }).collect();
        let total: f64 = clean.iter().sum();
        let clean: Vec<f64> = clean.iter().map(|x| x / total).collect();
        for cand in [clean, w] {
            if let Some((_, gain)) = search.accept(&idx, &cand) {
                offer(design_from(points, &idx, &cand)?, gain, &mut found);
                break;
            }
        }
    }

    match found {
        Some((d, _)) => {
            if !dominates(&d, d1, model, budget.tol)? {
                return Err(Error::Inconsistent("dominator failed re-verification".into()));
            }
            Ok(AdmissibilityVerdict::new(Verdict::Inadmissible, Some(d)))
        }
        None if ascent_value > 1e-6 * scale => Ok(AdmissibilityVerdict::new(Verdict::Inconclusive, None)),
        None => Ok(AdmissibilityVerdict::new(Verdict::NoDominatorFound, None)),
    }
}

/// Candidates whose `t(x)` lies within `tmap.tol` of `t`.
fn slice_candidates(candidates: &CandidateSet, tmap: &SliceMap, t: f64) -> Result<Option<CandidateSet>> {
    let mut pts = Vec::new();
    for p in candidates.points() {
        if (tmap.eval(p)? - t).abs() <= tmap.tol {
            pts.push(p.clone());
        }
    }
    if pts.is_empty() {
        return Ok(None);
    }
    CandidateSet::from_points(candidates.space().clone(), pts, candidates.resolution().to_vec()).map(Some)
}

/// Necessary condition for admissibility: every conditional design must be
/// admissible in its conditional model.
///
/// A dominated slice is replaced by its dominator and the spliced design is
/// verified to dominate `design` in the full model.
pub fn conditional_audit(
    design: &Design,
    tmap: &SliceMap,
    model: &ModelSpec,
    candidates: &CandidateSet,
    budget: &Budget,
) -> Result<AdmissibilityVerdict> {
    let dec = decompose(design, tmap, model)?;
    let mut evidence = Vec::with_capacity(dec.slices.len());
    let mut inconclusive = false;
    for (si, s) in dec.slices.iter().enumerate() {
        let mut slice_cands = match slice_candidates(candidates, tmap, s.t)? {
            Some(c) => c.points().to_vec(),
            None => Vec::new(),
        };
        for a in s.design.atoms() {
            if !slice_cands.contains(&a.point) {
                slice_cands.push(a.point.clone());
            }
        }
        let cands = CandidateSet::from_points(candidates.space().clone(), slice_cands, candidates.resolution().to_vec())?;
        let v = find_dominator(&s.design, &cands, &s.model.f_tilde, budget)?;
        evidence.push(SliceEvidence { t: s.t, verdict: v.verdict, dominator: v.dominator.clone() });
        match (v.verdict, v.dominator) {
            (Verdict::Inadmissible, Some(rep)) => {
                let spliced = splice(&dec, si, &rep)?;
                if dominates(&spliced, design, model, budget.tol)? {
                    let mut out = AdmissibilityVerdict::new(Verdict::Inadmissible, Some(spliced));
                    out.evidence = evidence;
                    return Ok(out);
                }
                return Err(Error::Inconsistent(format!("spliced design for slice t = {} does not dominate", s.t)));
            }
            (Verdict::Inconclusive, _) => inconclusive = true,
            _ => {}
        }
    }
    let mut out = AdmissibilityVerdict::new(if inconclusive { Verdict::Inconclusive } else { Verdict::NoDominatorFound }, None);
    out.evidence = evidence;
    Ok(out)
}

/// Replaces the conditional design of slice `index` by `replacement`.
pub fn splice(dec: &SliceDecomposition, index: usize, replacement: &Design) -> Result<Design> {
    let mut atoms = Vec::new();
    for (i, s) in dec.slices.iter().enumerate() {
        let d = if i == index { replacement } else { &s.design };
        for a in d.atoms() {
            atoms.push((a.point.clone(), s.marginal_weight * a.weight));
        }
    }
    Design::normalized(atoms)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorAudit {
    pub axis: usize,
    pub marginal_model: ModelSpec,
    pub marginal_design: Design,
    pub verdict: AdmissibilityVerdict,
    /// Support size of the admissible class of the marginal model.
    pub class_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductAudit {
    pub factors: Vec<FactorAudit>,
    /// `p_1 p_2`, the support bound for the admissible product class.
    pub support_bound: usize,
}

/// Projection of `design` on one axis.
pub fn marginal_design(design: &Design, axis: usize) -> Result<Design> {
    Design::normalized(design.atoms().iter().map(|a| (Point::new(vec![a.point.coords()[axis]]), a.weight)).collect())
}

/// Audits both marginal designs of a two-factor design on a product space.
pub fn product_audit(design: &Design, model: &ModelSpec, candidates: &CandidateSet, budget: &Budget) -> Result<ProductAudit> {
    if model.q() != 2 {
        return Err(Error::NoConditionalModel(format!("product audit needs two factors, {} has {}", model.family().name(), model.q())));
    }
    let mut factors = Vec::with_capacity(2);
    for axis in 0..2 {
        let (mm, class_points) = marginal_model(model, axis)?;
        let md = marginal_design(design, axis)?;
        let mut coords: Vec<f64> = candidates.points().iter().map(|p| p.coords()[axis]).collect();
        coords.extend(md.atoms().iter().map(|a| a.point.coords()[0]));
        coords.sort_by(f64::total_cmp);
        coords.dedup();
        let pts = coords.into_iter().map(|c| Point::new(vec![c])).collect();
        let cands = CandidateSet::from_points(mm.space().clone(), pts, vec![candidates.resolution()[axis]])?;
        let verdict = find_dominator(&md, &cands, &mm, budget)?;
        factors.push(FactorAudit { axis, marginal_model: mm, marginal_design: md, verdict, class_points });
    }
    let support_bound = factors.iter().map(|f| f.class_points).product();
    Ok(ProductAudit { factors, support_bound })
}
