//! Design spaces, candidate grids and the catalog of regression models.
//!
//! Linear families evaluate their regression vector `f(x)` directly.
//! Nonlinear families evaluate the parameter gradient of the mean response
//! at a fixed nominal parameter (the locally optimal design setting), with
//! the gradients written out by hand.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::math::{exp, powi, sqrt};

/// A point of the design space.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    /// Panics on non-finite coordinates; use [`Point::try_new`] for untrusted input.
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        let coords = coords.into();
        assert!(coords.iter().all(|c| c.is_finite()), "non-finite coordinate");
        Point(coords)
    }

    pub fn try_new(coords: impl Into<Vec<f64>>) -> Result<Self> {
        let coords = coords.into();
        if coords.iter().all(|c| c.is_finite()) {
            Ok(Point(coords))
        } else {
            Err(Error::InvalidArgument(format!("non-finite point {coords:?}")))
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        sqrt(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (a - b) * (a - b))
                .sum(),
        )
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpace {
    bounds: Vec<Interval>,
    truncated: Vec<bool>,
    truncation_note: Option<String>,
}

impl DesignSpace {
    pub fn new(bounds: Vec<Interval>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidArgument("design space needs at least one axis".into()));
        }
        for (j, b) in bounds.iter().enumerate() {
            if b.lo.is_nan() || b.hi.is_nan() || b.lo > b.hi || b.lo == f64::INFINITY {
                return Err(Error::InvalidArgument(format!("axis {j}: invalid interval [{}, {}]", b.lo, b.hi)));
            }
        }
        let truncated = vec![false; bounds.len()];
        Ok(DesignSpace { bounds, truncated, truncation_note: None })
    }

    pub fn unit_cube(q: usize) -> Self {
        Self::new(vec![Interval::new(0.0, 1.0); q]).expect("unit cube")
    }

    pub fn dimension(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn is_bounded(&self) -> bool {
        self.bounds.iter().all(Interval::is_bounded)
    }

    pub fn truncation_note(&self) -> Option<&str> {
        self.truncation_note.as_deref()
    }

    /// Whether `axis` carries an upper bound introduced by [`truncate`].
    pub fn is_truncated(&self, axis: usize) -> bool {
        self.truncated.get(axis).copied().unwrap_or(false)
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.dim() == self.dimension()
            && x.coords().iter().zip(&self.bounds).all(|(&c, b)| {
                let slack = 1e-12 * (1.0 + c.abs());
                c >= b.lo - slack && c <= b.hi + slack
            })
    }

    fn push_note(&mut self, note: String) {
        match &mut self.truncation_note {
            Some(existing) => {
                existing.push_str("; ");
                existing.push_str(&note);
            }
            None => self.truncation_note = Some(note),
        }
    }
}

/// Replaces the upper bound of `axis` by `new_hi` and records a note.
pub fn truncate(space: &DesignSpace, axis: usize, new_hi: f64) -> Result<DesignSpace> {
    let b = *space
        .bounds
        .get(axis)
        .ok_or_else(|| Error::InvalidArgument(format!("axis {axis} out of range")))?;
    if !new_hi.is_finite() || new_hi <= b.lo {
        return Err(Error::InvalidArgument(format!(
            "truncation bound {new_hi} must be finite and above {}",
            b.lo
        )));
    }
    let mut out = space.clone();
    if b.hi.is_finite() {
        out.push_note(format!("axis {axis} already bounded at {}; truncation to {new_hi} ignored", b.hi));
        return Ok(out);
    }
    out.bounds[axis].hi = new_hi;
    out.truncated[axis] = true;
    out.push_note(format!("axis {axis} truncated from [{}, inf) to [{}, {new_hi}]", b.lo, b.lo));
    Ok(out)
}

/// A finite grid of candidate points over a bounded design space.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    space: DesignSpace,
    points: Vec<Point>,
    resolution: Vec<f64>,
}

impl CandidateSet {
    /// Explicit candidate list; every point must lie in `space` and be distinct.
    pub fn from_points(space: DesignSpace, points: Vec<Point>, resolution: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("empty candidate set".into()));
        }
        if resolution.len() != space.dimension() {
            return Err(Error::InvalidArgument("resolution length differs from dimension".into()));
        }
        for p in &points {
            if !space.contains(p) {
                return Err(Error::OutsideSpace { point: p.coords().to_vec() });
            }
        }
        let mut sorted: Vec<&Point> = points.iter().collect();
        sorted.sort_by(|a, b| lex_cmp(a.coords(), b.coords()));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate candidate points".into()));
        }
        Ok(CandidateSet { space, points, resolution })
    }

    pub fn space(&self) -> &DesignSpace {
        &self.space
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn resolution(&self) -> &[f64] {
        &self.resolution
    }

    /// Largest per-axis grid step.
    pub fn max_step(&self) -> f64 {
        self.resolution.iter().copied().fold(0.0, f64::max)
    }

    /// Whether point `i` sits on the upper edge of a truncated axis.
    pub fn on_truncation_boundary(&self, i: usize) -> bool {
        let p = &self.points[i];
        (0..self.space.dimension()).any(|j| {
            self.space.is_truncated(j)
                && (p.coords()[j] - self.space.bounds[j].hi).abs() <= 1e-9 * self.resolution[j].max(1e-300)
        })
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            core::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Regular grid with `resolution[j]` spacing along axis `j`, first axis slowest.
///
/// Both endpoints of every axis are included. When the step does not divide
/// the axis length, the upper endpoint is appended after the last full step.
pub fn discretize(space: &DesignSpace, resolution: &[f64]) -> Result<CandidateSet> {
    if resolution.len() != space.dimension() {
        return Err(Error::InvalidArgument(format!(
            "{} steps given for a {}-dimensional space",
            resolution.len(),
            space.dimension()
        )));
    }
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(space.dimension());
    for (j, (b, &step)) in space.bounds.iter().zip(resolution).enumerate() {
        if !b.is_bounded() {
            return Err(Error::MustTruncate { axis: j });
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidArgument(format!("axis {j}: step must be positive")));
        }
        axes.push(axis_grid(b.lo, b.hi, step));
    }
    let total: usize = axes.iter().map(Vec::len).product();
    let mut points = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    for _ in 0..total {
        points.push(Point(idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect()));
        for j in (0..axes.len()).rev() {
            idx[j] += 1;
            if idx[j] < axes[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
    Ok(CandidateSet { space: space.clone(), points, resolution: resolution.to_vec() })
}

fn axis_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let span = hi - lo;
    let ratio = span / step;
    let near = libm::round(ratio);
    let full = if (ratio - near).abs() <= 1e-9 * ratio.max(1.0) { near } else { libm::floor(ratio) };
    let n = full as usize;
    let mut out: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).collect();
    if (out[n] - hi).abs() <= 1e-9 * step {
        out[n] = hi;
    } else {
        out.push(hi);
    }
    out
}

/// Positive weight function of the heteroscedastic polynomial model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Efficiency {
    Constant(f64),
    /// `exp(rate * x)`
    Exponential { rate: f64 },
    /// `intercept + slope * x`
    Affine { intercept: f64, slope: f64 },
}

impl Efficiency {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Efficiency::Constant(c) => c,
            Efficiency::Exponential { rate } => exp(rate * x),
            Efficiency::Affine { intercept, slope } => intercept + slope * x,
        }
    }
}

/// One regression function `coef * prod_j x_j^powers[j] * exp(sum_j rates[j] x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub powers: Vec<u32>,
    pub rates: Vec<f64>,
}

impl Term {
    pub fn monomial(powers: Vec<u32>) -> Self {
        let rates = vec![0.0; powers.len()];
        Term { coef: 1.0, powers, rates }
    }

    pub fn exp_monomial(coef: f64, powers: Vec<u32>, rates: Vec<f64>) -> Self {
        Term { coef, powers, rates }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.coef;
        let mut e = 0.0;
        for ((&xi, &p), &r) in x.iter().zip(&self.powers).zip(&self.rates) {
            v *= powi(xi, p);
            e += r * xi;
        }
        if e != 0.0 {
            v *= exp(e);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `(1, x, ..., x^d)`
    Polynomial { degree: usize },
    /// `sqrt(lambda(x)) (1, x, ..., x^d)`
    WeightedPolynomial { degree: usize, efficiency: Efficiency },
    /// `(x1, x2)`
    Linear2fNoIntercept,
    /// `(1, x1, x2, x1 x2)`
    Interaction2f,
    /// Gradient of `sum_l a_l exp(-lambda_l x)` with respect to `(a_l, lambda_l)`.
    ExponentialSum { amplitudes: Vec<f64>, rates: Vec<f64> },
    /// Gradient of `theta0 + exp(-theta1 x1) + exp(-theta2 x2)`.
    ExpGrowth2f { theta: [f64; 3] },
    /// Gradient of `theta0 exp(theta1 x1 + theta2 x2)`.
    ExpProduct2f { theta: [f64; 3] },
    /// Gradient of `theta0 + theta1 x1 + theta2 x1^2 + exp(-theta3 x2)`.
    MixturePolyExp { theta3: f64 },
    /// Arbitrary list of exponential-monomial terms; used for conditional
    /// and marginal models and the reparametrized exponential basis.
    Terms(Vec<Term>),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Polynomial { .. } => "polynomial",
            Family::WeightedPolynomial { .. } => "weighted-polynomial",
            Family::Linear2fNoIntercept => "linear-2f-no-intercept",
            Family::Interaction2f => "interaction-2f",
            Family::ExponentialSum { .. } => "exponential-sum",
            Family::ExpGrowth2f { .. } => "exp-growth-2f",
            Family::ExpProduct2f { .. } => "exp-product-2f",
            Family::MixturePolyExp { .. } => "mixture-poly-exp",
            Family::Terms(_) => "terms",
        }
    }

    /// Number of regression functions.
    pub fn k(&self) -> usize {
        match self {
            Family::Polynomial { degree } | Family::WeightedPolynomial { degree, .. } => degree + 1,
            Family::Linear2fNoIntercept => 2,
            Family::Interaction2f => 4,
            Family::ExponentialSum { amplitudes, .. } => 2 * amplitudes.len(),
            Family::ExpGrowth2f { .. } | Family::ExpProduct2f { .. } => 3,
            Family::MixturePolyExp { .. } => 4,
            Family::Terms(t) => t.len(),
        }
    }

    /// Number of predictors, `None` when it is taken from the design space.
    pub fn q(&self) -> Option<usize> {
        match self {
            Family::Polynomial { .. } | Family::WeightedPolynomial { .. } | Family::ExponentialSum { .. } => Some(1),
            Family::Linear2fNoIntercept
            | Family::Interaction2f
            | Family::ExpGrowth2f { .. }
            | Family::ExpProduct2f { .. }
            | Family::MixturePolyExp { .. } => Some(2),
            Family::Terms(t) => t.first().map(|t| t.powers.len()),
        }
    }

    /// The design space the family is usually studied on, where it has one.
    pub fn default_space(&self) -> Option<DesignSpace> {
        let iv = Interval::new;
        let b = match self {
            Family::Polynomial { .. } | Family::WeightedPolynomial { .. } => vec![iv(0.0, 1.0)],
            Family::Linear2fNoIntercept | Family::Interaction2f | Family::ExpGrowth2f { .. } => {
                vec![iv(0.0, 1.0); 2]
            }
            Family::ExponentialSum { .. } => vec![iv(0.0, f64::INFINITY)],
            Family::MixturePolyExp { .. } => vec![iv(-1.0, 1.0), iv(0.0, 2.0)],
            Family::ExpProduct2f { .. } | Family::Terms(_) => return None,
        };
        DesignSpace::new(b).ok()
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        match self {
            Family::WeightedPolynomial { efficiency, .. } => match *efficiency {
                Efficiency::Constant(c) if !(c > 0.0) || !c.is_finite() => bad(format!("constant efficiency {c} must be positive")),
                Efficiency::Exponential { rate } if !rate.is_finite() => bad("non-finite efficiency rate".into()),
                Efficiency::Affine { intercept, slope } if !intercept.is_finite() || !slope.is_finite() => {
                    bad("non-finite efficiency coefficients".into())
                }
                _ => Ok(()),
            },
            Family::ExponentialSum { amplitudes, rates } => {
                if amplitudes.is_empty() || amplitudes.len() != rates.len() {
                    return bad("exponential-sum needs L >= 1 amplitudes and as many rates".into());
                }
                if amplitudes.iter().any(|a| *a == 0.0 || !a.is_finite()) {
                    return bad("exponential-sum amplitudes must be finite and nonzero".into());
                }
                if !(rates[0] > 0.0) || rates.windows(2).any(|w| !(w[0] < w[1])) || rates.iter().any(|r| !r.is_finite()) {
                    return bad("exponential-sum rates must satisfy 0 < lambda_1 < ... < lambda_L".into());
                }
                Ok(())
            }
            Family::ExpGrowth2f { theta } => {
                if !theta[0].is_finite() || !(theta[1] >= 1.0) || !(theta[2] >= 1.0) || !theta[1].is_finite() || !theta[2].is_finite() {
                    bad(format!("exp-growth-2f needs finite theta with theta1, theta2 >= 1, got {theta:?}"))
                } else {
                    Ok(())
                }
            }
            Family::ExpProduct2f { theta } => {
                if theta.iter().all(|t| *t > 0.0 && t.is_finite()) {
                    Ok(())
                } else {
                    bad(format!("exp-product-2f needs positive theta, got {theta:?}"))
                }
            }
            Family::MixturePolyExp { theta3 } => {
                if *theta3 > 0.0 && theta3.is_finite() {
                    Ok(())
                } else {
                    bad(format!("mixture-poly-exp needs theta3 > 0, got {theta3}"))
                }
            }
            Family::Terms(terms) => {
                let Some(first) = terms.first() else {
                    return bad("terms family needs at least one term".into());
                };
                let q = first.powers.len();
                if q == 0 {
                    return bad("terms need at least one coordinate".into());
                }
                for t in terms {
                    if t.powers.len() != q || t.rates.len() != q || !t.coef.is_finite() || t.rates.iter().any(|r| !r.is_finite()) {
                        return bad("terms must share the dimension and have finite coefficients".into());
                    }
                }
                Ok(())
            }
            Family::Polynomial { .. } | Family::Linear2fNoIntercept | Family::Interaction2f => Ok(()),
        }
    }

    /// Evaluates the regression vector without any domain checks.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Family::Polynomial { degree } => fill_powers(x[0], *degree, 1.0, out),
            Family::WeightedPolynomial { degree, efficiency } => {
                fill_powers(x[0], *degree, sqrt(efficiency.eval(x[0])), out)
            }
            Family::Linear2fNoIntercept => {
                out[0] = x[0];
                out[1] = x[1];
            }
            Family::Interaction2f => {
                out[0] = 1.0;
                out[1] = x[0];
                out[2] = x[1];
                out[3] = x[0] * x[1];
            }
            Family::ExponentialSum { amplitudes, rates } => {
                for (l, (a, r)) in amplitudes.iter().zip(rates).enumerate() {
                    let e = exp(-r * x[0]);
                    out[2 * l] = e;
                    out[2 * l + 1] = -a * x[0] * e;
                }
            }
            Family::ExpGrowth2f { theta } => {
                out[0] = 1.0;
                out[1] = -x[0] * exp(-theta[1] * x[0]);
                out[2] = -x[1] * exp(-theta[2] * x[1]);
            }
            Family::ExpProduct2f { theta } => {
                let e = exp(theta[1] * x[0] + theta[2] * x[1]);
                out[0] = e;
                out[1] = theta[0] * x[0] * e;
                out[2] = theta[0] * x[1] * e;
            }
            Family::MixturePolyExp { theta3 } => {
                out[0] = 1.0;
                out[1] = x[0];
                out[2] = x[0] * x[0] * x[0];
                out[3] = -x[1] * exp(-theta3 * x[1]);
            }
            Family::Terms(terms) => {
                for (o, t) in out.iter_mut().zip(terms) {
                    *o = t.eval(x);
                }
            }
        }
    }
}

fn fill_powers(x: f64, degree: usize, scale: f64, out: &mut [f64]) {
    let mut v = scale;
    for o in out.iter_mut().take(degree + 1) {
        *o = v;
        v *= x;
    }
}

/// A regression model on a design space.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    family: Family,
    space: DesignSpace,
}

impl ModelSpec {
    pub fn new(family: Family, space: DesignSpace) -> Result<Self> {
        family.validate()?;
        if let Some(q) = family.q() {
            if q != space.dimension() {
                return Err(Error::InvalidModel(format!(
                    "{} needs a {q}-dimensional space, got {}",
                    family.name(),
                    space.dimension()
                )));
            }
        }
        if let Family::WeightedPolynomial { efficiency, .. } = &family {
            let b = space.bounds()[0];
            for x in [b.lo, b.hi] {
                if x.is_finite() && !(efficiency.eval(x) > 0.0) {
                    return Err(Error::InvalidModel(format!("efficiency function is not positive at x = {x}")));
                }
            }
            if let Efficiency::Affine { slope, .. } = efficiency {
                if !b.is_bounded() && *slope != 0.0 {
                    return Err(Error::InvalidModel("affine efficiency needs a bounded axis".into()));
                }
            }
        }
        Ok(ModelSpec { family, space })
    }

    /// Model on the family's usual design space.
    pub fn with_default_space(family: Family) -> Result<Self> {
        let space = family
            .default_space()
            .ok_or_else(|| Error::InvalidModel(format!("{} has no default design space", family.name())))?;
        Self::new(family, space)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn space(&self) -> &DesignSpace {
        &self.space
    }

    /// Same family on another design space of matching dimension.
    pub fn with_space(&self, space: DesignSpace) -> Result<Self> {
        Self::new(self.family.clone(), space)
    }

    pub fn k(&self) -> usize {
        self.family.k()
    }

    pub fn q(&self) -> usize {
        self.space.dimension()
    }

    pub fn eval_f(&self, x: &Point) -> Result<DVector<f64>> {
        if !self.space.contains(x) {
            return Err(Error::OutsideSpace { point: x.coords().to_vec() });
        }
        let mut out = DVector::zeros(self.k());
        self.family.eval_into(x.coords(), out.as_mut_slice());
        Ok(out)
    }

    /// Efficiency `lambda(x)` of the weighted polynomial family.
    pub fn eval_efficiency(&self, x: &Point) -> Result<f64> {
        let Family::WeightedPolynomial { efficiency, .. } = &self.family else {
            return Err(Error::InvalidArgument(format!("{} has no efficiency function", self.family.name())));
        };
        if !self.space.contains(x) {
            return Err(Error::OutsideSpace { point: x.coords().to_vec() });
        }
        let v = efficiency.eval(x.coords()[0]);
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::InvalidModel(format!("efficiency {v} is not positive at {x}")))
        }
    }

    /// Regression vectors of every point, row-major.
    pub fn regressors(&self, points: &[Point]) -> Result<Regressors> {
        let k = self.k();
        let mut data = vec![0.0; points.len() * k];
        for (p, row) in points.iter().zip(data.chunks_exact_mut(k)) {
            if !self.space.contains(p) {
                return Err(Error::OutsideSpace { point: p.coords().to_vec() });
            }
            self.family.eval_into(p.coords(), row);
        }
        Ok(Regressors { k, data })
    }
}

/// Row-major table of regression vectors `f(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Regressors {
    k: usize,
    data: Vec<f64>,
}

impl Regressors {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.k.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.k)
    }

    /// `f_i^T A f_i` for every row.
    pub fn quad_forms(&self, a: &DMatrix<f64>) -> Vec<f64> {
        self.rows().map(|f| quad_slice(a, f)).collect()
    }

    /// Gram matrix `sum_i f_i f_i^T`.
    pub fn gram(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.k, self.k);
        for f in self.rows() {
            add_outer(&mut g, f, 1.0);
        }
        g
    }
}

pub(crate) fn quad_slice(a: &DMatrix<f64>, f: &[f64]) -> f64 {
    let k = f.len();
    let mut acc = 0.0;
    for i in 0..k {
        let mut row = 0.0;
        for j in 0..k {
            row += a[(i, j)] * f[j];
        }
        acc += f[i] * row;
    }
    acc
}

pub(crate) fn add_outer(m: &mut DMatrix<f64>, f: &[f64], w: f64) {
    let k = f.len();
    for i in 0..k {
        let wi = w * f[i];
        for j in 0..k {
            m[(i, j)] += wi * f[j];
        }
    }
}
