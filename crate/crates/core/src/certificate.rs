//! Dual certificates, the equivalence-theorem check and the geometry of
//! the support of an optimal design.
//!
//! A certificate is a nonnegative definite matrix `N` with
//! `f(x)^T N f(x) <= 1` over the candidates. Together with
//! `trace(M N) = phi(M) phi^inf(N) = 1` it proves that `M` is optimal, and
//! its eigenbasis `Z` turns every support point `x*` into a point
//! `P_Z(x*) = (Z^T f(x*))^2` lying on an active face of the polytope
//! `{lambda >= 0 : P_Z(x)^T lambda <= 1 for all x}`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::barrier::{self, Lmi, Problem};
use crate::criteria::{dual_matrix, phi, polar, Criterion, MULTIPLICITY_GAP};
use crate::design::{info_matrix, Design, InfoMatrix};
use crate::error::{Error, Result};
use crate::linalg::{trace_product, SymEigen};
use crate::math::sqrt;
use crate::model::{quad_slice, CandidateSet, Family, ModelSpec, Point, Regressors, Term};
use crate::solver::{solve, SolverOptions};

/// Relative infinity-norm distance under which two constraint vectors are one hyperplane.
pub const HYPERPLANE_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    n: DMatrix<f64>,
    z: DMatrix<f64>,
    lambda: DVector<f64>,
    bound: f64,
}

impl Certificate {
    /// Wraps a dual matrix and computes its eigendecomposition (descending).
    pub fn new(n: DMatrix<f64>) -> Self {
        let eig = SymEigen::new(&n);
        let lambda = eig.values.map(|v| v.max(0.0));
        Certificate { n, z: eig.vectors, lambda, bound: 1.0 }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.n
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn lambda(&self) -> &DVector<f64> {
        &self.lambda
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn sensitivity(&self, f: &[f64]) -> f64 {
        quad_slice(&self.n, f)
    }

    /// `P_Z(x) = (h_1^2, ..., h_k^2)` with `h = Z^T f(x)`.
    pub fn squared_coords(&self, f: &[f64]) -> DVector<f64> {
        let fv = DVector::from_column_slice(f);
        (self.z.transpose() * fv).map(|h| h * h)
    }
}

/// Builds the dual matrix of the equivalence theorem for a positive definite `M`.
///
/// For E with a repeated smallest eigenvalue the certificate is
/// `V E V^T / lambda_min`, where `V` spans the smallest eigenspace and the
/// trace-one PSD matrix `E` minimizes the largest sensitivity over the
/// candidates; among minimizers the one closest to `I / r` is returned.
pub fn build_certificate(
    criterion: &Criterion,
    m: &InfoMatrix,
    model: &ModelSpec,
    candidates: &CandidateSet,
) -> Result<Certificate> {
    let rows = model.regressors(candidates.points())?;
    build_from_rows(criterion, m, &rows)
}

pub(crate) fn build_from_rows(criterion: &Criterion, m: &InfoMatrix, rows: &Regressors) -> Result<Certificate> {
    if criterion.is_e() {
        return e_certificate_with_gap(m, rows, MULTIPLICITY_GAP);
    }
    dual_matrix(criterion, m).map(Certificate::new)
}

/// E certificate treating eigenvalues within `gap * lambda_max` of the smallest as one eigenspace.
pub(crate) fn e_certificate_with_gap(m: &InfoMatrix, rows: &Regressors, gap: f64) -> Result<Certificate> {
    let eig = m.eigen();
    let lo = eig.min();
    if !(eig.max() > 0.0) || lo <= crate::linalg::EIGEN_CLAMP * eig.max() {
        return Err(Error::Singular);
    }
    let cluster = eig.min_cluster(gap);
    if cluster.len() == 1 {
        let z = eig.vectors.column(cluster[0]).into_owned();
        return Ok(Certificate::new(&z * z.transpose() / lo));
    }
    Ok(Certificate::new(e_minimax(&eig, &cluster, rows)?))
}

/// Trace-zero symmetric basis used to parametrize `E = I/r + sum y_a B_a`.
fn trace_zero_basis(r: usize) -> Vec<DMatrix<f64>> {
    let mut basis = Vec::new();
    for i in 0..r - 1 {
        let mut b = DMatrix::zeros(r, r);
        b[(i, i)] = 1.0;
        b[(r - 1, r - 1)] = -1.0;
        basis.push(b);
    }
    let s = core::f64::consts::FRAC_1_SQRT_2;
    for i in 0..r {
        for j in 0..i {
            let mut b = DMatrix::zeros(r, r);
            b[(i, j)] = s;
            b[(j, i)] = s;
            basis.push(b);
        }
    }
    basis
}

fn e_minimax(eig: &SymEigen, cluster: &[usize], rows: &Regressors) -> Result<DMatrix<f64>> {
    let r = cluster.len();
    let k = eig.values.len();
    let lam = eig.min();
    let mut v = DMatrix::zeros(k, r);
    for (c, &i) in cluster.iter().enumerate() {
        v.set_column(c, &eig.vectors.column(i));
    }
    let basis = trace_zero_basis(r);
    let d = basis.len();
    // g_j(y) = base_j + coef_j . y
    let mut base = Vec::with_capacity(rows.len());
    let mut coef: Vec<DVector<f64>> = Vec::with_capacity(rows.len());
    for f in rows.rows() {
        let u = v.transpose() * DVector::from_column_slice(f);
        base.push(u.norm_squared() / (r as f64 * lam));
        coef.push(DVector::from_iterator(d, basis.iter().map(|b| crate::linalg::quad(b, &u) / lam)));
    }
    let g_at = |y: &DVector<f64>| -> Vec<f64> { base.iter().zip(&coef).map(|(b, c)| b + c.dot(y)).collect() };
    let lmi_for = |offset: usize, n: usize| Lmi {
        f0: DMatrix::identity(r, r) / r as f64,
        fs: (0..n).map(|a| if a < offset { DMatrix::zeros(r, r) } else { basis[a - offset].clone() }).collect(),
    };
    let top_indices = |vals: &[f64], count: usize| -> Vec<usize> {
        let mut idx: Vec<usize> = (0..vals.len()).collect();
        idx.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
        idx.truncate(count);
        idx
    };

    // Stage 1: minimize s subject to g_j(y) < s over an active set that grows
    // until no candidate exceeds the optimum.
    let mut active = top_indices(&base, (8 * (d + 1)).max(16));
    let mut y = DVector::zeros(d);
    let mut best_s = f64::INFINITY;
    for _ in 0..30 {
        let g = g_at(&y);
        let s0 = active.iter().map(|&j| g[j]).fold(f64::NEG_INFINITY, f64::max).abs() * 1e-3 + 1.0
            + active.iter().map(|&j| g[j]).fold(f64::NEG_INFINITY, f64::max);
        let mut z0 = DVector::zeros(d + 1);
        z0[0] = s0;
        z0.rows_mut(1, d).copy_from(&y);
        let mut c = DVector::zeros(d + 1);
        c[0] = 1.0;
        let problem = Problem {
            quad: None,
            c,
            rows: active
                .iter()
                .map(|&j| {
                    let mut a = DVector::zeros(d + 1);
                    a[0] = -1.0;
                    a.rows_mut(1, d).copy_from(&coef[j]);
                    a
                })
                .collect(),
            rhs: active.iter().map(|&j| -base[j]).collect(),
            lmi: Some(lmi_for(1, d + 1)),
        };
        let out = barrier::minimize(&problem, z0, &barrier::Options { gap: 1e-12, ..Default::default() })?;
        y = out.z.rows(1, d).into_owned();
        let g = g_at(&y);
        let smax = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        best_s = out.z[0];
        let violators: Vec<usize> = top_indices(&g, 32)
            .into_iter()
            .filter(|j| g[*j] > best_s && !active.contains(j))
            .collect();
        if violators.is_empty() || smax <= best_s * (1.0 + 1e-13) {
            break;
        }
        active.extend(violators);
    }
    let g = g_at(&y);
    let s_star = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(s_star.is_finite()) || s_star > best_s.abs() * (1.0 + 1e-6) + 1e-9 {
        return Err(Error::CertificateFailure { residual: s_star - best_s });
    }

    // Stage 2: among (nearly) minimax E pick the one closest to I/r.
    let level = s_star + 1e-9 * s_star.abs().max(1e-12);
    let gram = DMatrix::from_fn(d, d, |a, b| trace_product(&basis[a], &basis[b]));
    let y_stage1 = y.clone();
    for _ in 0..30 {
        let problem = Problem {
            quad: Some(gram.clone()),
            c: DVector::zeros(d),
            rows: active.iter().map(|&j| coef[j].clone()).collect(),
            rhs: active.iter().map(|&j| level - base[j]).collect(),
            lmi: Some(lmi_for(0, d)),
        };
        let out = barrier::minimize(&problem, y_stage1.clone(), &barrier::Options { gap: 1e-13, ..Default::default() })?;
        let g = g_at(&out.z);
        let violators: Vec<usize> = top_indices(&g, 32)
            .into_iter()
            .filter(|j| g[*j] > level && !active.contains(j))
            .collect();
        y = out.z;
        if violators.is_empty() {
            break;
        }
        active.extend(violators);
    }
    let mut e = DMatrix::identity(r, r) / r as f64;
    for (ya, b) in y.iter().zip(&basis) {
        e += b * *ya;
    }
    let n = &v * e * v.transpose() / lam;
    Ok(crate::linalg::symmetrize(&n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyReport {
    pub optimal: bool,
    pub tol: f64,
    /// `trace(M N)`
    pub trace_mn: f64,
    /// `phi(M) * phi^inf(N)`
    pub phi_times_polar: f64,
    pub criterion_value: f64,
    /// Largest `f^T N f` over the candidates.
    pub max_sensitivity: f64,
    /// `max(0, max_sensitivity - bound)`.
    pub max_violation: f64,
    pub violating_point: Option<Point>,
    /// `f^T N f` at every design atom, in atom order.
    pub support_sensitivities: Vec<f64>,
    pub max_support_deviation: f64,
    /// `bound - max f^T N f` over candidates on the edge of a truncated axis.
    pub truncation_slack: Option<f64>,
    pub warnings: Vec<String>,
    pub certificate: Certificate,
    /// `f^T N f` for every candidate, in candidate order.
    pub sensitivities: Vec<f64>,
}

/// Checks the equivalence-theorem conditions for `design` at tolerance `tol`.
pub fn certify(
    design: &Design,
    model: &ModelSpec,
    candidates: &CandidateSet,
    criterion: &Criterion,
    tol: f64,
) -> Result<CertifyReport> {
    let m = info_matrix(design, model)?;
    let rows = model.regressors(candidates.points())?;
    let cert = build_from_rows(criterion, &m, &rows)?;
    Ok(check_certificate(design, model, candidates, &rows, criterion, &m, cert, tol))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn check_certificate(
    design: &Design,
    model: &ModelSpec,
    candidates: &CandidateSet,
    rows: &Regressors,
    criterion: &Criterion,
    m: &InfoMatrix,
    cert: Certificate,
    tol: f64,
) -> CertifyReport {
    let sens = rows.quad_forms(cert.matrix());
    let (mut arg, mut max_s) = (0, f64::NEG_INFINITY);
    for (i, &s) in sens.iter().enumerate() {
        if s > max_s {
            max_s = s;
            arg = i;
        }
    }
    let bound = cert.bound();
    let mut f = vec![0.0; model.k()];
    let support: Vec<f64> = design
        .atoms()
        .iter()
        .map(|a| {
            model.family().eval_into(a.point.coords(), &mut f);
            cert.sensitivity(&f)
        })
        .collect();
    let max_support_deviation = support.iter().fold(0.0_f64, |acc, s| acc.max((s - bound).abs()));
    let trace_mn = trace_product(m.matrix(), cert.matrix());
    let value = phi(criterion, m).unwrap_or(0.0);
    let polar_value = InfoMatrix::new(cert.matrix().clone())
        .and_then(|n| polar(criterion, &n))
        .map(|p| p.value())
        .unwrap_or(f64::NAN);
    let phi_times_polar = value * polar_value;

    let mut warnings = Vec::new();
    let mut truncation_slack = None;
    let boundary: Vec<usize> = (0..candidates.len()).filter(|&i| candidates.on_truncation_boundary(i)).collect();
    if !boundary.is_empty() {
        let edge = boundary.iter().map(|&i| sens[i]).fold(f64::NEG_INFINITY, f64::max);
        let slack = bound - edge;
        truncation_slack = Some(slack);
        if candidates.on_truncation_boundary(arg) {
            warnings.push(format!(
                "sensitivity peaks on the truncated boundary at {}; enlarge the truncated axis",
                candidates.points()[arg]
            ));
        } else if slack <= tol {
            warnings.push(format!(
                "normality inequality is not slack at the truncation boundary (slack {slack:e}); enlarge the truncated axis"
            ));
        }
    }
    let max_violation = (max_s - bound).max(0.0);
    let optimal = max_violation <= tol
        && max_support_deviation <= tol
        && (trace_mn - 1.0).abs() <= tol
        && (phi_times_polar - 1.0).abs() <= tol;
    CertifyReport {
        optimal,
        tol,
        trace_mn,
        phi_times_polar,
        criterion_value: value,
        max_sensitivity: max_s,
        max_violation,
        violating_point: (max_violation > tol).then(|| candidates.points()[arg].clone()),
        support_sensitivities: support,
        max_support_deviation,
        truncation_slack,
        warnings,
        certificate: cert,
        sensitivities: sens,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    /// Constraint vector `c` of the face `c^T lambda = 1`.
    pub c: DVector<f64>,
    pub active_support: Vec<Point>,
    /// `||f(x*)||` of every active support point.
    pub lengths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeReport {
    pub z: DMatrix<f64>,
    pub lambda: DVector<f64>,
    pub hyperplanes: Vec<Hyperplane>,
    /// `P_Z(x)` of every candidate, in candidate order.
    pub squared_coords: Vec<DVector<f64>>,
    /// `P_Z(x*)` of every design atom, in atom order.
    pub support_coords: Vec<(Point, DVector<f64>)>,
    /// Support points partitioned by `||f||`.
    pub length_groups: Vec<Vec<Point>>,
    /// Largest spread of `||f||` inside one hyperplane.
    pub max_length_spread: f64,
    /// Largest `P_Z(x)^T lambda` over the candidates.
    pub max_constraint: f64,
}

/// Active faces of the certificate polytope at the support of `design`.
pub fn polytope_report(
    certificate: &Certificate,
    design: &Design,
    model: &ModelSpec,
    candidates: &CandidateSet,
    tol: f64,
) -> Result<PolytopeReport> {
    let lambda = certificate.lambda().clone();
    let rows = model.regressors(candidates.points())?;
    let squared_coords: Vec<DVector<f64>> = rows.rows().map(|f| certificate.squared_coords(f)).collect();
    let max_constraint = squared_coords.iter().map(|c| c.dot(&lambda)).fold(f64::NEG_INFINITY, f64::max);
    if max_constraint > certificate.bound() + tol {
        return Err(Error::Inconsistent(format!(
            "a candidate violates the polytope constraint ({max_constraint} > 1)"
        )));
    }

    let mut support_coords = Vec::with_capacity(design.len());
    let mut lengths = Vec::with_capacity(design.len());
    for a in design.atoms() {
        let f = model.eval_f(&a.point)?;
        let c = certificate.squared_coords(f.as_slice());
        let level = c.dot(&lambda);
        if (level - certificate.bound()).abs() > tol {
            return Err(Error::Inconsistent(format!(
                "constraint of support point {} is not active (P_Z^T lambda = {level})",
                a.point
            )));
        }
        lengths.push(f.norm());
        support_coords.push((a.point.clone(), c));
    }

    let mut hyperplanes: Vec<Hyperplane> = Vec::new();
    for ((p, c), len) in support_coords.iter().zip(&lengths) {
        let scale = c.amax();
        let found = hyperplanes.iter_mut().find(|h| {
            let s = scale.max(h.c.amax()).max(f64::MIN_POSITIVE);
            (&h.c - c).amax() <= HYPERPLANE_TOL * s
        });
        match found {
            Some(h) => {
                h.active_support.push(p.clone());
                h.lengths.push(*len);
            }
            None => hyperplanes.push(Hyperplane { c: c.clone(), active_support: vec![p.clone()], lengths: vec![*len] }),
        }
    }
    let max_length_spread = hyperplanes
        .iter()
        .map(|h| {
            let lo = h.lengths.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = h.lengths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        })
        .fold(0.0, f64::max);

    let max_len = lengths.iter().copied().fold(0.0, f64::max);
    let groups = group_sorted(&lengths, HYPERPLANE_TOL * max_len.max(f64::MIN_POSITIVE));
    let length_groups = groups
        .into_iter()
        .map(|g| g.into_iter().map(|i| design.atoms()[i].point.clone()).collect())
        .collect();

    Ok(PolytopeReport {
        z: certificate.z().clone(),
        lambda,
        hyperplanes,
        squared_coords,
        support_coords,
        length_groups,
        max_length_spread,
        max_constraint,
    })
}

/// Groups indices whose values chain together within `tol`, in ascending value order.
fn group_sorted(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for i in idx {
        match groups.last_mut() {
            Some(g) if values[i] - last <= tol => g.push(i),
            _ => groups.push(vec![i]),
        }
        last = values[i];
    }
    groups
}

#[derive(Debug, Clone, PartialEq)]
pub struct GarzaReport {
    pub k: usize,
    /// `||f(x)||^2` for every candidate, in candidate order.
    pub norm_values: Vec<f64>,
    pub max_equal_group_size: usize,
    pub saturation_bound: usize,
    pub injective: bool,
    pub monotone_axis_note: Option<String>,
}

/// Looks for repeated lengths in the induced design space.
///
/// Injective norms give a `k`-point optimal design; at most `N` vectors of
/// one length give at most `N k` support points.
pub fn garza_report(model: &ModelSpec, candidates: &CandidateSet, norm_tol: f64) -> Result<GarzaReport> {
    let rows = model.regressors(candidates.points())?;
    let norm_values: Vec<f64> = rows.rows().map(|f| f.iter().map(|v| v * v).sum()).collect();
    let groups = group_sorted(&norm_values, norm_tol);
    let n = groups.iter().map(Vec::len).max().unwrap_or(0);
    let k = model.k();
    let injective = n == 1;
    let monotone_axis_note = if model.q() == 1 {
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|&a, &b| candidates.points()[a].coords()[0].total_cmp(&candidates.points()[b].coords()[0]));
        let vals: Vec<f64> = order.iter().map(|&i| norm_values[i]).collect();
        if vals.windows(2).all(|w| w[1] - w[0] > norm_tol) {
            Some("||f(x)||^2 is strictly increasing along the axis".into())
        } else if vals.windows(2).all(|w| w[0] - w[1] > norm_tol) {
            Some("||f(x)||^2 is strictly decreasing along the axis".into())
        } else {
            None
        }
    } else {
        None
    };
    Ok(GarzaReport {
        k,
        norm_values,
        max_equal_group_size: n,
        saturation_bound: if injective { k } else { n * k },
        injective,
        monotone_axis_note,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaturationCheck {
    pub holds: bool,
    /// `lambda_i - |a_i| / 2`
    pub margins: Vec<f64>,
}

/// Checks `lambda_i >= |a_i| / 2` for the exponential-sum model, under which
/// the norm of the gradient is strictly decreasing on `[0, inf)`.
pub fn exp_saturation_check(amplitudes: &[f64], rates: &[f64]) -> Result<SaturationCheck> {
    ModelSpec::with_default_space(Family::ExponentialSum { amplitudes: amplitudes.to_vec(), rates: rates.to_vec() })?;
    let margins: Vec<f64> = amplitudes.iter().zip(rates).map(|(a, l)| l - a.abs() / 2.0).collect();
    Ok(SaturationCheck { holds: margins.iter().all(|m| *m >= 0.0), margins })
}

/// Exponential basis `(exp(-l_1 x), c x exp(-l_1 x), ...)` whose D-optimal
/// designs coincide with those of the gradient model.
pub fn rescaled_exponential_model(rates: &[f64], c: f64, space: crate::model::DesignSpace) -> Result<ModelSpec> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidArgument(format!("rescaling constant {c} must be positive")));
    }
    let terms = rates
        .iter()
        .flat_map(|&l| [Term::exp_monomial(1.0, vec![0], vec![-l]), Term::exp_monomial(c, vec![1], vec![-l])])
        .collect();
    ModelSpec::new(Family::Terms(terms), space)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescaleCheck {
    pub coincide: bool,
    pub original: Design,
    pub rescaled: Design,
    pub max_support_distance: f64,
    pub max_weight_difference: f64,
}

/// Solves the D-problem for the gradient model and for the rescaled basis and
/// compares the two designs (support within one grid step, weights within 1e-4).
pub fn rescale_invariance_check(
    amplitudes: &[f64],
    rates: &[f64],
    c: f64,
    candidates: &CandidateSet,
    opts: &SolverOptions,
) -> Result<RescaleCheck> {
    let family = Family::ExponentialSum { amplitudes: amplitudes.to_vec(), rates: rates.to_vec() };
    let f_model = ModelSpec::new(family, candidates.space().clone())?;
    let g_model = rescaled_exponential_model(rates, c, candidates.space().clone())?;
    let a = solve(&f_model, candidates, &Criterion::D, opts)?.design;
    let b = solve(&g_model, candidates, &Criterion::D, opts)?.design;
    let (dist, dw) = compare_designs(&a, &b);
    let coincide = a.len() == b.len() && dist <= candidates.max_step() * (1.0 + 1e-9) && dw <= 1e-4;
    Ok(RescaleCheck { coincide, original: a, rescaled: b, max_support_distance: dist, max_weight_difference: dw })
}

/// Largest nearest-atom distance and weight difference between two designs.
pub fn compare_designs(a: &Design, b: &Design) -> (f64, f64) {
    let mut dist = 0.0_f64;
    let mut dw = 0.0_f64;
    for (x, y) in [(a, b), (b, a)] {
        for atom in x.atoms() {
            let nearest = y
                .atoms()
                .iter()
                .min_by(|p, q| atom.point.dist(&p.point).total_cmp(&atom.point.dist(&q.point)));
            match nearest {
                Some(n) => {
                    dist = dist.max(atom.point.dist(&n.point));
                    dw = dw.max((atom.weight - n.weight).abs());
                }
                None => return (f64::INFINITY, 1.0),
            }
        }
    }
    (dist, dw)
}

/// `||f||` helper shared with reports.
pub fn regression_norm(model: &ModelSpec, x: &Point) -> Result<f64> {
    Ok(sqrt(model.eval_f(x)?.norm_squared()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{discretize, DesignSpace};

    fn linear2() -> (ModelSpec, CandidateSet) {
        let m = ModelSpec::with_default_space(Family::Linear2fNoIntercept).unwrap();
        let c = discretize(m.space(), &[0.05, 0.05]).unwrap();
        (m, c)
    }

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec())
    }

    fn d_opt() -> Design {
        let t = 1.0 / 3.0;
        Design::new(vec![(p(&[1.0, 1.0]), t), (p(&[1.0, 0.0]), t), (p(&[0.0, 1.0]), t)]).unwrap()
    }

    #[test]
    fn d_certificate_is_scaled_inverse() {
        let (model, cands) = linear2();
        let m = info_matrix(&d_opt(), &model).unwrap();
        let cert = build_certificate(&Criterion::D, &m, &model, &cands).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0]);
        assert!((cert.matrix() - &want).amax() < 1e-12);
        assert!((trace_product(m.matrix(), cert.matrix()) - 1.0).abs() < 1e-12);
        let recon = cert.z() * DMatrix::from_diagonal(cert.lambda()) * cert.z().transpose();
        assert!((recon - want).amax() < 1e-10);
    }

    #[test]
    fn e_certificate_with_repeated_eigenvalue() {
        let (model, cands) = linear2();
        let m = InfoMatrix::new(DMatrix::from_diagonal_element(2, 2, 0.5)).unwrap();
        let cert = build_certificate(&Criterion::E, &m, &model, &cands).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0]);
        assert!((cert.matrix() - want).amax() < 1e-6, "{}", cert.matrix());
        let rows = model.regressors(cands.points()).unwrap();
        let max = rows.quad_forms(cert.matrix()).into_iter().fold(f64::MIN, f64::max);
        assert!(max <= 1.0 + 1e-8);
    }

    #[test]
    fn identity_information_gives_scaled_identity() {
        // f(x) = (x1, x2) / sqrt(2) keeps ||f||^2 <= 1 <= k on the unit square.
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let fam = Family::Terms(vec![
            Term::exp_monomial(s, vec![1, 0], vec![0.0, 0.0]),
            Term::exp_monomial(s, vec![0, 1], vec![0.0, 0.0]),
        ]);
        let model = ModelSpec::new(fam, DesignSpace::unit_cube(2)).unwrap();
        let cands = discretize(model.space(), &[0.5, 0.5]).unwrap();
        let m = InfoMatrix::new(DMatrix::identity(2, 2)).unwrap();
        let cert = build_certificate(&Criterion::D, &m, &model, &cands).unwrap();
        assert!((cert.matrix() - DMatrix::identity(2, 2) / 2.0).amax() < 1e-14);
    }

    #[test]
    fn certify_optimal_and_perturbed() {
        let (model, cands) = linear2();
        let rep = certify(&d_opt(), &model, &cands, &Criterion::D, 1e-9).unwrap();
        assert!(rep.optimal);
        assert!(rep.support_sensitivities.iter().all(|s| (s - 1.0).abs() < 1e-12));

        let bad = Design::new(vec![(p(&[1.0, 1.0]), 0.5), (p(&[1.0, 0.0]), 0.25), (p(&[0.0, 1.0]), 0.25)]).unwrap();
        let rep = certify(&bad, &model, &cands, &Criterion::D, 1e-9).unwrap();
        assert!(!rep.optimal);
        assert!(rep.max_violation > 0.0);
        let v = rep.violating_point.unwrap();
        assert!(v == p(&[1.0, 0.0]) || v == p(&[0.0, 1.0]));
    }

    #[test]
    fn uniform_grid_design_is_not_d_optimal() {
        let (model, cands) = linear2();
        let d = Design::uniform(cands.points().to_vec()).unwrap();
        let rep = certify(&d, &model, &cands, &Criterion::D, 1e-5).unwrap();
        assert!(!rep.optimal);
        // f^T M^-1 f peaks at the corners on the axes
        let v = rep.violating_point.unwrap();
        assert_eq!(v, p(&[0.0, 1.0]));
    }

    #[test]
    fn polytope_of_d_optimal_design() {
        let (model, cands) = linear2();
        let m = info_matrix(&d_opt(), &model).unwrap();
        let cert = build_certificate(&Criterion::D, &m, &model, &cands).unwrap();
        let rep = polytope_report(&cert, &d_opt(), &model, &cands, 1e-9).unwrap();
        assert_eq!(rep.hyperplanes.len(), 2);
        let h_single = rep.hyperplanes.iter().find(|h| h.active_support.len() == 1).unwrap();
        let h_pair = rep.hyperplanes.iter().find(|h| h.active_support.len() == 2).unwrap();
        assert!((&h_single.c - DVector::from_vec(vec![0.0, 2.0])).amax() < 1e-12);
        assert!((&h_pair.c - DVector::from_vec(vec![0.5, 0.5])).amax() < 1e-12);
        assert_eq!(h_single.active_support, vec![p(&[1.0, 1.0])]);
        assert!(h_pair.lengths.iter().all(|l| (l - 1.0).abs() < 1e-15));
    }

    #[test]
    fn scalar_model_has_one_hyperplane() {
        let model = ModelSpec::new(Family::Terms(vec![Term::monomial(vec![1])]), DesignSpace::unit_cube(1)).unwrap();
        let cands = discretize(model.space(), &[0.1]).unwrap();
        let d = Design::new(vec![(p(&[1.0]), 1.0)]).unwrap();
        let m = info_matrix(&d, &model).unwrap();
        let cert = build_certificate(&Criterion::D, &m, &model, &cands).unwrap();
        let rep = polytope_report(&cert, &d, &model, &cands, 1e-12).unwrap();
        assert_eq!(rep.hyperplanes.len(), 1);
        assert!((rep.hyperplanes[0].c[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn polytope_rejects_inactive_support() {
        let (model, cands) = linear2();
        let m = info_matrix(&d_opt(), &model).unwrap();
        let cert = build_certificate(&Criterion::D, &m, &model, &cands).unwrap();
        let other = Design::new(vec![(p(&[0.5, 0.5]), 1.0)]).unwrap();
        assert!(matches!(polytope_report(&cert, &other, &model, &cands, 1e-9), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn saturation_margins() {
        let ok = exp_saturation_check(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
        assert!(ok.holds);
        assert_eq!(ok.margins, vec![0.5, 1.5]);
        let bad = exp_saturation_check(&[3.0], &[1.0]).unwrap();
        assert!(!bad.holds);
        assert_eq!(bad.margins, vec![-0.5]);
        let edge = exp_saturation_check(&[2.0], &[1.0]).unwrap();
        assert!(edge.holds);
        assert_eq!(edge.margins, vec![0.0]);
        assert!(exp_saturation_check(&[1.0], &[-1.0]).is_err());
    }

    #[test]
    fn garza_on_mixture_marginal_is_two_to_one() {
        let fam = Family::Terms(vec![Term::monomial(vec![0]), Term::monomial(vec![1]), Term::monomial(vec![3])]);
        let space = DesignSpace::new(vec![crate::model::Interval::new(-1.0, 1.0)]).unwrap();
        let model = ModelSpec::new(fam, space).unwrap();
        let cands = discretize(model.space(), &[0.01]).unwrap();
        let rep = garza_report(&model, &cands, 1e-12).unwrap();
        assert!(!rep.injective);
        assert_eq!(rep.max_equal_group_size, 2);
        assert_eq!(rep.saturation_bound, 6);
    }
}
