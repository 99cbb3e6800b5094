//! phi_p-optimal designs on a finite candidate set.
//!
//! The outer loop is a vertex-direction method: after the weights on the
//! current support are optimal, the candidate with the largest sensitivity
//! enters through a line search. Inner weight optimization uses the
//! multiplicative update for D, projected gradient ascent with Armijo
//! backtracking for other finite `p`, and a barrier method for E.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::barrier;
use crate::certificate::{e_certificate_with_gap, Certificate};
use crate::criteria::{dual_matrix, phi_spectrum, Criterion, MULTIPLICITY_GAP};
use crate::design::{info_from_rows, merge_close, prune, Design, InfoMatrix};
use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, SymEigen};
use crate::math::ln;
use crate::model::{add_outer, quad_slice, CandidateSet, ModelSpec, Point, Regressors};

/// Weights below this are removed from the working support.
const DUST: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub enum InitDesign {
    /// Uniform weights on `k + 1` candidates spread by a max-min distance pass.
    Spread,
    User(Design),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_outer_iters: usize,
    pub max_inner_iters: usize,
    /// Allowed slack in the normality inequality.
    pub kkt_tol: f64,
    pub weight_floor: f64,
    pub seed: u64,
    pub init: InitDesign,
    /// Merge distance for the reported design; two grid steps when `None`.
    pub merge_tol: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_outer_iters: 1000,
            max_inner_iters: 20_000,
            kkt_tol: 1e-5,
            weight_floor: 1e-6,
            seed: 0,
            init: InitDesign::Spread,
            merge_tol: None,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if self.max_outer_iters == 0 || self.max_inner_iters == 0 {
            return Err(Error::InvalidArgument("iteration limits must be at least 1".into()));
        }
        if !(self.kkt_tol > 0.0) || !(self.weight_floor > 0.0) || self.weight_floor >= 1.0 {
            return Err(Error::InvalidArgument("tolerances must be positive (weight floor below 1)".into()));
        }
        if let Some(t) = self.merge_tol {
            if !(t >= 0.0) {
                return Err(Error::InvalidArgument("merge tolerance must be nonnegative".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub design: Design,
    pub criterion_value: f64,
    /// Outer iterations performed.
    pub iterations: usize,
    /// `max(0, max f^T N f - 1)` over the candidates for the reported design.
    pub max_sensitivity_violation: f64,
    pub converged: bool,
    /// Criterion value after every outer iteration, starting with the initial design.
    pub history: Vec<f64>,
}

struct Work {
    rows: Regressors,
    k: usize,
    criterion: Criterion,
    max_inner: usize,
    floor: f64,
}

impl Work {
    fn matrix(&self, support: &[usize], w: &[f64]) -> DMatrix<f64> {
        info_from_rows(support.iter().zip(w).map(|(&i, &wi)| (self.rows.row(i), wi)), self.k)
    }

    fn log_value(&self, m: &DMatrix<f64>) -> f64 {
        let eig = SymEigen::new(m);
        let v = phi_spectrum(self.criterion.p(), eig.values.as_slice());
        if v > 0.0 {
            ln(v)
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Certificate used to steer the outer loop; a looser multiplicity gap
    /// lets E iterates reach the repeated-eigenvalue certificate.
    fn certificate(&self, m: &DMatrix<f64>, gap: f64) -> Result<DMatrix<f64>> {
        let info = InfoMatrix::from_sym(m.clone());
        if self.criterion.is_e() {
            Ok(e_certificate_with_gap(&info, &self.rows, gap)?.matrix().clone())
        } else {
            dual_matrix(&self.criterion, &info)
        }
    }

    fn support_grads(&self, support: &[usize], m: &DMatrix<f64>) -> Option<Vec<f64>> {
        let n = dual_matrix(&self.criterion, &InfoMatrix::from_sym(m.clone())).ok()?;
        Some(support.iter().map(|&i| quad_slice(&n, self.rows.row(i))).collect())
    }

    fn kkt_ok(&self, w: &[f64], d: &[f64], tol: f64) -> bool {
        w.iter().zip(d).all(|(&wi, &di)| di <= 1.0 + tol && (wi < self.floor || di >= 1.0 - tol))
    }

    /// Optimizes the weights on a fixed support; never lowers the criterion value.
    fn inner(&self, support: &[usize], w: &mut Vec<f64>, tol: f64) -> Result<()> {
        if support.len() == 1 {
            w[0] = 1.0;
            return Ok(());
        }
        let before = self.log_value(&self.matrix(support, w));
        let mut trial = w.clone();
        if self.criterion.is_e() {
            self.inner_e(support, &mut trial)?;
        } else if self.criterion.is_d() {
            self.inner_multiplicative(support, &mut trial, tol);
        } else {
            self.inner_projected(support, &mut trial, tol);
        }
        if self.log_value(&self.matrix(support, &trial)) >= before {
            *w = trial;
        }
        Ok(())
    }

    /// Zeroes light atoms with sensitivity below one when that does not lower
    /// the criterion (removing such an atom is an ascent direction).
    fn try_drop(&self, support: &[usize], w: &mut [f64], d: &[f64], tol: f64) {
        let top = w.iter().copied().fold(0.0, f64::max);
        let mut f = self.log_value(&self.matrix(support, w));
        for i in 0..w.len() {
            if w[i] > 0.0 && w[i] < 1e-2 * top && d[i] < 1.0 - tol {
                let mut trial = w.to_vec();
                trial[i] = 0.0;
                let s: f64 = trial.iter().sum();
                trial.iter_mut().for_each(|x| *x /= s);
                let g = self.log_value(&self.matrix(support, &trial));
                if g >= f {
                    w.copy_from_slice(&trial);
                    f = g;
                }
            }
        }
    }

    fn inner_multiplicative(&self, support: &[usize], w: &mut [f64], tol: f64) {
        for it in 0..self.max_inner {
            let m = self.matrix(support, w);
            let Some(d) = self.support_grads(support, &m) else { return };
            if self.kkt_ok(w, &d, tol) {
                return;
            }
            if it % 25 == 24 {
                self.try_drop(support, w, &d, tol);
            }
            for (wi, di) in w.iter_mut().zip(&d) {
                *wi *= di;
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= s);
        }
    }

    fn inner_projected(&self, support: &[usize], w: &mut [f64], tol: f64) {
        let mut eta = 1.0;
        let mut f = self.log_value(&self.matrix(support, w));
        for it in 0..self.max_inner {
            let m = self.matrix(support, w);
            let Some(d) = self.support_grads(support, &m) else { return };
            if self.kkt_ok(w, &d, tol) {
                return;
            }
            if it % 25 == 24 {
                self.try_drop(support, w, &d, tol);
                f = self.log_value(&self.matrix(support, w));
            }
            let mut accepted = false;
            for _ in 0..80 {
                let raw: Vec<f64> = w.iter().zip(&d).map(|(wi, di)| wi + eta * di).collect();
                let next = project_simplex(&raw);
                let ascent: f64 = next.iter().zip(w.iter()).zip(&d).map(|((n, o), di)| (n - o) * di).sum();
                let f_next = self.log_value(&self.matrix(support, &next));
                if f_next >= f + 1e-4 * ascent && f_next >= f {
                    w.copy_from_slice(&next);
                    f = f_next;
                    eta = (eta * 2.0).min(1e12);
                    accepted = true;
                    break;
                }
                eta *= 0.5;
            }
            if !accepted {
                return;
            }
        }
    }

    /// max s subject to M(w) - s I > 0 over the simplex on the support.
    fn inner_e(&self, support: &[usize], w: &mut [f64]) -> Result<()> {
        let k = self.k;
        let fs: Vec<DMatrix<f64>> = support
            .iter()
            .map(|&i| {
                let mut f = DMatrix::zeros(k, k);
                add_outer(&mut f, self.rows.row(i), 1.0);
                f
            })
            .collect();
        let zero = DMatrix::zeros(k, k);
        if !(SymEigen::new(&self.matrix(support, &vec![1.0 / w.len() as f64; w.len()])).min() > 0.0) {
            return Ok(());
        }
        let (best, _) = barrier::max_min_eigen(&fs, &zero, w, 1e-13)?;
        w.copy_from_slice(&best);
        Ok(())
    }

    /// Largest `log phi` along `(1 - a) M + a f_j f_j^T`, by golden section.
    fn line_search(&self, m: &DMatrix<f64>, j: usize) -> (f64, f64) {
        let mut fj = DMatrix::zeros(self.k, self.k);
        add_outer(&mut fj, self.rows.row(j), 1.0);
        let g = |a: f64| self.log_value(&(m * (1.0 - a) + &fj * a));
        let r = 0.5 * (libm::sqrt(5.0) - 1.0);
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut x1 = hi - r * (hi - lo);
        let mut x2 = lo + r * (hi - lo);
        let (mut g1, mut g2) = (g(x1), g(x2));
        for _ in 0..90 {
            if g1 >= g2 {
                hi = x2;
                x2 = x1;
                g2 = g1;
                x1 = hi - r * (hi - lo);
                g1 = g(x1);
            } else {
                lo = x1;
                x1 = x2;
                g1 = g2;
                x2 = lo + r * (hi - lo);
                g2 = g(x2);
            }
        }
        let a = 0.5 * (lo + hi);
        (a, g(a))
    }
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|vi| (vi - tau).max(0.0)).collect()
}

fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Greedy max-min distance pass seeded by a random first candidate.
fn spread_indices(points: &[Point], count: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.random_range(0..points.len());
    let mut chosen = vec![first];
    let mut dist: Vec<f64> = points.iter().map(|p| p.dist(&points[first])).collect();
    while chosen.len() < count.min(points.len()) {
        let (j, _) = argmax(&dist);
        chosen.push(j);
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min(p.dist(&points[j]));
        }
    }
    chosen
}

/// Adds candidates until the regression vectors of `support` span `R^k`.
fn complete_rank(rows: &Regressors, support: &mut Vec<usize>) {
    let k = rows.k();
    loop {
        let mut basis: Vec<DVector<f64>> = Vec::new();
        for &i in support.iter() {
            let mut v = DVector::from_column_slice(rows.row(i));
            for b in &basis {
                v -= b * b.dot(&v);
            }
            let n = v.norm();
            if n > 1e-10 * (1.0 + rows.row(i).iter().map(|x| x.abs()).fold(0.0, f64::max)) {
                basis.push(v / n);
            }
        }
        if basis.len() >= k {
            return;
        }
        let mut best = (usize::MAX, 0.0);
        for (i, f) in rows.rows().enumerate() {
            let mut v = DVector::from_column_slice(f);
            for b in &basis {
                v -= b * b.dot(&v);
            }
            let n = v.norm();
            if n > best.1 && !support.contains(&i) {
                best = (i, n);
            }
        }
        if best.0 == usize::MAX {
            return;
        }
        support.push(best.0);
    }
}

fn check_rank(rows: &Regressors) -> Result<()> {
    let rank = numerical_rank(&rows.gram(), 1e-12);
    if rank < rows.k() {
        return Err(Error::DegenerateModel { rank, k: rows.k() });
    }
    Ok(())
}

/// Computes a phi_p-optimal design over `candidates`.
pub fn solve(model: &ModelSpec, candidates: &CandidateSet, criterion: &Criterion, opts: &SolverOptions) -> Result<SolveReport> {
    opts.validate()?;
    let k = model.k();
    let cand_rows = model.regressors(candidates.points())?;
    check_rank(&cand_rows)?;

    let mut points: Vec<Point> = candidates.points().to_vec();
    let (mut support, mut w): (Vec<usize>, Vec<f64>) = match &opts.init {
        InitDesign::Spread => {
            let s = spread_indices(&points, k + 1, opts.seed);
            let n = s.len();
            (s, vec![1.0 / n as f64; n])
        }
        InitDesign::User(d) => {
            let mut s = Vec::new();
            for a in d.atoms() {
                if !model.space().contains(&a.point) {
                    return Err(Error::OutsideSpace { point: a.point.coords().to_vec() });
                }
                match points.iter().position(|p| *p == a.point) {
                    Some(i) => s.push(i),
                    None => {
                        points.push(a.point.clone());
                        s.push(points.len() - 1);
                    }
                }
            }
            (s, d.weights())
        }
    };
    let rows = if points.len() == candidates.len() { cand_rows } else { model.regressors(&points)? };
    let work = Work { rows, k, criterion: *criterion, max_inner: opts.max_inner_iters, floor: opts.weight_floor };

    // A singular start is regularized by mixing in candidates that complete the rank.
    let before = support.len();
    complete_rank(&work.rows, &mut support);
    if support.len() > before {
        let extra = (support.len() - before) as f64;
        let share = 0.1_f64.min(extra / support.len() as f64);
        w.iter_mut().for_each(|wi| *wi *= 1.0 - share);
        w.extend(core::iter::repeat_n(share / extra, support.len() - before));
    }

    // Internal targets sit well below kkt_tol so that only grid points next to
    // a continuum support point keep weight.
    let target = 1e-3 * opts.kkt_tol;
    let inner_tol = 0.1 * target;
    let steer_gap = if criterion.is_e() { 1e-6 } else { MULTIPLICITY_GAP };
    let mut history = vec![ln_to_value(work.log_value(&work.matrix(&support, &w)))];
    let mut iterations = 0;
    let mut stalled = 0;
    for _ in 0..opts.max_outer_iters {
        iterations += 1;
        work.inner(&support, &mut w, inner_tol)?;
        drop_dust(&mut support, &mut w);
        let m = work.matrix(&support, &w);
        let log_before = work.log_value(&m);
        let n = match work.certificate(&m, steer_gap) {
            Ok(n) => n,
            Err(Error::Singular) => {
                history.push(ln_to_value(log_before));
                break;
            }
            Err(e) => return Err(e),
        };
        let sens = work.rows.quad_forms(&n);
        let (j, smax) = argmax(&sens[..candidates.len()]);
        if smax - 1.0 <= target {
            history.push(ln_to_value(log_before));
            break;
        }
        if criterion.is_e() {
            let mut order: Vec<usize> = (0..candidates.len()).filter(|&i| sens[i] > 1.0 + target).collect();
            order.sort_by(|&a, &b| sens[b].total_cmp(&sens[a]).then(a.cmp(&b)));
            let mut added = 0;
            for i in order {
                if added >= k {
                    break;
                }
                if !support.contains(&i) {
                    support.push(i);
                    w.push(0.0);
                    added += 1;
                }
            }
            if added == 0 {
                stalled += 1;
            }
            work.inner(&support, &mut w, inner_tol)?;
            drop_dust(&mut support, &mut w);
        } else if support.contains(&j) {
            // The entering point is already supported: tighten the inner solve.
            work.inner(&support, &mut w, 1e-3 * inner_tol)?;
            stalled += 1;
        } else {
            let (a, g) = work.line_search(&m, j);
            if g > log_before && a > 0.0 {
                w.iter_mut().for_each(|wi| *wi *= 1.0 - a);
                support.push(j);
                w.push(a);
            } else {
                stalled += 1;
            }
        }
        history.push(ln_to_value(work.log_value(&work.matrix(&support, &w))));
        if stalled > 25 {
            break;
        }
    }

    let raw_points: Vec<(Point, f64)> = support.iter().zip(&w).filter(|(_, wi)| **wi > 0.0).map(|(&i, &wi)| (points[i].clone(), wi)).collect();
    let raw = Design::normalized(raw_points)?;
    let pruned = prune(&raw, opts.weight_floor)?;
    let merge_tol = opts.merge_tol.unwrap_or(2.0 * candidates.max_step() * (1.0 + 1e-9));
    let merged = merge_close(&pruned, merge_tol);

    let mut best: Option<(Design, f64, f64)> = None;
    for d in [merged, pruned] {
        let polished = polish(model, &d, criterion, opts, inner_tol)?;
        let (value, violation) = final_check(model, &polished, candidates, criterion)?;
        let better = match &best {
            None => true,
            Some((_, _, v)) => *v > opts.kkt_tol && violation < *v,
        };
        if better {
            best = Some((polished, value, violation));
        }
        if violation <= opts.kkt_tol {
            break;
        }
    }
    let (design, criterion_value, violation) = best.expect("at least one candidate design");
    Ok(SolveReport {
        design,
        criterion_value,
        iterations,
        max_sensitivity_violation: violation,
        converged: violation <= opts.kkt_tol,
        history,
    })
}

fn ln_to_value(v: f64) -> f64 {
    if v == f64::NEG_INFINITY {
        0.0
    } else {
        libm::exp(v)
    }
}

fn drop_dust(support: &mut Vec<usize>, w: &mut Vec<f64>) {
    let mut i = 0;
    while i < support.len() {
        if w[i] < DUST && support.len() > 1 {
            support.remove(i);
            w.remove(i);
        } else {
            i += 1;
        }
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|wi| *wi /= s);
}

/// Re-optimizes weights on the reported support and drops atoms below the floor.
fn polish(model: &ModelSpec, design: &Design, criterion: &Criterion, opts: &SolverOptions, tol: f64) -> Result<Design> {
    let points = design.points();
    let rows = model.regressors(&points)?;
    let work = Work { rows, k: model.k(), criterion: *criterion, max_inner: opts.max_inner_iters, floor: opts.weight_floor };
    let support: Vec<usize> = (0..points.len()).collect();
    let mut w = design.weights();
    if work.log_value(&work.matrix(&support, &w)) == f64::NEG_INFINITY && criterion.p() <= 0.0 {
        return Ok(design.clone());
    }
    work.inner(&support, &mut w, 1e-2 * tol)?;
    let d = Design::normalized(points.into_iter().zip(w).filter(|(_, wi)| *wi > 0.0).collect())?;
    prune(&d, opts.weight_floor)
}

fn final_check(model: &ModelSpec, design: &Design, candidates: &CandidateSet, criterion: &Criterion) -> Result<(f64, f64)> {
    let m = crate::design::info_matrix(design, model)?;
    let value = crate::criteria::phi(criterion, &m)?;
    let rows = model.regressors(candidates.points())?;
    let cert: Certificate = match crate::certificate::build_from_rows(criterion, &m, &rows) {
        Ok(c) => c,
        Err(Error::Singular) => return Ok((value, f64::INFINITY)),
        Err(e) => return Err(e),
    };
    let smax = rows.quad_forms(cert.matrix()).into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok((value, (smax - 1.0).max(0.0)))
}

/// Optimal weights on a fixed support.
pub fn refine_weights(model: &ModelSpec, support: &[Point], criterion: &Criterion, opts: &SolverOptions) -> Result<Design> {
    opts.validate()?;
    if support.is_empty() {
        return Err(Error::EmptyDesign);
    }
    let rows = model.regressors(support)?;
    if criterion.p() <= 0.0 {
        check_rank(&rows)?;
    }
    let n = support.len();
    let work = Work { rows, k: model.k(), criterion: *criterion, max_inner: opts.max_inner_iters, floor: opts.weight_floor };
    let idx: Vec<usize> = (0..n).collect();
    let mut w = vec![1.0 / n as f64; n];
    work.inner(&idx, &mut w, 0.1 * opts.kkt_tol)?;
    Design::normalized(support.iter().cloned().zip(w).filter(|(_, wi)| *wi > 0.0).collect())
}
