//! Log-barrier Newton method for small convex programs of the form
//!
//! ```text
//! minimize   1/2 z^T Q z + c^T z
//! subject to a_j^T z < b_j          (j = 1..J)
//!            F0 + sum_a z_a F_a > 0  (one symmetric matrix inequality)
//! ```
//!
//! Problems here have at most a few dozen variables; the constraint count
//! may be in the thousands.

use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::math::ln;

pub(crate) struct Lmi {
    pub f0: DMatrix<f64>,
    pub fs: Vec<DMatrix<f64>>,
}

impl Lmi {
    fn at(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let mut f = self.f0.clone();
        for (za, fa) in z.iter().zip(&self.fs) {
            if *za != 0.0 {
                f += fa * *za;
            }
        }
        f
    }
}

pub(crate) struct Problem {
    pub quad: Option<DMatrix<f64>>,
    pub c: DVector<f64>,
    pub rows: Vec<DVector<f64>>,
    pub rhs: Vec<f64>,
    pub lmi: Option<Lmi>,
}

pub(crate) struct Options {
    pub t0: f64,
    pub growth: f64,
    /// Stop once `(J + r) / t` falls below this.
    pub gap: f64,
    pub max_newton: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { t0: 1.0, growth: 8.0, gap: 1e-11, max_newton: 200 }
    }
}

pub(crate) struct Outcome {
    pub z: DVector<f64>,
}

impl Problem {
    fn objective(&self, z: &DVector<f64>) -> f64 {
        let lin = self.c.dot(z);
        match &self.quad {
            Some(q) => lin + 0.5 * z.dot(&(q * z)),
            None => lin,
        }
    }

    fn slacks(&self, z: &DVector<f64>) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(self.rows.len());
        for (a, b) in self.rows.iter().zip(&self.rhs) {
            let s = b - a.dot(z);
            if !(s > 0.0) {
                return None;
            }
            out.push(s);
        }
        Some(out)
    }

    /// Barrier value `t * obj - sum log s_j - log det F`, `None` when infeasible.
    fn barrier(&self, z: &DVector<f64>, t: f64) -> Option<f64> {
        let slacks = self.slacks(z)?;
        let mut v = t * self.objective(z) - slacks.iter().map(|s| ln(*s)).sum::<f64>();
        if let Some(lmi) = &self.lmi {
            let chol = Cholesky::new(lmi.at(z))?;
            let logdet: f64 = chol.l_dirty().diagonal().iter().map(|d| 2.0 * ln(*d)).sum();
            v -= logdet;
        }
        v.is_finite().then_some(v)
    }

    fn newton_system(&self, z: &DVector<f64>, t: f64) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let n = z.len();
        let mut g = &self.c * t;
        let mut h = DMatrix::zeros(n, n);
        if let Some(q) = &self.quad {
            g += q * z * t;
            h += q * t;
        }
        let slacks = self.slacks(z)?;
        for (a, s) in self.rows.iter().zip(&slacks) {
            g += a / *s;
            h.ger(1.0 / (s * s), a, a, 1.0);
        }
        if let Some(lmi) = &self.lmi {
            let finv = Cholesky::new(lmi.at(z))?.inverse();
            let gs: Vec<DMatrix<f64>> = lmi.fs.iter().map(|fa| &finv * fa).collect();
            for a in 0..n {
                g[a] -= gs[a].trace();
                for b in 0..=a {
                    let v: f64 = gs[a].iter().zip(gs[b].transpose().iter()).map(|(x, y)| x * y).sum();
                    h[(a, b)] += v;
                    if a != b {
                        h[(b, a)] += v;
                    }
                }
            }
        }
        Some((g, h))
    }
}

fn solve_spd(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = h.diagonal().iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1e-300);
    let mut ridge = 0.0;
    for _ in 0..8 {
        let mut hh = h.clone();
        if ridge > 0.0 {
            for i in 0..hh.nrows() {
                hh[(i, i)] += ridge;
            }
        }
        if let Some(ch) = Cholesky::new(hh) {
            return Some(-ch.solve(g));
        }
        ridge = if ridge == 0.0 { 1e-14 * scale } else { ridge * 100.0 };
    }
    None
}

/// Runs the barrier method from the strictly feasible point `z0`.
pub(crate) fn minimize(problem: &Problem, z0: DVector<f64>, opts: &Options) -> Result<Outcome> {
    if problem.barrier(&z0, opts.t0).is_none() {
        return Err(Error::InvalidArgument("barrier start point is not strictly feasible".into()));
    }
    let m = problem.rows.len() as f64 + problem.lmi.as_ref().map_or(0.0, |l| l.f0.nrows() as f64);
    let mut z = z0;
    let mut t = opts.t0;
    loop {
        for _ in 0..opts.max_newton {
            let Some((g, h)) = problem.newton_system(&z, t) else { break };
            let Some(dz) = solve_spd(&h, &g) else { break };
            let decrement = -g.dot(&dz);
            if !(decrement > 1e-14) {
                break;
            }
            let f0 = problem.barrier(&z, t).unwrap_or(f64::INFINITY);
            let mut step = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let cand = &z + &dz * step;
                if let Some(f1) = problem.barrier(&cand, t) {
                    if f1 <= f0 - 0.25 * step * decrement {
                        z = cand;
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !moved || decrement < 1e-12 {
                break;
            }
        }
        if m / t < opts.gap {
            break;
        }
        t *= opts.growth;
    }
    Ok(Outcome { z })
}

/// Variables `(w_1, ..., w_{m-1})` at `offset` encode a point of the simplex
/// with `w_m = 1 - sum`; these rows keep it strictly inside.
fn simplex_rows(n: usize, offset: usize, m: usize) -> (Vec<DVector<f64>>, Vec<f64>) {
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m - 1 {
        let mut a = DVector::zeros(n);
        a[offset + i] = -1.0;
        rows.push(a);
        rhs.push(0.0);
    }
    let mut a = DVector::zeros(n);
    for i in 0..m - 1 {
        a[offset + i] = 1.0;
    }
    rows.push(a);
    rhs.push(1.0);
    (rows, rhs)
}

fn weights_from(z: &DVector<f64>, offset: usize, m: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..m - 1).map(|i| z[offset + i].max(0.0)).collect();
    let rest = 1.0 - w.iter().sum::<f64>();
    w.push(rest.max(0.0));
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

fn interior(w0: &[f64]) -> Vec<f64> {
    let u = 1.0 / w0.len() as f64;
    w0.iter().map(|w| 0.5 * w + 0.5 * u).collect()
}

fn weighted(fs: &[DMatrix<f64>], w: &[f64], offset: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = -offset.clone();
    for (f, wi) in fs.iter().zip(w) {
        m += f * *wi;
    }
    m
}

/// Maximizes `lambda_min(sum_i w_i F_i - G)` over the simplex, starting near `w0`.
pub(crate) fn max_min_eigen(fs: &[DMatrix<f64>], g: &DMatrix<f64>, w0: &[f64], gap: f64) -> Result<(Vec<f64>, f64)> {
    let m = fs.len();
    let k = g.nrows();
    if m == 1 {
        return Ok((alloc::vec![1.0], crate::linalg::lambda_min(&(&fs[0] - g))));
    }
    let start = interior(w0);
    let lam0 = crate::linalg::lambda_min(&weighted(fs, &start, g));
    let scale = fs.iter().map(crate::linalg::max_abs).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let last = &fs[m - 1];
    let mut mats = alloc::vec![-DMatrix::identity(k, k)];
    for f in &fs[..m - 1] {
        mats.push(f - last);
    }
    let (rows, rhs) = simplex_rows(m, 1, m);
    let mut c = DVector::zeros(m);
    c[0] = -1.0 / scale;
    let problem = Problem { quad: None, c, rows, rhs, lmi: Some(Lmi { f0: last - g, fs: mats }) };
    let mut z0 = DVector::zeros(m);
    z0[0] = lam0 - 1e-3 * scale;
    for i in 0..m - 1 {
        z0[i + 1] = start[i];
    }
    let out = minimize(&problem, z0, &Options { gap, ..Default::default() })?;
    let w = weights_from(&out.z, 1, m);
    let s = crate::linalg::lambda_min(&weighted(fs, &w, g));
    Ok((w, s))
}

/// Maximizes `sum_i w_i trace(F_i)` subject to `sum_i w_i F_i - G - level I > 0`
/// from a strictly feasible `w0`.
pub(crate) fn max_trace_at_level(fs: &[DMatrix<f64>], g: &DMatrix<f64>, level: f64, w0: &[f64], gap: f64) -> Result<Vec<f64>> {
    let m = fs.len();
    let k = g.nrows();
    if m == 1 {
        return Ok(alloc::vec![1.0]);
    }
    let scale = fs.iter().map(crate::linalg::max_abs).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let last = &fs[m - 1];
    let mats: Vec<DMatrix<f64>> = fs[..m - 1].iter().map(|f| f - last).collect();
    let (rows, rhs) = simplex_rows(m - 1, 0, m);
    let c = DVector::from_iterator(m - 1, mats.iter().map(|d| -d.trace() / scale));
    let f0 = last - g - DMatrix::identity(k, k) * level;
    let problem = Problem { quad: None, c, rows, rhs, lmi: Some(Lmi { f0, fs: mats }) };
    let z0 = DVector::from_iterator(m - 1, w0[..m - 1].iter().copied());
    let out = minimize(&problem, z0, &Options { gap, ..Default::default() })?;
    Ok(weights_from(&out.z, 0, m))
}
