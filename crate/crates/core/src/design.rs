//! Approximate designs, information matrices and design hygiene.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{is_symmetric, max_abs, numerical_rank, SymEigen};
use crate::model::{add_outer, ModelSpec, Point};

/// Tolerance on the total weight of a design.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub point: Point,
    pub weight: f64,
}

/// A probability measure with finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    atoms: Vec<Atom>,
}

impl Design {
    /// Checks positivity, unit total weight and distinct support points.
    pub fn new(atoms: Vec<(Point, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyDesign);
        }
        let q = atoms[0].0.dim();
        let mut total = 0.0;
        for (p, w) in &atoms {
            if p.dim() != q {
                return Err(Error::InvalidArgument("atoms of different dimension".into()));
            }
            if !(*w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidArgument(format!("weight {w} at {p} is not positive")));
            }
            total += w;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        for i in 0..atoms.len() {
            for j in 0..i {
                if atoms[i].0 == atoms[j].0 {
                    return Err(Error::InvalidArgument(format!("duplicate support point {}", atoms[i].0)));
                }
            }
        }
        Ok(Design { atoms: atoms.into_iter().map(|(point, weight)| Atom { point, weight }).collect() })
    }

    /// Drops nonpositive weights, merges identical points and rescales to total weight one.
    pub fn normalized(atoms: Vec<(Point, f64)>) -> Result<Self> {
        let mut merged: Vec<(Point, f64)> = Vec::with_capacity(atoms.len());
        for (p, w) in atoms {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidArgument(format!("weight {w} is not a nonnegative number")));
            }
            if w == 0.0 {
                continue;
            }
            match merged.iter_mut().find(|(q, _)| *q == p) {
                Some(entry) => entry.1 += w,
                None => merged.push((p, w)),
            }
        }
        let total: f64 = merged.iter().map(|a| a.1).sum();
        if merged.is_empty() || !(total > 0.0) {
            return Err(Error::EmptyDesign);
        }
        for a in &mut merged {
            a.1 /= total;
        }
        Design::new(merged)
    }

    pub fn uniform(points: Vec<Point>) -> Result<Self> {
        let w = 1.0 / points.len().max(1) as f64;
        Design::normalized(points.into_iter().map(|p| (p, w)).collect())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn points(&self) -> Vec<Point> {
        self.atoms.iter().map(|a| a.point.clone()).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.weight).collect()
    }

    /// Weight at `x`, zero if `x` is not a support point.
    pub fn weight_at(&self, x: &Point) -> f64 {
        self.atoms.iter().find(|a| &a.point == x).map_or(0.0, |a| a.weight)
    }

    /// `alpha * self + (1 - alpha) * other`.
    pub fn mix(&self, other: &Design, alpha: f64) -> Result<Design> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("mixing weight {alpha} outside [0, 1]")));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| (a.point.clone(), alpha * a.weight))
            .chain(other.atoms.iter().map(|a| (a.point.clone(), (1.0 - alpha) * a.weight)))
            .collect();
        Design::normalized(atoms)
    }
}

/// Symmetric nonnegative definite information matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoMatrix(DMatrix<f64>);

impl InfoMatrix {
    /// Validates symmetry (1e-12) and numerical positive semidefiniteness.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !is_symmetric(&m, 1e-12) {
            return Err(Error::InvalidArgument("matrix is not symmetric".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let eig = SymEigen::new(&m);
        let top = eig.max().max(0.0);
        if eig.min() < -1e-9 * top.max(f64::MIN_POSITIVE) && eig.min() < 0.0 {
            return Err(Error::NotPsd { min_eigenvalue: eig.min() });
        }
        Ok(InfoMatrix(crate::linalg::symmetrize(&m)))
    }

    pub(crate) fn from_sym(m: DMatrix<f64>) -> Self {
        InfoMatrix(m)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn rank(&self) -> usize {
        numerical_rank(&self.0, 1e-10)
    }

    pub fn eigen(&self) -> SymEigen {
        SymEigen::new(&self.0)
    }

    /// Largest absolute entry.
    pub fn scale(&self) -> f64 {
        max_abs(&self.0)
    }
}

/// `M = sum_i w_i f(x_i) f(x_i)^T`, accumulated in atom order.
pub fn info_matrix(design: &Design, model: &ModelSpec) -> Result<InfoMatrix> {
    let k = model.k();
    let mut m = DMatrix::zeros(k, k);
    let mut f = vec![0.0; k];
    for a in &design.atoms {
        if !model.space().contains(&a.point) {
            return Err(Error::OutsideSpace { point: a.point.coords().to_vec() });
        }
        model.family().eval_into(a.point.coords(), &mut f);
        add_outer(&mut m, &f, a.weight);
    }
    Ok(InfoMatrix(crate::linalg::symmetrize(&m)))
}

/// Information matrix from precomputed regressor rows and weights.
pub(crate) fn info_from_rows<'a>(rows: impl Iterator<Item = (&'a [f64], f64)>, k: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(k, k);
    for (f, w) in rows {
        if w != 0.0 {
            add_outer(&mut m, f, w);
        }
    }
    crate::linalg::symmetrize(&m)
}

/// Merges atoms connected by chains of Euclidean distance `<= tol` into
/// their weight-weighted centroid.
pub fn merge_close(design: &Design, tol: f64) -> Design {
    let n = design.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in 0..i {
            if design.atoms[i].point.dist(&design.atoms[j].point) <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match roots.iter().position(|&x| x == r) {
            Some(g) => groups[g].push(i),
            None => {
                roots.push(r);
                groups.push(vec![i]);
            }
        }
    }
    if groups.len() == n {
        return design.clone();
    }
    let q = design.atoms[0].point.dim();
    let atoms = groups
        .iter()
        .map(|g| {
            let w: f64 = g.iter().map(|&i| design.atoms[i].weight).sum();
            let mut c = vec![0.0; q];
            for &i in g {
                let a = &design.atoms[i];
                for (cj, xj) in c.iter_mut().zip(a.point.coords()) {
                    *cj += a.weight * xj;
                }
            }
            if g.len() > 1 {
                c.iter_mut().for_each(|cj| *cj /= w);
            } else {
                c = design.atoms[g[0]].point.coords().to_vec();
            }
            Atom { point: Point::new(c), weight: w }
        })
        .collect();
    Design { atoms }
}

/// Drops atoms lighter than `wmin` and renormalizes the rest.
pub fn prune(design: &Design, wmin: f64) -> Result<Design> {
    let kept: Vec<(Point, f64)> = design
        .atoms
        .iter()
        .filter(|a| a.weight >= wmin)
        .map(|a| (a.point.clone(), a.weight))
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyDesign);
    }
    if kept.len() == design.len() {
        return Ok(design.clone());
    }
    let total: f64 = kept.iter().map(|a| a.1).sum();
    Ok(Design { atoms: kept.into_iter().map(|(point, w)| Atom { point, weight: w / total }).collect() })
}

/// Integer replications summing to `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDesign {
    pub atoms: Vec<(Point, usize)>,
    pub n: usize,
}

impl ExactDesign {
    pub fn replications(&self) -> Vec<usize> {
        self.atoms.iter().map(|a| a.1).collect()
    }
}

/// Efficient apportionment of `n` runs over the atoms of `design`.
///
/// Starts from `ceil((n - m/2) w_i)` and repairs one run at a time on the
/// atom with the smallest `n_i / w_i` (too few runs) or the largest
/// `(n_i - 1) / w_i` (too many), lowest index first on ties.
pub fn round_to_n(design: &Design, n: usize) -> Result<ExactDesign> {
    let m = design.len();
    if n < m {
        return Err(Error::Infeasible { n, atoms: m });
    }
    let base = n as f64 - m as f64 / 2.0;
    let w = design.weights();
    let mut reps: Vec<usize> = w.iter().map(|wi| (libm::ceil(base * wi) as usize).max(1)).collect();
    let mut total: usize = reps.iter().sum();
    while total < n {
        let j = argmin_by(&w, |i| reps[i] as f64 / w[i], |_| true);
        reps[j] += 1;
        total += 1;
    }
    while total > n {
        let j = argmin_by(&w, |i| -((reps[i] - 1) as f64 / w[i]), |i| reps[i] > 1);
        reps[j] -= 1;
        total -= 1;
    }
    Ok(ExactDesign { atoms: design.atoms.iter().map(|a| a.point.clone()).zip(reps).collect(), n })
}

fn argmin_by(w: &[f64], key: impl Fn(usize) -> f64, ok: impl Fn(usize) -> bool) -> usize {
    let mut best = usize::MAX;
    let mut best_key = f64::INFINITY;
    for i in 0..w.len() {
        if ok(i) {
            let v = key(i);
            if best == usize::MAX || v < best_key {
                best = i;
                best_key = v;
            }
        }
    }
    best
}
