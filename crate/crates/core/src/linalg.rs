//! Small dense symmetric-matrix helpers on top of nalgebra.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

/// Relative floor applied to eigenvalues before taking non-integer powers.
pub const EIGEN_CLAMP: f64 = 1e-14;

/// Eigendecomposition with eigenvalues in descending order.
///
/// Each eigenvector is sign-normalized so that its first entry with
/// magnitude above `1e-12` is positive.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymEigen {
    pub fn new(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let sym = symmetrize(m);
        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            let mut col = eig.eigenvectors.column(src).into_owned();
            if let Some(first) = col.iter().copied().find(|v| v.abs() > 1e-12) {
                if first < 0.0 {
                    col.neg_mut();
                }
            }
            vectors.set_column(dst, &col);
        }
        SymEigen { values, vectors }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalues floored at `EIGEN_CLAMP * max(lambda_max, 0)`.
    pub fn clamped(&self) -> DVector<f64> {
        let floor = EIGEN_CLAMP * self.max().max(0.0);
        self.values.map(|v| v.max(floor))
    }

    /// `V diag(g(lambda)) V^T` for a scalar map `g`.
    pub fn apply(&self, g: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let d = self.clamped().map(g);
        let scaled = &self.vectors * DMatrix::from_diagonal(&d);
        symmetrize(&(scaled * self.vectors.transpose()))
    }

    /// Index set of eigenvalues within `rel_gap * lambda_max` of the smallest one.
    pub fn min_cluster(&self, rel_gap: f64) -> Vec<usize> {
        let lo = self.min();
        let scale = self.max().abs().max(f64::MIN_POSITIVE);
        (0..self.values.len())
            .filter(|&i| self.values[i] - lo <= rel_gap * scale)
            .collect()
    }
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = max_abs(m).max(1.0);
    let n = m.nrows();
    (0..n).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol * scale))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn lambda_min(m: &DMatrix<f64>) -> f64 {
    symmetrize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Numerical rank from the singular values, relative to the largest one.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let top = sv.iter().copied().fold(0.0_f64, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Quadratic form `v^T A v`.
pub fn quad(a: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += a[(i, j)] * v[j];
        }
        acc += v[i] * row;
    }
    acc
}

/// Trace of the product `A B` without forming it.
pub fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.transpose().iter()).map(|(x, y)| x * y).sum()
}
