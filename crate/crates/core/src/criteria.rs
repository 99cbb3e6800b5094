//! Matrix-mean criteria `phi_p`, their polars and sensitivity functions.

use alloc::format;
use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use nalgebra::DMatrix;

use crate::design::InfoMatrix;
use crate::error::{Error, Result};
use crate::linalg::{SymEigen, EIGEN_CLAMP};
use crate::math::{exp, ln, powf};
use crate::model::{quad_slice, ModelSpec, Point};

/// Relative spectral gap below which the smallest eigenvalue counts as repeated.
pub const MULTIPLICITY_GAP: f64 = 1e-8;

/// The matrix mean `phi_p` with `p` in `[-inf, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criterion {
    p: f64,
}

impl Criterion {
    pub const D: Criterion = Criterion { p: 0.0 };
    pub const A: Criterion = Criterion { p: -1.0 };
    pub const E: Criterion = Criterion { p: f64::NEG_INFINITY };
    pub const T: Criterion = Criterion { p: 1.0 };

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p > 1.0 {
            return Err(Error::InvalidArgument(format!("criterion exponent {p} must lie in [-inf, 1]")));
        }
        Ok(Criterion { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_d(&self) -> bool {
        self.p == 0.0
    }

    pub fn is_e(&self) -> bool {
        self.p == f64::NEG_INFINITY
    }

    /// Conjugate exponent `q = p / (p - 1)` of the polar function.
    pub fn conjugate(&self) -> Criterion {
        let q = if self.p == 0.0 {
            0.0
        } else if self.p == f64::NEG_INFINITY {
            1.0
        } else if self.p == 1.0 {
            f64::NEG_INFINITY
        } else {
            self.p / (self.p - 1.0)
        };
        Criterion { p: q }
    }

    pub fn name(&self) -> String {
        match self.p {
            p if p == 0.0 => "D".into(),
            p if p == -1.0 => "A".into(),
            p if p == f64::NEG_INFINITY => "E".into(),
            p => format!("p:{p}"),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    /// Accepts `D`, `A`, `E`, `T` or `p:<real>` (with `p:-inf` for E).
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "D" | "d" => Ok(Criterion::D),
            "A" | "a" => Ok(Criterion::A),
            "E" | "e" => Ok(Criterion::E),
            "T" | "t" => Ok(Criterion::T),
            other => {
                let v = other
                    .strip_prefix("p:")
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown criterion '{other}'")))?;
                let p = match v.trim() {
                    "-inf" | "-infinity" => f64::NEG_INFINITY,
                    num => num
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidArgument(format!("bad criterion exponent '{num}'")))?,
                };
                Criterion::new(p)
            }
        }
    }
}

/// Value of the polar function; nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PolarValue(f64);

impl PolarValue {
    pub fn value(&self) -> f64 {
        self.0
    }
}

fn checked_eigen(m: &InfoMatrix) -> Result<SymEigen> {
    let eig = m.eigen();
    let top = eig.max().max(0.0);
    if eig.min() < 0.0 && eig.min() < -1e-9 * top {
        return Err(Error::NotPsd { min_eigenvalue: eig.min() });
    }
    Ok(eig)
}

/// `phi_p` evaluated on the spectrum of a PSD matrix.
pub fn phi_spectrum(p: f64, values: &[f64]) -> f64 {
    let s = values.len() as f64;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for &v in values {
        lo = lo.min(v.max(0.0));
        hi = hi.max(v);
    }
    if hi <= 0.0 {
        return 0.0;
    }
    let singular = lo <= EIGEN_CLAMP * hi;
    if p == f64::NEG_INFINITY {
        return if singular { 0.0 } else { lo };
    }
    if p <= 0.0 && singular {
        return 0.0;
    }
    if p == 0.0 {
        return exp(values.iter().map(|&v| ln(v)).sum::<f64>() / s);
    }
    // Rescale by the dominant eigenvalue of the power to keep it in range.
    let reference = if p < 0.0 { lo } else { hi };
    let mean = values.iter().map(|&v| powf(v.max(0.0) / reference, p)).sum::<f64>() / s;
    reference * powf(mean, 1.0 / p)
}

pub fn phi(criterion: &Criterion, m: &InfoMatrix) -> Result<f64> {
    let eig = checked_eigen(m)?;
    Ok(phi_spectrum(criterion.p, eig.values.as_slice()))
}

/// `phi^inf(N) = s * phi_q(N)` with the conjugate exponent `q`.
pub fn polar(criterion: &Criterion, n: &InfoMatrix) -> Result<PolarValue> {
    let eig = checked_eigen(n)?;
    let s = n.dim() as f64;
    Ok(PolarValue(s * phi_spectrum(criterion.conjugate().p, eig.values.as_slice())))
}

/// Dual matrix of the equivalence theorem for a positive definite `M`.
///
/// `M^(p-1) / trace(M^p)` for finite `p`, `z z^T / lambda_min` for E with a
/// simple smallest eigenvalue. A repeated smallest eigenvalue is refused with
/// [`Error::EigenMultiplicity`]; the certificate builder handles that case.
pub fn dual_matrix(criterion: &Criterion, m: &InfoMatrix) -> Result<DMatrix<f64>> {
    let eig = checked_eigen(m)?;
    let top = eig.max();
    let p = criterion.p;
    if p == 1.0 {
        let tr = m.matrix().trace();
        if !(tr > 0.0) {
            return Err(Error::Singular);
        }
        return Ok(DMatrix::identity(m.dim(), m.dim()) / tr);
    }
    let lo = eig.min();
    if !(top > 0.0) || lo <= EIGEN_CLAMP * top {
        return Err(Error::Singular);
    }
    if p == f64::NEG_INFINITY {
        let cluster = eig.min_cluster(MULTIPLICITY_GAP);
        if cluster.len() > 1 {
            return Err(Error::EigenMultiplicity { multiplicity: cluster.len() });
        }
        let z = eig.vectors.column(cluster[0]).into_owned();
        return Ok(&z * z.transpose() / lo);
    }
    // N = sum_i (mu_i/lo)^(p-1) v_i v_i^T / (lo * sum_i (mu_i/lo)^p)
    let denom: f64 = eig.values.iter().map(|&v| powf(v / lo, p)).sum::<f64>() * lo;
    Ok(eig.apply(|v| powf(v / lo, p - 1.0)) / denom)
}

/// `f(x)^T N f(x)` with `N` the dual matrix of `M`.
pub fn sensitivity(criterion: &Criterion, m: &InfoMatrix, model: &ModelSpec, x: &Point) -> Result<f64> {
    let n = dual_matrix(criterion, m)?;
    let f = model.eval_f(x)?;
    Ok(quad_slice(&n, f.as_slice()))
}
