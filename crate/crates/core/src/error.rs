use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point {point:?} lies outside the design space")]
    OutsideSpace { point: Vec<f64> },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("axis {axis} is unbounded; truncate it before discretizing")]
    MustTruncate { axis: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("information matrix is singular; start from a regularized design")]
    Singular,

    #[error("smallest eigenvalue has multiplicity {multiplicity}; build a certificate instead")]
    EigenMultiplicity { multiplicity: usize },

    #[error("every atom fell below the weight floor")]
    EmptyDesign,

    #[error("cannot round {atoms} atoms to {n} runs")]
    Infeasible { n: usize, atoms: usize },

    #[error("candidate set spans rank {rank} < {k}; the model is degenerate on it")]
    DegenerateModel { rank: usize, k: usize },

    #[error("certificate construction did not converge (residual {residual:e})")]
    CertificateFailure { residual: f64 },

    #[error("certificate and design disagree: {0}")]
    Inconsistent(String),

    #[error("{0}")]
    NoConditionalModel(String),
}
