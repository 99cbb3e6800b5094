//! Approximate optimal experimental design: phi_p-optimal designs on
//! discretized design spaces, equivalence-theorem certificates, support
//! geometry and Loewner-order admissibility audits.
//!
//! `no_std` with `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod barrier;
pub mod certificate;
pub mod conditional;
pub mod criteria;
pub mod design;
pub mod error;
pub mod linalg;
mod math;
pub mod model;
pub mod solver;

pub use certificate::{
    build_certificate, certify, exp_saturation_check, garza_report, polytope_report, rescale_invariance_check,
    Certificate, CertifyReport, GarzaReport, Hyperplane, PolytopeReport, RescaleCheck, SaturationCheck,
};
pub use conditional::{
    conditional_audit, decompose, dominates, find_dominator, product_audit, recompose_check, AdmissibilityVerdict,
    ConditionalModel, SliceDecomposition, SliceMap,
};
pub use criteria::{phi, polar, sensitivity, Criterion, PolarValue};
pub use design::{info_matrix, merge_close, prune, round_to_n, Atom, Design, ExactDesign, InfoMatrix};
pub use error::{Error, Result};
pub use model::{discretize, truncate, CandidateSet, DesignSpace, Efficiency, Family, Interval, ModelSpec, Point, Term};
pub use solver::{refine_weights, solve, InitDesign, SolveReport, SolverOptions};
