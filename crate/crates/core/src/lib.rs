//! Distances to finite-dimensional subspaces of block matrix algebras under
//! the operator and trace norms, with checkable dual certificates.

// Dense kernels read clearer with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod certificates;
mod error;
pub mod infinite;
pub mod matrix;
pub mod solver;
pub mod testing;

pub use algebra::{
    annihilator_basis, pairing, project_to_annihilator, AlgebraElement, AlgebraSignature, AnnihilatorBasis,
    SubspaceBasis,
};
pub use error::{Error, Result};
pub use matrix::{Matrix, NormKind, C64};
pub use solver::{
    brute_force_distance, extract_certificate, solve_distance, verify_certificate, CertificateCheck, DistanceReport,
    DualCertificate, GridSpec, SolveOptions,
};
