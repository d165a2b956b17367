//! Minimum-error discrimination (MED) of quantum-state ensembles.
//!
//! Given states `rho_1..rho_N` with prior probabilities `p_1..p_N`, a
//! measurement (POVM) `Pi_1..Pi_N` identifies the transmitted state with
//! success probability `sum_i p_i Tr(rho_i Pi_i)`. This crate builds the
//! measurement that maximizes it, three ways, and cross-checks them:
//!
//! - [`closed_form`]: analytic constructions for similarity-transformed
//!   equiprobable ensembles (irreducible generating sets, spin-j rotation
//!   orbits, group-covariant states).
//! - [`oracle`]: an independent fixed-point iteration, the square-root
//!   measurement, and the two-state Helstrom value.
//! - [`certify`]: the necessary-and-sufficient optimality conditions, as a
//!   numeric certificate with per-condition margins, plus extraction and
//!   verification of the Helstrom family of conjugate ensembles.
//!
//! Supporting layers: [`hermitian`] (complex Hermitian spectral kernel),
//! [`ensemble`] (state/ensemble builders), [`io`] (the on-disk JSON formats).
//!
//! All numerics are generic over the real scalar via [`scalar::Scalar`];
//! the aliases at the crate root fix `f64`, the precision the default
//! tolerances are calibrated for.

pub mod certify;
pub mod closed_form;
pub mod ensemble;
pub mod error;
pub mod hermitian;
pub mod io;
pub mod matrix;
pub mod nnls;
pub mod oracle;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{real, tol, Scalar};

/// Complex scalar over `f64`.
pub type Complex64 = num_complex::Complex<f64>;
/// Dense complex matrix over `f64`.
pub type Matrix = matrix::ComplexMatrix<f64>;
/// Hermitian matrix over `f64`.
pub type Hermitian = hermitian::HermitianMatrix<f64>;
/// Spectral decomposition over `f64`.
pub type Spectral = hermitian::SpectralDecomposition<f64>;
/// Density matrix over `f64`.
pub type State = ensemble::DensityMatrix<f64>;
/// Generating unitary set over `f64`.
pub type Unitaries = ensemble::UnitarySet<f64>;
/// State ensemble over `f64`.
pub type StateEnsemble = ensemble::Ensemble<f64>;
/// POVM over `f64`.
pub type Measurement = certify::Povm<f64>;
/// Optimality certificate over `f64`.
pub type OptCertificate = certify::Certificate<f64>;
/// Closed-form solution over `f64`.
pub type Solution = closed_form::ClosedFormSolution<f64>;
/// Oracle result over `f64`.
pub type OracleOutcome = oracle::OracleResult<f64>;
