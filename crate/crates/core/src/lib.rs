//! Quantum state discrimination with post-measurement information.
//!
//! The crate computes optimal success probabilities and measurements for
//! discriminating states `ρ_xb` when the encoding `b` is announced after the
//! measurement, alongside the ordinary problem where it never is.
//!
//! - [`linalg`]: Hermitian operators, eigendecomposition, matrix powers.
//! - [`ensemble`]: the problem data, averaged states and relabelings.
//! - [`sdp`]: interior-point solver for the dual program and optimality certification.
//! - [`bounds`]: partition lower bounds and the α-power upper bound.
//! - [`clifford`]: closed-form solutions for Clifford-algebra encodings.
//! - [`games`]: the CHSH game and its link to classical ensembles.
//! - [`oracles`]: independent brute-force checks.
//! - [`cli`]: the `pmi` command-line front end.

// `!(x > 0.0)` is used on purpose so NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod clifford;
pub mod ensemble;
pub mod error;
pub mod games;
pub mod linalg;
pub mod oracles;
pub mod random;
pub mod sdp;

pub use ensemble::{AnswerVector, DistributionKind, DistributionStructure, Ensemble};
pub use error::{Error, Result};
pub use linalg::{EigenDecomposition, HermitianOperator};
pub use sdp::{certify, delta, solve_pmi, solve_standard, OptimalityReport, Povm, PovmKey, SdpSolution, SolverOptions};
