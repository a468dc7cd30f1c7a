//! Weighted ℓ1 sparse recovery.
//!
//! * [`linalg`]: dense products, Cholesky solves, projections.
//! * [`ensemble`]: seeded Gaussian measurement problems.
//! * [`solver`]: weighted LASSO by accelerated proximal gradient, KKT checks.
//! * [`theory`]: support-recovery certificate and sample-size scaling law.
//! * [`oracle`]: exhaustive minimizer for small problems.
//! * [`harness`]: Monte Carlo phase-transition sweeps, CSV and SVG output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod oracle;
pub mod solver;
pub mod theory;

pub use ensemble::{sample_instance, EnsembleConfig, MagnitudeRule, ProblemInstance, SparseSignal};
pub use error::{Error, Result};
pub use linalg::{DenseMatrix, DenseVector};
pub use oracle::{brute_force_minimum, enumerate_certificates, OracleResult};
pub use solver::{solve_weighted_l1, SolveResult, SolverConfig, StepRule, WeightVector};
pub use theory::{check_recovery_events, RecoveryCertificate};
