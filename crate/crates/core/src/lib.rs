//! Sparse, positive-definite covariance estimation.
//!
//! The estimator minimizes `½‖Σ − S‖_F² + λ|Σ|₁` over `{Σ ⪰ εI}`, where
//! `|·|₁` sums the absolute off-diagonal entries and `S` is the sample
//! covariance. It is solved by an alternating direction method that splits
//! the cone constraint (an eigenvalue clamp) from the penalty (entrywise
//! soft-thresholding).
//!
//! Modules:
//! - [`matrix`]: symmetric matrices, eigensolver, cone projection, norms.
//! - [`prox`]: soft-thresholding and objective evaluation.
//! - [`admm`]: the solver, its diagnostics, and a slow reference solver.
//! - [`selection`]: warm-started regularization paths and cross-validation.
//! - [`sim`]: ground-truth models, sampling, metrics, replicate experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admm;
pub mod error;
pub mod matrix;
pub mod prox;
pub mod selection;
pub mod sim;

pub use admm::{solve, EstimationResult, SolverConfig};
pub use error::{CovError, Result};
pub use matrix::SymMatrix;
