use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::matrix::SymMatrix;

/// Width of the diagonal blocks in [`model2_cov`].
pub const MODEL2_BLOCK: usize = 20;

/// A true covariance together with the size of its off-diagonal support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub sigma0: SymMatrix,
    /// `#{(j, k) : j ≠ k, σ⁰_jk ≠ 0}`, counting both triangles.
    pub active_set_size: usize,
}

impl GroundTruth {
    /// Fails unless `sigma0` is positive definite.
    pub fn new(sigma0: SymMatrix) -> Result<Self> {
        let min = sigma0.min_eigenvalue()?;
        if !(min > 0.0) {
            return Err(invalid(format!(
                "true covariance is not positive definite (min eigenvalue {min:e})"
            )));
        }
        let active_set_size = sigma0.nnz_offdiag();
        Ok(Self { sigma0, active_set_size })
    }

    pub fn dim(&self) -> usize {
        self.sigma0.dim()
    }
}

/// Banded Toeplitz truth `σ⁰_ij = (1 − |i − j|/10)₊`.
pub fn model1_cov(p: usize) -> Result<GroundTruth> {
    if p == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    // (10 − d)/10 rounds to the nearest double of the decimal 0.9, 0.8, ...
    let sigma = SymMatrix::from_fn(p, |i, j| {
        let d = i.abs_diff(j);
        if d >= 10 {
            0.0
        } else {
            (10 - d) as f64 / 10.0
        }
    });
    GroundTruth::new(sigma)
}

/// Block truth: blocks of 20 with 0.4 within-block covariance and unit
/// variances, consecutive blocks linked through the last index of the
/// earlier block.
pub fn model2_cov(p: usize) -> Result<GroundTruth> {
    if p == 0 || !p.is_multiple_of(MODEL2_BLOCK) {
        return Err(invalid(format!(
            "dimension must be a positive multiple of {MODEL2_BLOCK}, got {p}"
        )));
    }
    let block = |i: usize| i / MODEL2_BLOCK;
    let is_link = |i: usize, j: usize| (i + 1).is_multiple_of(MODEL2_BLOCK) && block(j) == block(i) + 1;
    let sigma = SymMatrix::from_fn(p, |i, j| {
        let mut v = 0.0;
        if i == j {
            v += 0.6;
        }
        if block(i) == block(j) {
            v += 0.4;
        }
        if is_link(i, j) || is_link(j, i) {
            v += 0.4;
        }
        v
    });
    GroundTruth::new(sigma)
}
