//! Soft-thresholding and the penalized least-squares objective.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};
use crate::matrix::SymMatrix;

/// Value of `½‖Σ − S‖_F² + λ|Σ|₁` split into its two parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub data_fit: f64,
    pub penalty: f64,
    pub total: f64,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau >= 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("threshold must be finite and >= 0, got {tau}")))
    }
}

#[inline]
pub(crate) fn shrink(z: f64, tau: f64) -> f64 {
    let mag = z.abs() - tau;
    if mag > 0.0 {
        mag.copysign(z)
    } else {
        0.0
    }
}

/// Shrinks every off-diagonal entry toward zero by `tau`; entries with
/// `|z| <= tau` become exactly `0.0`. The diagonal is copied unchanged.
pub fn soft_threshold(z: &SymMatrix, tau: f64) -> Result<SymMatrix> {
    check_tau(tau)?;
    Ok(z.map_indexed(|j, k, v| if j == k { v } else { shrink(v, tau) }))
}

/// The soft-thresholding covariance estimator: the unconstrained minimizer
/// of `½‖Σ − S‖_F² + λ|Σ|₁`.
pub fn soft_threshold_estimator(sample_cov: &SymMatrix, lambda: f64) -> Result<SymMatrix> {
    soft_threshold(sample_cov, lambda)
}

pub fn objective(sigma: &SymMatrix, sample_cov: &SymMatrix, lambda: f64) -> Result<Objective> {
    check_dim(sigma.dim(), sample_cov.dim())?;
    check_tau(lambda)?;
    let data_fit = 0.5 * sigma.frobenius_distance_sq(sample_cov);
    let penalty = lambda * sigma.offdiag_l1();
    Ok(Objective {
        data_fit,
        penalty,
        total: data_fit + penalty,
    })
}

/// `½‖Σ − S‖_F² + λ|Σ|₁ − ⟨Λ, Θ − Σ⟩ + ‖Θ − Σ‖_F² / (2μ)`.
pub fn augmented_lagrangian(
    theta: &SymMatrix,
    sigma: &SymMatrix,
    dual: &SymMatrix,
    sample_cov: &SymMatrix,
    lambda: f64,
    mu: f64,
) -> Result<f64> {
    let p = sample_cov.dim();
    check_dim(p, theta.dim())?;
    check_dim(p, sigma.dim())?;
    check_dim(p, dual.dim())?;
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(invalid(format!("mu must be finite and > 0, got {mu}")));
    }
    let base = objective(sigma, sample_cov, lambda)?.total;
    let gap = theta - sigma;
    Ok(base - dual.inner(&gap) + gap.frobenius_norm_sq() / (2.0 * mu))
}
