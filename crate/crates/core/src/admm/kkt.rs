//! Optimality checks for the split problem.

use serde::{Deserialize, Serialize};

use super::SolverConfig;
use crate::error::{check_dim, invalid, Result};
use crate::matrix::{project_to_cone, SymMatrix};

/// Individual KKT violations of a candidate `(Θ, Σ, Λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// `‖Θ − Σ‖_F`
    pub primal_gap: f64,
    /// `max_j |(Σ − S)_jj + Λ_jj|`
    pub diag_stationarity: f64,
    /// Largest distance of `(S − Λ − Σ)_jk / λ` to `∂|Σ_jk|` over `j ≠ k`;
    /// `None` when `λ = 0`.
    pub subgradient: Option<f64>,
    /// `max(0, ε − λ_min(Θ))`
    pub cone_floor: f64,
    /// `|⟨Λ, Θ − (Θ + Λ)₊⟩|`, zero exactly when `Λ` lies in the normal cone
    /// of `{Θ ⪰ εI}` at `Θ`.
    pub cone_vi: f64,
}

impl KktReport {
    pub fn max(&self) -> f64 {
        [
            self.primal_gap,
            self.diag_stationarity,
            self.subgradient.unwrap_or(0.0),
            self.cone_floor,
            self.cone_vi,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn kkt_report(
    theta: &SymMatrix,
    sigma: &SymMatrix,
    dual: &SymMatrix,
    sample_cov: &SymMatrix,
    cfg: &SolverConfig,
) -> Result<KktReport> {
    report_with_min_eig(theta, sigma, dual, sample_cov, cfg, theta.min_eigenvalue()?)
}

/// Largest entry of [`kkt_report`].
pub fn kkt_residuals(
    theta: &SymMatrix,
    sigma: &SymMatrix,
    dual: &SymMatrix,
    sample_cov: &SymMatrix,
    cfg: &SolverConfig,
) -> Result<f64> {
    Ok(kkt_report(theta, sigma, dual, sample_cov, cfg)?.max())
}

pub(super) fn report_with_min_eig(
    theta: &SymMatrix,
    sigma: &SymMatrix,
    dual: &SymMatrix,
    sample_cov: &SymMatrix,
    cfg: &SolverConfig,
    theta_min_eig: f64,
) -> Result<KktReport> {
    let p = sample_cov.dim();
    check_dim(p, theta.dim())?;
    check_dim(p, sigma.dim())?;
    check_dim(p, dual.dim())?;
    cfg.validate()?;

    let primal_gap = theta.frobenius_distance(sigma);
    let diag_stationarity = (0..p)
        .map(|j| (sigma.get(j, j) - sample_cov.get(j, j) + dual.get(j, j)).abs())
        .fold(0.0, f64::max);

    let subgradient = (cfg.lambda > 0.0).then(|| {
        let mut worst: f64 = 0.0;
        for j in 0..p {
            for k in (j + 1)..p {
                let g = (sample_cov.get(j, k) - dual.get(j, k) - sigma.get(j, k)) / cfg.lambda;
                let s = sigma.get(j, k);
                let dist = if s != 0.0 {
                    (g - s.signum()).abs()
                } else {
                    (g.abs() - 1.0).max(0.0)
                };
                worst = worst.max(dist);
            }
        }
        worst
    });

    let cone_floor = (cfg.eps - theta_min_eig).max(0.0);
    let cone_vi = if dual.as_slice().iter().all(|&v| v == 0.0) {
        0.0
    } else {
        let projected = project_to_cone(&(theta + dual), cfg.eps)?;
        dual.inner(&(theta - &projected)).abs()
    };

    Ok(KktReport {
        primal_gap,
        diag_stationarity,
        subgradient,
        cone_floor,
        cone_vi,
    })
}

/// `μ‖Λ‖_F² + ‖Σ‖_F²/μ`, the squared norm induced by `diag(μI, I/μ)` on
/// the pair `(Λ, Σ)`.
pub fn g_norm_sq(dual_part: &SymMatrix, sigma_part: &SymMatrix, mu: f64) -> Result<f64> {
    check_dim(dual_part.dim(), sigma_part.dim())?;
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(invalid(format!("mu must be finite and > 0, got {mu}")));
    }
    Ok(mu * dual_part.frobenius_norm_sq() + sigma_part.frobenius_norm_sq() / mu)
}
