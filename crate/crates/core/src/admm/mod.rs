//! Alternating direction solver for
//!
//! ```text
//! minimize ½‖Σ − S‖_F² + λ|Σ|₁   subject to   Σ ⪰ εI
//! ```
//!
//! The problem is split as `Σ = Θ`, `Θ ⪰ εI`, and the augmented Lagrangian
//! `½‖Σ − S‖² + λ|Σ|₁ − ⟨Λ, Θ − Σ⟩ + ‖Θ − Σ‖²/(2μ)` is minimized
//! alternately over `Θ` (a cone projection) and `Σ` (an entrywise
//! soft-threshold), followed by a multiplier update.

mod kkt;
mod reference;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};
use crate::matrix::{project_to_cone, SymMatrix};
use crate::prox::{objective, shrink, soft_threshold_estimator};

pub use kkt::{g_norm_sq, kkt_report, kkt_residuals, KktReport};
pub use reference::{reference_solve, REFERENCE_MAX_DIM};

/// Parameters of a single solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Off-diagonal penalty weight.
    pub lambda: f64,
    /// Eigenvalue floor of the feasible cone.
    pub eps: f64,
    /// Augmented-Lagrangian parameter.
    pub mu: f64,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub max_iter: usize,
    /// Keep every `(Λⁱ, Σⁱ)` pair so the Fejér-monotonicity distances can
    /// be computed after the run. Memory grows as `2p²` per iteration.
    #[serde(default)]
    pub track_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            eps: 1e-4,
            mu: 2.0,
            tol_primal: 1e-7,
            tol_dual: 1e-7,
            max_iter: 20_000,
            track_iterates: false,
        }
    }
}

impl SolverConfig {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        positive("eps", self.eps)?;
        positive("mu", self.mu)?;
        positive("tol_primal", self.tol_primal)?;
        positive("tol_dual", self.tol_dual)?;
        if self.max_iter == 0 {
            return Err(invalid("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// Iterate triple `(Θ, Σ, Λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmmState {
    pub theta: SymMatrix,
    pub sigma: SymMatrix,
    /// Lagrange multiplier of the constraint `Θ = Σ`.
    pub dual: SymMatrix,
    pub iter: usize,
}

impl AdmmState {
    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }
}

/// Per-iteration traces of a solve.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `‖Θⁱ − Σⁱ‖_F`
    pub primal_residuals: Vec<f64>,
    /// `‖Σⁱ − Σⁱ⁻¹‖_F / μ`
    pub dual_residuals: Vec<f64>,
    /// Penalized objective at `Σⁱ`.
    pub objective_trace: Vec<f64>,
    /// `‖Uⁱ − U_final‖_G` for `i = 0..=iterations`, `Uⁱ = (Λⁱ, Σⁱ)`.
    /// Only present when iterates were tracked.
    pub g_distances: Option<Vec<f64>>,
    /// `‖Uⁱ − Uⁱ⁺¹‖_G`, tracked runs only.
    pub g_steps: Option<Vec<f64>>,
    #[serde(skip)]
    pub iterates: Vec<(SymMatrix, SymMatrix)>,
}

impl Diagnostics {
    /// Fills `g_distances` and `g_steps` from the tracked iterates, taking
    /// the last tracked pair as the reference point.
    pub fn fill_g_distances(&mut self, mu: f64) -> Result<()> {
        let Some((last_dual, last_sigma)) = self.iterates.last() else {
            return Ok(());
        };
        let mut distances = Vec::with_capacity(self.iterates.len());
        for (dual, sigma) in &self.iterates {
            distances.push(g_norm_sq(&(dual - last_dual), &(sigma - last_sigma), mu)?.sqrt());
        }
        let mut steps = Vec::with_capacity(self.iterates.len().saturating_sub(1));
        for pair in self.iterates.windows(2) {
            let (d0, s0) = &pair[0];
            let (d1, s1) = &pair[1];
            steps.push(g_norm_sq(&(d0 - d1), &(s0 - s1), mu)?.sqrt());
        }
        self.g_distances = Some(distances);
        self.g_steps = Some(steps);
        Ok(())
    }
}

/// Outcome of [`solve`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimationResult {
    /// Sparse, positive-definite covariance estimate.
    pub estimate: SymMatrix,
    pub converged: bool,
    pub iterations: usize,
    /// The soft-thresholding estimator was already in the cone.
    pub shortcut_used: bool,
    /// Largest KKT violation of the terminal iterates (unscaled).
    pub kkt_residual: f64,
    pub diagnostics: Diagnostics,
    /// Smallest eigenvalue of `estimate`.
    pub min_eig: f64,
    /// Terminal iterates, usable as a warm start.
    pub state: AdmmState,
    pub seconds: f64,
}

/// `Θ⁰ = Σ⁰ = soft-threshold(S, λ)`, `Λ⁰ = 0`.
pub fn init_state(sample_cov: &SymMatrix, cfg: &SolverConfig) -> Result<AdmmState> {
    cfg.validate()?;
    let start = soft_threshold_estimator(sample_cov, cfg.lambda)?;
    Ok(AdmmState {
        theta: start.clone(),
        sigma: start,
        dual: SymMatrix::zeros(sample_cov.dim()),
        iter: 0,
    })
}

/// `Θ = (Σ + μΛ)₊`, the projection onto `{Θ ⪰ εI}`.
pub fn theta_step(state: &AdmmState, cfg: &SolverConfig) -> Result<SymMatrix> {
    project_to_cone(&state.sigma.add_scaled(cfg.mu, &state.dual), cfg.eps)
}

/// `Σ = S(μ(S_n − Λ) + Θ, λμ) / (1 + μ)`, diagonal left unthresholded.
pub fn sigma_step(
    state: &AdmmState,
    theta_next: &SymMatrix,
    sample_cov: &SymMatrix,
    cfg: &SolverConfig,
) -> Result<SymMatrix> {
    let p = sample_cov.dim();
    check_dim(p, theta_next.dim())?;
    check_dim(p, state.dim())?;
    let mu = cfg.mu;
    let tau = cfg.lambda * mu;
    let denom = 1.0 + mu;
    Ok(SymMatrix::from_fn(p, |j, k| {
        let z = mu * (sample_cov.get(j, k) - state.dual.get(j, k)) + theta_next.get(j, k);
        if j == k {
            z / denom
        } else {
            shrink(z, tau) / denom
        }
    }))
}

/// `Λ − (Θ − Σ)/μ`.
pub fn lambda_step(
    state: &AdmmState,
    theta_next: &SymMatrix,
    sigma_next: &SymMatrix,
    cfg: &SolverConfig,
) -> SymMatrix {
    let inv_mu = 1.0 / cfg.mu;
    SymMatrix::from_fn(state.dim(), |j, k| {
        state.dual.get(j, k) - (theta_next.get(j, k) - sigma_next.get(j, k)) * inv_mu
    })
}

/// Solves the constrained problem from the default starting point.
pub fn solve(sample_cov: &SymMatrix, cfg: &SolverConfig) -> Result<EstimationResult> {
    solve_from(sample_cov, cfg, None)
}

/// Solves the constrained problem, optionally starting the iteration from
/// `warm` (e.g. the terminal state at a neighbouring `λ`).
///
/// If the soft-thresholding estimator already satisfies `λ_min ≥ ε` it is
/// returned unchanged without iterating.
pub fn solve_from(
    sample_cov: &SymMatrix,
    cfg: &SolverConfig,
    warm: Option<&AdmmState>,
) -> Result<EstimationResult> {
    cfg.validate()?;
    let started = Instant::now();
    let p = sample_cov.dim();
    if let Some(w) = warm {
        check_dim(p, w.dim())?;
    }

    let thresholded = soft_threshold_estimator(sample_cov, cfg.lambda)?;
    let thresholded_min = thresholded.min_eigenvalue()?;
    if thresholded_min >= cfg.eps {
        let state = AdmmState {
            theta: thresholded.clone(),
            sigma: thresholded.clone(),
            dual: SymMatrix::zeros(p),
            iter: 0,
        };
        let kkt = kkt::report_with_min_eig(&state.theta, &state.sigma, &state.dual, sample_cov, cfg, thresholded_min)?;
        let mut diagnostics = Diagnostics::default();
        if cfg.track_iterates {
            diagnostics.iterates.push((state.dual.clone(), state.sigma.clone()));
            diagnostics.fill_g_distances(cfg.mu)?;
        }
        return Ok(EstimationResult {
            estimate: thresholded,
            converged: true,
            iterations: 0,
            shortcut_used: true,
            kkt_residual: kkt.max(),
            diagnostics,
            min_eig: thresholded_min,
            state,
            seconds: started.elapsed().as_secs_f64(),
        });
    }

    let scale = sample_cov.frobenius_norm().max(1.0);
    let mut state = match warm {
        Some(w) => AdmmState { iter: 0, ..w.clone() },
        None => AdmmState {
            theta: thresholded.clone(),
            sigma: thresholded,
            dual: SymMatrix::zeros(p),
            iter: 0,
        },
    };

    let mut diagnostics = Diagnostics::default();
    if cfg.track_iterates {
        diagnostics.iterates.push((state.dual.clone(), state.sigma.clone()));
    }
    let mut converged = false;
    while state.iter < cfg.max_iter {
        let theta = theta_step(&state, cfg)?;
        let sigma = sigma_step(&state, &theta, sample_cov, cfg)?;
        let dual = lambda_step(&state, &theta, &sigma, cfg);

        let primal_res = theta.frobenius_distance(&sigma);
        let dual_res = sigma.frobenius_distance(&state.sigma) / cfg.mu;
        diagnostics.primal_residuals.push(primal_res);
        diagnostics.dual_residuals.push(dual_res);
        diagnostics
            .objective_trace
            .push(objective(&sigma, sample_cov, cfg.lambda)?.total);
        if cfg.track_iterates {
            diagnostics.iterates.push((dual.clone(), sigma.clone()));
        }

        state = AdmmState {
            theta,
            sigma,
            dual,
            iter: state.iter + 1,
        };
        if primal_res <= cfg.tol_primal * scale && dual_res <= cfg.tol_dual * scale {
            converged = true;
            break;
        }
    }
    if cfg.track_iterates {
        diagnostics.fill_g_distances(cfg.mu)?;
    }

    let kkt = kkt_report(&state.theta, &state.sigma, &state.dual, sample_cov, cfg)?;
    let estimate = finalize_estimate(&state.sigma, cfg.eps)?;
    let min_eig = estimate.min_eigenvalue()?;
    Ok(EstimationResult {
        estimate,
        converged,
        iterations: state.iter,
        shortcut_used: false,
        kkt_residual: kkt.max(),
        diagnostics,
        min_eig,
        state,
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// The sparse iterate `Σ` shifted by `δI`, `δ = max(0, ε − λ_min(Σ))`.
///
/// `Σ` carries the exact zero pattern and differs from the feasible `Θ` by
/// at most the primal residual, so `δ` is of that order.
fn finalize_estimate(sigma: &SymMatrix, eps: f64) -> Result<SymMatrix> {
    let shift = (eps - sigma.min_eigenvalue()?).max(0.0);
    if shift == 0.0 {
        return Ok(sigma.clone());
    }
    Ok(sigma.map_indexed(|j, k, v| if j == k { v + shift } else { v }))
}

#[cfg(test)]
mod tests;
