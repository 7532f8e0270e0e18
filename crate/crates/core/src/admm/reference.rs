//! Slow, independent solver used to cross-check the alternating direction
//! iteration on small problems.
//!
//! The constrained estimate is the proximal point of `λ|·|₁ + ι{Σ ⪰ εI}` at
//! `S`. It is computed with the Dykstra-type proximal splitting of
//! Bauschke and Combettes, which alternates the two individual proximal
//! maps (soft-threshold and cone projection) with correction terms and
//! converges to the proximal point of the sum. No multiplier or
//! augmented-Lagrangian machinery is shared with the main solver.

use super::SolverConfig;
use crate::error::{invalid, CovError, Result};
use crate::matrix::{project_to_cone, SymMatrix};
use crate::prox::{objective, soft_threshold};

/// Largest dimension accepted by [`reference_solve`].
pub const REFERENCE_MAX_DIM: usize = 25;

const MAX_ITER: usize = 1_000_000;
const STEP_TOL: f64 = 1e-13;
const OBJECTIVE_TOL: f64 = 1e-12;

pub fn reference_solve(sample_cov: &SymMatrix, cfg: &SolverConfig) -> Result<SymMatrix> {
    cfg.validate()?;
    let p = sample_cov.dim();
    if p > REFERENCE_MAX_DIM {
        return Err(invalid(format!(
            "reference solver is limited to p <= {REFERENCE_MAX_DIM}, got {p}"
        )));
    }
    let scale = sample_cov.frobenius_norm().max(1.0);

    let mut x = sample_cov.clone();
    let mut corr_prox = SymMatrix::zeros(p);
    let mut corr_proj = SymMatrix::zeros(p);
    let mut prev_y: Option<SymMatrix> = None;
    let mut prev_obj = f64::INFINITY;

    for _ in 0..MAX_ITER {
        let shifted = &x + &corr_prox;
        let y = soft_threshold(&shifted, cfg.lambda)?;
        corr_prox = &shifted - &y;

        let shifted = &y + &corr_proj;
        let x_next = project_to_cone(&shifted, cfg.eps)?;
        corr_proj = &shifted - &x_next;

        let step_x = x_next.frobenius_distance(&x);
        let step_y = prev_y.as_ref().map_or(f64::INFINITY, |prev| prev.frobenius_distance(&y));
        let obj = objective(&x_next, sample_cov, cfg.lambda)?.total;
        let obj_change = (obj - prev_obj).abs();

        x = x_next;
        prev_y = Some(y);
        prev_obj = obj;

        if step_x <= STEP_TOL * scale
            && step_y <= STEP_TOL * scale
            && obj_change <= OBJECTIVE_TOL * obj.abs().max(1.0)
        {
            return Ok(x);
        }
    }
    Err(CovError::OracleFailure { iterations: MAX_ITER })
}
