//! Regularization paths and cross-validated choice of `λ`.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admm::{solve_from, AdmmState, EstimationResult, SolverConfig};
use crate::error::{invalid, Result};
use crate::matrix::SymMatrix;
use crate::prox::{objective, soft_threshold_estimator, Objective};
use crate::sim::{sample_correlation, sample_covariance, DataMatrix};

/// Strictly increasing, positive regularization levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    values: Vec<f64>,
}

impl LambdaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("lambda grid is empty"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(invalid(format!("lambda grid values must be finite and > 0, got {v}")));
        }
        if let Some(w) = values.windows(2).find(|w| w[1] <= w[0]) {
            return Err(invalid(format!(
                "lambda grid must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { values })
    }

    /// `start, start + step, …` up to `end` inclusive. Points are computed as
    /// `start + i·step` and rounded to 12 decimals so that e.g. `0.01:0.01:0.99`
    /// yields exactly the decimals `0.01 … 0.99`.
    pub fn linspace(start: f64, step: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && step.is_finite() && end.is_finite()) || step <= 0.0 || end < start {
            return Err(invalid(format!(
                "grid needs finite start <= end and step > 0, got {start}:{step}:{end}"
            )));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(invalid(format!("grid {start}:{step}:{end} has too many points")));
        }
        let round = |v: f64| (v * 1e12).round() / 1e12;
        Self::new((0..count).map(|i| round(start + i as f64 * step)).collect())
    }

    /// Parses `"start:step:end"`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(invalid(format!("grid must look like start:step:end, got {spec:?}")));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| invalid(format!("grid component {s:?} is not a number")))
        };
        Self::linspace(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl Default for LambdaGrid {
    /// `{0.01, 0.02, …, 0.99}`.
    fn default() -> Self {
        Self {
            values: (1..=99).map(|i| i as f64 / 100.0).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathEntry {
    pub lambda: f64,
    pub result: EstimationResult,
    pub objective: Objective,
    pub nnz_offdiag: usize,
    pub min_eig: f64,
    pub seconds: f64,
}

/// One entry per grid value, in grid (increasing) order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathResult {
    pub entries: Vec<PathEntry>,
    pub total_time: f64,
}

/// Walks the grid from the largest `λ` down, warm-starting every solve
/// from the previous terminal state, and hands each result to `visit`
/// together with its grid index.
fn walk_path(
    sample_cov: &SymMatrix,
    grid: &LambdaGrid,
    cfg: &SolverConfig,
    mut visit: impl FnMut(usize, EstimationResult) -> Result<()>,
) -> Result<()> {
    let mut warm: Option<AdmmState> = None;
    for (idx, &lambda) in grid.values().iter().enumerate().rev() {
        let cfg = cfg.with_lambda(lambda);
        let result = solve_from(sample_cov, &cfg, warm.as_ref())?;
        warm = Some(result.state.clone());
        visit(idx, result)?;
    }
    Ok(())
}

/// Constrained estimates for every `λ` in `grid`. Non-converged solves are
/// kept (flagged in their result) and the path continues.
pub fn solution_path(sample_cov: &SymMatrix, grid: &LambdaGrid, cfg: &SolverConfig) -> Result<PathResult> {
    let started = Instant::now();
    let mut slots: Vec<Option<PathEntry>> = vec![None; grid.len()];
    walk_path(sample_cov, grid, cfg, |idx, result| {
        let lambda = grid.values()[idx];
        slots[idx] = Some(PathEntry {
            lambda,
            objective: objective(&result.estimate, sample_cov, lambda)?,
            nnz_offdiag: result.estimate.nnz_offdiag(),
            min_eig: result.min_eig,
            seconds: result.seconds,
            result,
        });
        Ok(())
    })?;
    Ok(PathResult {
        entries: slots.into_iter().map(|e| e.expect("every grid point visited")).collect(),
        total_time: started.elapsed().as_secs_f64(),
    })
}

/// Which estimator cross-validation tunes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    SoftThreshold,
    Constrained,
}

/// Matrix the estimators are fitted to: the sample covariance (divisor
/// `n`) or the sample correlation of the rows at hand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Covariance,
    Correlation,
}

impl Scale {
    pub fn matrix(self, x: &DataMatrix) -> Result<SymMatrix> {
        match self {
            Scale::Covariance => sample_covariance(x),
            Scale::Correlation => sample_correlation(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub estimator: Estimator,
    pub scale: Scale,
    pub fold_count: usize,
    pub seed: u64,
    pub lambdas: Vec<f64>,
    /// Mean over folds of `‖Σ̂_train − S_validation‖_F²`, aligned with `lambdas`.
    pub cv_losses: Vec<f64>,
    pub selected_lambda: f64,
}

/// Shuffles `0..n` with a ChaCha8 stream seeded by `seed` and cuts it into
/// `folds` contiguous groups whose sizes differ by at most one.
pub fn fold_partition(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(invalid(format!("need at least 2 folds, got {folds}")));
    }
    if n < 2 * folds {
        return Err(invalid(format!(
            "{n} rows cannot fill {folds} folds with at least 2 rows each"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / folds, n % folds);
    let mut groups = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        groups.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(groups)
}

/// Index of the smallest loss, preferring the later (larger `λ`) entry on ties.
fn argmin_last(losses: &[f64]) -> usize {
    let mut best = 0;
    for (i, &l) in losses.iter().enumerate() {
        if l <= losses[best] {
            best = i;
        }
    }
    best
}

/// Per-`λ` validation losses of one fold.
fn fold_losses(
    train: &SymMatrix,
    validation: &SymMatrix,
    grid: &LambdaGrid,
    cfg: &SolverConfig,
    estimator: Estimator,
) -> Result<Vec<f64>> {
    match estimator {
        Estimator::SoftThreshold => grid
            .values()
            .iter()
            .map(|&lambda| Ok(soft_threshold_estimator(train, lambda)?.frobenius_distance_sq(validation)))
            .collect(),
        Estimator::Constrained => {
            let mut losses = vec![0.0; grid.len()];
            walk_path(train, grid, cfg, |idx, result| {
                losses[idx] = result.estimate.frobenius_distance_sq(validation);
                Ok(())
            })?;
            Ok(losses)
        }
    }
}

/// `folds`-fold cross-validation of `estimator` over `grid`, with training
/// and validation matrices computed on `scale`. Folds are evaluated in
/// parallel and averaged in fold order, so the report does not depend on
/// scheduling.
pub fn cross_validate(
    x: &DataMatrix,
    grid: &LambdaGrid,
    folds: usize,
    cfg: &SolverConfig,
    seed: u64,
    estimator: Estimator,
    scale: Scale,
) -> Result<CvReport> {
    cfg.validate()?;
    let groups = fold_partition(x.rows(), folds, seed)?;
    let per_fold: Vec<Result<Vec<f64>>> = (0..folds)
        .into_par_iter()
        .map(|f| {
            let train_idx: Vec<usize> = groups
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .flat_map(|(_, rows)| rows.iter().copied())
                .collect();
            let train = scale.matrix(&x.select_rows(&train_idx))?;
            let validation = scale.matrix(&x.select_rows(&groups[f]))?;
            fold_losses(&train, &validation, grid, cfg, estimator)
        })
        .collect();

    let mut cv_losses = vec![0.0; grid.len()];
    for losses in per_fold {
        for (acc, l) in cv_losses.iter_mut().zip(losses?) {
            *acc += l;
        }
    }
    cv_losses.iter_mut().for_each(|l| *l /= folds as f64);
    let selected_lambda = grid.values()[argmin_last(&cv_losses)];
    Ok(CvReport {
        estimator,
        scale,
        fold_count: folds,
        seed,
        lambdas: grid.values().to_vec(),
        cv_losses,
        selected_lambda,
    })
}

/// Cross-validation of the constrained estimator on sample covariances.
pub fn cv_select_lambda(
    x: &DataMatrix,
    grid: &LambdaGrid,
    folds: usize,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<CvReport> {
    cross_validate(x, grid, folds, cfg, seed, Estimator::Constrained, Scale::Covariance)
}
