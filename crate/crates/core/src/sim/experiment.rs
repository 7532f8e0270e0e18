use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{metrics, model1_cov, model2_cov, mvn_sample, standardize, GroundTruth, MetricsReport};
use crate::admm::{solve, SolverConfig};
use crate::error::{invalid, CovError, Result};
use crate::prox::soft_threshold_estimator;
use crate::selection::{cross_validate, Estimator, LambdaGrid, Scale};

/// Simulation truth: `1` is the banded Toeplitz model, `2` the linked
/// block model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Model {
    Banded,
    Block,
}

impl Model {
    pub fn truth(self, p: usize) -> Result<GroundTruth> {
        match self {
            Model::Banded => model1_cov(p),
            Model::Block => model2_cov(p),
        }
    }
}

impl TryFrom<u8> for Model {
    type Error = CovError;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Model::Banded),
            2 => Ok(Model::Block),
            _ => Err(invalid(format!("model must be 1 or 2, got {v}"))),
        }
    }
}

impl From<Model> for u8 {
    fn from(m: Model) -> u8 {
        match m {
            Model::Banded => 1,
            Model::Block => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: Model,
    pub p: usize,
    pub n: usize,
    pub replicates: usize,
    pub master_seed: u64,
    pub folds: usize,
    pub grid: LambdaGrid,
    pub solver: SolverConfig,
}

impl ExperimentConfig {
    /// 5-fold CV over the default grid with default solver settings.
    pub fn new(model: Model, p: usize, n: usize, replicates: usize, master_seed: u64) -> Self {
        Self {
            model,
            p,
            n,
            replicates,
            master_seed,
            folds: 5,
            grid: LambdaGrid::default(),
            solver: SolverConfig::default(),
        }
    }
}

/// Results of one simulated data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub index: usize,
    pub seed: u64,
    pub soft_lambda: f64,
    pub soft: MetricsReport,
    pub constrained_lambda: f64,
    pub constrained: MetricsReport,
    pub converged: bool,
    pub iterations: usize,
    pub shortcut_used: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Sample standard deviation over `√replicates`; `None` for a single
    /// replicate.
    pub se: Option<f64>,
}

impl MetricSummary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let se = (values.len() > 1).then(|| {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        });
        Self { mean, se }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub estimator: Estimator,
    pub frob_loss: MetricSummary,
    pub spec_loss: MetricSummary,
    pub fpr: MetricSummary,
    pub tpr: MetricSummary,
    pub n_neg_eigs: MetricSummary,
    pub selected_lambda: MetricSummary,
    pub pd_count: usize,
}

impl ExperimentSummary {
    fn collect(estimator: Estimator, rows: &[(f64, MetricsReport)]) -> Self {
        let field = |f: fn(&(f64, MetricsReport)) -> f64| MetricSummary::of(&rows.iter().map(f).collect::<Vec<_>>());
        Self {
            estimator,
            frob_loss: field(|r| r.1.frob_loss),
            spec_loss: field(|r| r.1.spec_loss),
            fpr: field(|r| r.1.fpr),
            tpr: field(|r| r.1.tpr),
            n_neg_eigs: field(|r| r.1.n_neg_eigs as f64),
            selected_lambda: field(|r| r.0),
            pd_count: rows.iter().filter(|r| r.1.is_pd).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub soft_threshold: ExperimentSummary,
    pub constrained: ExperimentSummary,
    /// Constrained fits that hit the iteration cap.
    pub non_converged: usize,
    pub outcomes: Vec<ReplicateOutcome>,
}

/// SplitMix64 output number `index + 1` of the stream started at
/// `master`. Depends only on `(master, index)`, so replicates can run in
/// any order.
pub fn child_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15_u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Simulates, tunes, and scores replicate `index`. The data come from
/// `child_seed(master_seed, index)`; the fold shuffle (shared by both
/// estimators) from a second seed derived from that one. Estimators are
/// fitted to sample correlation matrices, in the folds as well as on the
/// full sample.
pub fn replicate(cfg: &ExperimentConfig, truth: &GroundTruth, index: usize) -> Result<ReplicateOutcome> {
    let seed = child_seed(cfg.master_seed, index as u64);
    let x = standardize(&mvn_sample(cfg.n, truth, seed)?)?;
    let scale = Scale::Correlation;
    let s = scale.matrix(&x)?;
    let fold_seed = child_seed(seed, 0);
    let cv = |estimator| cross_validate(&x, &cfg.grid, cfg.folds, &cfg.solver, fold_seed, estimator, scale);

    let soft_cv = cv(Estimator::SoftThreshold)?;
    let soft = soft_threshold_estimator(&s, soft_cv.selected_lambda)?;

    let cons_cv = cv(Estimator::Constrained)?;
    let fit = solve(&s, &cfg.solver.with_lambda(cons_cv.selected_lambda))?;

    Ok(ReplicateOutcome {
        index,
        seed,
        soft_lambda: soft_cv.selected_lambda,
        soft: metrics(&soft, truth)?,
        constrained_lambda: cons_cv.selected_lambda,
        constrained: metrics(&fit.estimate, truth)?,
        converged: fit.converged,
        iterations: fit.iterations,
        shortcut_used: fit.shortcut_used,
    })
}

/// Runs all replicates (in parallel) and aggregates them in index order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.replicates == 0 {
        return Err(invalid("need at least 1 replicate"));
    }
    cfg.solver.validate()?;
    let truth = cfg.model.truth(cfg.p)?;
    let results: Vec<Result<ReplicateOutcome>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|i| {
            replicate(cfg, &truth, i).map_err(|e| CovError::Replicate {
                index: i,
                source: Box::new(e),
            })
        })
        .collect();
    let outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;

    let soft: Vec<_> = outcomes.iter().map(|o| (o.soft_lambda, o.soft)).collect();
    let cons: Vec<_> = outcomes.iter().map(|o| (o.constrained_lambda, o.constrained)).collect();
    Ok(ExperimentReport {
        config: cfg.clone(),
        seeds: outcomes.iter().map(|o| o.seed).collect(),
        soft_threshold: ExperimentSummary::collect(Estimator::SoftThreshold, &soft),
        constrained: ExperimentSummary::collect(Estimator::Constrained, &cons),
        non_converged: outcomes.iter().filter(|o| !o.converged).count(),
        outcomes,
    })
}
