use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use serde::Serialize;

use covadmm::prox::objective;
use covadmm::selection::{cross_validate, solution_path, CvReport, Estimator, LambdaGrid, Scale};
use covadmm::sim::{run_experiment, standardize, DataMatrix, ExperimentConfig, ExperimentSummary, Model};
use covadmm::{solve, SymMatrix};

use crate::error::{CliError, CliResult};
use crate::io::{format_float, read_covariance, read_data, write_json, write_matrix, write_rows};
use crate::report::{RunReport, Stopwatch, SCHEMA_VERSION};
use crate::{EstimateArgs, PathArgs, ScaleArgs, SimulateArgs};

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = OsString::from(prefix.as_os_str());
    s.push(suffix);
    PathBuf::from(s)
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

/// Data prepared for the requested scale, and the matrix to fit.
fn sample_matrix(x: DataMatrix, opts: &ScaleArgs) -> CliResult<(DataMatrix, SymMatrix)> {
    let scale = Scale::from(opts.scale);
    let x = if opts.standardize && scale == Scale::Covariance {
        standardize(&x)?
    } else {
        x
    };
    let s = scale.matrix(&x)?;
    Ok((x, s))
}

#[derive(Debug, Serialize)]
struct EstimateSummary {
    lambda: f64,
    selected_lambda: Option<f64>,
    converged: bool,
    iterations: usize,
    shortcut_used: bool,
    min_eig: f64,
    nnz_offdiag: usize,
    objective: f64,
    kkt_residual: f64,
    cv: Option<CvReport>,
}

pub fn estimate(args: EstimateArgs, argv: Vec<String>) -> CliResult<bool> {
    let mut clock = Stopwatch::default();
    let raw = clock.time("read", || read_data(&args.input))?;
    let (x, s) = clock.time("sample_matrix", || sample_matrix(raw, &args.scale))?;
    args.solver.config(0.0).validate()?;

    let cv = match args.lambda {
        Some(_) => None,
        None => {
            let grid = LambdaGrid::parse(&args.grid)?;
            let base = args.solver.config(0.0);
            let scale = Scale::from(args.scale.scale);
            Some(clock.time("cross_validation", || {
                cross_validate(&x, &grid, args.folds, &base, args.seed, Estimator::Constrained, scale)
            })?)
        }
    };
    let lambda = cv.as_ref().map_or_else(|| args.lambda.unwrap_or_default(), |r| r.selected_lambda);
    let cfg = args.solver.config(lambda);
    let fit = clock.time("solve", || solve(&s, &cfg))?;

    let estimate_path = with_suffix(&args.output, ".estimate.csv");
    let report_path = with_suffix(&args.output, ".report.json");
    clock.time("write", || write_matrix(&estimate_path, &fit.estimate))?;

    let summary = EstimateSummary {
        lambda,
        selected_lambda: cv.as_ref().map(|r| r.selected_lambda),
        converged: fit.converged,
        iterations: fit.iterations,
        shortcut_used: fit.shortcut_used,
        min_eig: fit.min_eig,
        nnz_offdiag: fit.estimate.nnz_offdiag(),
        objective: objective(&fit.estimate, &s, lambda)?.total,
        kkt_residual: fit.kkt_residual,
        cv,
    };
    RunReport {
        schema_version: SCHEMA_VERSION,
        command: "estimate",
        argv,
        config: &args,
        timings: clock.finish(),
        summary,
        outputs: BTreeMap::from([("estimate", display(&estimate_path)), ("report", display(&report_path))]),
    }
    .write(&report_path)?;
    Ok(fit.converged)
}

#[derive(Debug, Serialize)]
struct PathRow {
    lambda: String,
    objective: String,
    nnz_offdiag: usize,
    min_eig: String,
    iterations: usize,
    shortcut: bool,
    seconds: String,
}

#[derive(Debug, Serialize)]
struct PathSummary {
    dim: usize,
    points: usize,
    converged: usize,
    shortcuts: usize,
    total_iterations: usize,
}

pub fn path(args: PathArgs, argv: Vec<String>) -> CliResult<bool> {
    let mut clock = Stopwatch::default();
    let grid = LambdaGrid::parse(&args.grid)?;
    let s = match (&args.input, &args.covariance) {
        (_, Some(cov)) => clock.time("read", || read_covariance(cov))?,
        (Some(input), None) => {
            let raw = clock.time("read", || read_data(input))?;
            clock.time("sample_matrix", || sample_matrix(raw, &args.scale))?.1
        }
        (None, None) => return Err(CliError::Usage("one of --input or --covariance is required".into())),
    };
    let cfg = args.solver.config(0.0);
    cfg.validate()?;
    let result = clock.time("solve", || solution_path(&s, &grid, &cfg))?;

    let rows: Vec<PathRow> = result
        .entries
        .iter()
        .map(|e| PathRow {
            lambda: format_float(e.lambda),
            objective: format_float(e.objective.total),
            nnz_offdiag: e.nnz_offdiag,
            min_eig: format_float(e.min_eig),
            iterations: e.result.iterations,
            shortcut: e.result.shortcut_used,
            seconds: format_float(e.seconds),
        })
        .collect();
    let path_csv = with_suffix(&args.output, ".path.csv");
    let report_path = with_suffix(&args.output, ".report.json");
    clock.time("write", || write_rows(&path_csv, &rows))?;

    let converged = result.entries.iter().filter(|e| e.result.converged).count();
    let summary = PathSummary {
        dim: s.dim(),
        points: result.entries.len(),
        converged,
        shortcuts: result.entries.iter().filter(|e| e.result.shortcut_used).count(),
        total_iterations: result.entries.iter().map(|e| e.result.iterations).sum(),
    };
    RunReport {
        schema_version: SCHEMA_VERSION,
        command: "path",
        argv,
        config: &args,
        timings: clock.finish(),
        summary,
        outputs: BTreeMap::from([("path", display(&path_csv)), ("report", display(&report_path))]),
    }
    .write(&report_path)?;
    Ok(converged == result.entries.len())
}

/// Contents of `<prefix>.summary.json`. Holds no timings, so equal seeds
/// give identical files.
#[derive(Debug, Serialize)]
struct SimulationSummary<'a> {
    schema_version: &'static str,
    model: u8,
    p: usize,
    n: usize,
    replicates: usize,
    seed: u64,
    folds: usize,
    soft_threshold: &'a ExperimentSummary,
    constrained: &'a ExperimentSummary,
    non_converged: usize,
}

#[derive(Debug, Serialize)]
struct SimulateReportSummary {
    soft_threshold_pd_count: usize,
    constrained_pd_count: usize,
    non_converged: usize,
}

pub fn simulate(args: SimulateArgs, argv: Vec<String>) -> CliResult<bool> {
    let mut clock = Stopwatch::default();
    let model = Model::try_from(args.model)?;
    let cfg = ExperimentConfig {
        folds: args.folds,
        grid: LambdaGrid::parse(&args.grid)?,
        solver: args.solver.config(0.0),
        ..ExperimentConfig::new(model, args.p, args.n, args.replicates, args.seed)
    };
    let report = clock.time("experiment", || run_experiment(&cfg))?;

    let summary_path = with_suffix(&args.output, ".summary.json");
    let report_path = with_suffix(&args.output, ".report.json");
    let summary = SimulationSummary {
        schema_version: SCHEMA_VERSION,
        model: args.model,
        p: args.p,
        n: args.n,
        replicates: args.replicates,
        seed: args.seed,
        folds: args.folds,
        soft_threshold: &report.soft_threshold,
        constrained: &report.constrained,
        non_converged: report.non_converged,
    };
    clock.time("write", || write_json(&summary_path, &summary))?;

    RunReport {
        schema_version: SCHEMA_VERSION,
        command: "simulate",
        argv,
        config: &args,
        timings: clock.finish(),
        summary: SimulateReportSummary {
            soft_threshold_pd_count: report.soft_threshold.pd_count,
            constrained_pd_count: report.constrained.pd_count,
            non_converged: report.non_converged,
        },
        outputs: BTreeMap::from([("summary", display(&summary_path)), ("report", display(&report_path))]),
    }
    .write(&report_path)?;
    Ok(report.non_converged == 0)
}
