use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::prox::soft_threshold;

fn m2(a: f64, b: f64, c: f64) -> SymMatrix {
    SymMatrix::from_rows(&[vec![a, b], vec![b, c]]).unwrap()
}

/// Sample covariance of `n < p` uniform draws (rank deficient).
fn low_rank_cov(p: usize, n: usize, seed: u64) -> SymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(-1.5..1.5)).collect())
        .collect();
    SymMatrix::from_fn(p, |j, k| rows.iter().map(|r| r[j] * r[k]).sum::<f64>() / n as f64)
}

/// `low_rank_cov` shifted along the identity so that its soft-thresholded
/// version at `lambda` has smallest eigenvalue exactly `-depth`. The shift
/// commutes with thresholding since the diagonal is never shrunk.
fn indefinite_cov(p: usize, n: usize, seed: u64, lambda: f64, depth: f64) -> SymMatrix {
    let s = low_rank_cov(p, n, seed);
    let m = soft_threshold(&s, lambda).unwrap().min_eigenvalue().unwrap();
    s.add_scaled(-(m + depth), &SymMatrix::identity(p))
}

fn state(theta: SymMatrix, sigma: SymMatrix, dual: SymMatrix) -> AdmmState {
    AdmmState {
        theta,
        sigma,
        dual,
        iter: 0,
    }
}

#[test]
fn config_validation() {
    assert!(SolverConfig::new(0.1).validate().is_ok());
    assert!(SolverConfig::new(-0.1).validate().is_err());
    assert!(SolverConfig { eps: 0.0, ..SolverConfig::new(0.1) }.validate().is_err());
    assert!(SolverConfig { mu: -2.0, ..SolverConfig::new(0.1) }.validate().is_err());
    assert!(SolverConfig { tol_dual: 0.0, ..SolverConfig::new(0.1) }.validate().is_err());
    assert!(SolverConfig { max_iter: 0, ..SolverConfig::new(0.1) }.validate().is_err());
    let d = SolverConfig::default();
    assert_eq!((d.eps, d.mu, d.tol_primal, d.tol_dual, d.max_iter), (1e-4, 2.0, 1e-7, 1e-7, 20_000));
}

#[test]
fn init_state_examples() {
    let s = init_state(&SymMatrix::identity(3), &SolverConfig::new(0.1)).unwrap();
    assert_eq!(s.theta, SymMatrix::identity(3));
    assert_eq!(s.sigma, SymMatrix::identity(3));
    assert_eq!(s.dual, SymMatrix::zeros(3));
    assert_eq!(s.iter, 0);

    let s = init_state(&m2(1.0, 0.5, 1.0), &SolverConfig::new(0.2)).unwrap();
    assert!(s.theta.max_abs_diff(&m2(1.0, 0.3, 1.0)) < 1e-15);
    assert_eq!(s.theta, s.sigma);

    let cov = low_rank_cov(4, 2, 1);
    let s = init_state(&cov, &SolverConfig::new(0.0)).unwrap();
    assert_eq!(s.sigma, cov);
}

#[test]
fn theta_step_examples() {
    let cfg = SolverConfig::new(0.1);
    let st = state(SymMatrix::zeros(2), SymMatrix::identity(2), SymMatrix::zeros(2));
    assert!(theta_step(&st, &cfg).unwrap().max_abs_diff(&SymMatrix::identity(2)) < 1e-15);

    // eps = 0 is rejected for solves but the bare step accepts it.
    let cfg0 = SolverConfig { eps: 0.0, ..cfg };
    let st = state(SymMatrix::zeros(2), SymMatrix::from_diag(&[1.0, -1.0]), SymMatrix::zeros(2));
    let t = theta_step(&st, &cfg0).unwrap();
    assert!(t.max_abs_diff(&SymMatrix::from_diag(&[1.0, 0.0])) < 1e-15);

    let st = state(SymMatrix::zeros(2), SymMatrix::zeros(2), &SymMatrix::identity(2) * 0.5);
    let t = theta_step(&st, &cfg).unwrap();
    assert!(t.max_abs_diff(&SymMatrix::identity(2)) < 1e-15);
}

#[test]
fn sigma_step_examples() {
    let s_n = low_rank_cov(4, 3, 2);
    let cfg = SolverConfig::new(0.0);
    let st = state(s_n.clone(), s_n.clone(), SymMatrix::zeros(4));
    let out = sigma_step(&st, &s_n, &s_n, &cfg).unwrap();
    assert!(out.max_abs_diff(&s_n) < 1e-15);

    // off-diagonal: s(2·0.5, 0.2)/3 = 0.8/3; diagonal: (2 + 1)/3 = 1
    let s_n = m2(1.0, 0.5, 1.0);
    let cfg = SolverConfig::new(0.1);
    let st = state(SymMatrix::identity(2), SymMatrix::identity(2), SymMatrix::zeros(2));
    let out = sigma_step(&st, &SymMatrix::identity(2), &s_n, &cfg).unwrap();
    assert!(out.max_abs_diff(&m2(1.0, 0.8 / 3.0, 1.0)) < 1e-15);

    let z = SymMatrix::zeros(3);
    let st = state(z.clone(), z.clone(), z.clone());
    assert_eq!(sigma_step(&st, &z, &z, &cfg).unwrap(), z);

    assert!(sigma_step(&st, &SymMatrix::zeros(2), &z, &cfg).is_err());
}

#[test]
fn lambda_step_examples() {
    let cfg = SolverConfig::new(0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let dual = SymMatrix::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
    let any = SymMatrix::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
    let st = state(SymMatrix::zeros(3), SymMatrix::zeros(3), dual.clone());
    assert_eq!(lambda_step(&st, &any, &any, &cfg), dual);

    let st = state(SymMatrix::zeros(2), SymMatrix::zeros(2), SymMatrix::zeros(2));
    let out = lambda_step(&st, &SymMatrix::identity(2), &SymMatrix::zeros(2), &cfg);
    assert_eq!(out, &SymMatrix::identity(2) * -0.5);

    let st = state(SymMatrix::zeros(2), SymMatrix::zeros(2), SymMatrix::identity(2));
    let out = lambda_step(&st, &any_2(), &any_2(), &cfg);
    assert_eq!(out, SymMatrix::identity(2));
}

fn any_2() -> SymMatrix {
    m2(0.3, -0.7, 2.0)
}

#[test]
fn solve_identity_takes_shortcut() {
    for lambda in [0.0, 0.1, 5.0] {
        let r = solve(&SymMatrix::identity(6), &SolverConfig::new(lambda)).unwrap();
        assert!(r.shortcut_used && r.converged);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.estimate, SymMatrix::identity(6));
    }
}

#[test]
fn solve_nearly_singular_pd_input_takes_shortcut() {
    let s = m2(1.0, 0.99, 1.0);
    let r = solve(&s, &SolverConfig::new(0.0)).unwrap();
    assert!(r.shortcut_used);
    assert_eq!(r.estimate, s);
    assert!((r.min_eig - 0.01).abs() < 1e-12);
}

#[test]
fn solve_matches_reference_on_indefinite_instance() {
    let s = indefinite_cov(5, 3, 11, 0.3, 0.2);
    let cfg = SolverConfig::new(0.3);
    assert!(soft_threshold(&s, 0.3).unwrap().min_eigenvalue().unwrap() < cfg.eps);
    let r = solve(&s, &cfg).unwrap();
    assert!(r.converged && !r.shortcut_used);
    let oracle = reference_solve(&s, &cfg).unwrap();
    let a = objective(&r.estimate, &s, cfg.lambda).unwrap().total;
    let b = objective(&oracle, &s, cfg.lambda).unwrap().total;
    assert!((a - b).abs() / b.max(1.0) <= 1e-6, "admm {a} oracle {b}");
    assert!(r.min_eig >= cfg.eps - 1e-8);
}

#[test]
fn estimate_keeps_exact_zeros_of_sparse_iterate() {
    let s = indefinite_cov(8, 3, 5, 0.25, 0.1);
    let cfg = SolverConfig::new(0.25);
    let r = solve(&s, &cfg).unwrap();
    assert!(!r.shortcut_used);
    for j in 0..8 {
        for k in 0..8 {
            if j != k {
                assert_eq!(r.estimate.get(j, k), r.state.sigma.get(j, k));
            }
        }
    }
    assert!(r.estimate.nnz_offdiag() < 56);
}

#[test]
fn kkt_zero_at_diagonal_optimum() {
    let s = SymMatrix::from_diag(&[2.0, 0.5, 1.0]);
    let cfg = SolverConfig::new(0.4);
    let z = SymMatrix::zeros(3);
    assert!(kkt_residuals(&s, &s, &z, &s, &cfg).unwrap() <= 1e-10);
}

#[test]
fn kkt_small_at_convergence_and_grows_under_perturbation() {
    let s = indefinite_cov(5, 2, 21, 0.2, 0.3);
    let cfg = SolverConfig {
        tol_primal: 1e-10,
        tol_dual: 1e-10,
        ..SolverConfig::new(0.2)
    };
    let r = solve(&s, &cfg).unwrap();
    assert!(r.converged && !r.shortcut_used);
    assert!(r.kkt_residual <= 1e-5, "{}", r.kkt_residual);
    let base = kkt_residuals(&r.state.theta, &r.state.sigma, &r.state.dual, &s, &cfg).unwrap();
    let mut bumped = r.state.sigma.clone();
    bumped.set(0, 1, bumped.get(0, 1) + 0.01);
    let worse = kkt_residuals(&r.state.theta, &bumped, &r.state.dual, &s, &cfg).unwrap();
    assert!(worse > base + 5e-3, "base {base} perturbed {worse}");
}

#[test]
fn kkt_report_skips_subgradient_when_unpenalized() {
    let s = low_rank_cov(4, 2, 3);
    let cfg = SolverConfig::new(0.0);
    let r = solve(&s, &cfg).unwrap();
    let rep = kkt_report(&r.state.theta, &r.state.sigma, &r.state.dual, &s, &cfg).unwrap();
    assert!(rep.subgradient.is_none());
    assert!(rep.max() <= 1e-5);
}

#[test]
fn g_norm_examples() {
    let z = SymMatrix::zeros(2);
    let id = SymMatrix::identity(2);
    assert_eq!(g_norm_sq(&z, &z, 2.0).unwrap(), 0.0);
    assert_eq!(g_norm_sq(&id, &z, 2.0).unwrap(), 4.0);
    assert_eq!(g_norm_sq(&z, &id, 2.0).unwrap(), 1.0);
    assert!(g_norm_sq(&z, &id, 0.0).is_err());
}

#[test]
fn reference_examples() {
    let id = SymMatrix::identity(4);
    let r = reference_solve(&id, &SolverConfig::new(0.2)).unwrap();
    assert!(r.max_abs_diff(&id) < 1e-12);

    // Penalty dominating every off-diagonal: the answer is diag(max(s_jj, ε)).
    let s = low_rank_cov(5, 2, 8);
    let lambda = 10.0 * s.max_abs_offdiag();
    let cfg = SolverConfig::new(lambda);
    let r = reference_solve(&s, &cfg).unwrap();
    let expected = SymMatrix::from_diag(&s.diag().iter().map(|d| d.max(cfg.eps)).collect::<Vec<_>>());
    assert!(r.max_abs_diff(&expected) < 1e-10, "{r:?}");

    assert!(reference_solve(&SymMatrix::identity(26), &cfg).is_err());
}

#[test]
fn theta_iterates_stay_feasible() {
    let s = indefinite_cov(7, 3, 17, 0.1, 0.2);
    let cfg = SolverConfig::new(0.1);
    let mut st = init_state(&s, &cfg).unwrap();
    for _ in 0..25 {
        let theta = theta_step(&st, &cfg).unwrap();
        assert!(theta.min_eigenvalue().unwrap() >= cfg.eps - 1e-9);
        let sigma = sigma_step(&st, &theta, &s, &cfg).unwrap();
        let dual = lambda_step(&st, &theta, &sigma, &cfg);
        st = AdmmState { theta, sigma, dual, iter: st.iter + 1 };
    }
}

#[test]
fn fejer_monotone_distances() {
    for seed in 0..5 {
        let s = indefinite_cov(6, 3, 100 + seed, 0.15, 0.05 * (seed + 1) as f64);
        let cfg = SolverConfig {
            track_iterates: true,
            ..SolverConfig::new(0.15)
        };
        let r = solve(&s, &cfg).unwrap();
        assert!(r.converged);
        let d = r.diagnostics.g_distances.as_ref().unwrap();
        assert_eq!(d.len(), r.iterations + 1);
        for w in d.windows(2) {
            assert!(w[1] <= w[0] + 1e-8, "seed {seed}: {} -> {}", w[0], w[1]);
        }
        let steps = r.diagnostics.g_steps.as_ref().unwrap();
        let scale = s.frobenius_norm().max(1.0);
        assert!(*steps.last().unwrap() <= 10.0 * cfg.tol_primal * scale * (cfg.mu + 1.0 / cfg.mu));
    }
}

#[test]
fn shortcut_is_bit_exact() {
    let s = SymMatrix::from_fn(5, |j, k| if j == k { 2.0 } else { 0.3 / (1 + j + k) as f64 });
    let cfg = SolverConfig::new(0.05);
    let r = solve(&s, &cfg).unwrap();
    assert!(r.shortcut_used);
    assert_eq!(r.estimate, soft_threshold_estimator(&s, 0.05).unwrap());
}

#[test]
fn deterministic_iterates() {
    let s = indefinite_cov(9, 4, 77, 0.12, 0.1);
    let cfg = SolverConfig {
        track_iterates: true,
        ..SolverConfig::new(0.12)
    };
    let a = solve(&s, &cfg).unwrap();
    let b = solve(&s, &cfg).unwrap();
    assert_eq!(a.diagnostics.iterates, b.diagnostics.iterates);
    assert_eq!(a.estimate, b.estimate);
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let s = indefinite_cov(6, 2, 4, 0.05, 0.5);
    let cfg = SolverConfig {
        max_iter: 2,
        ..SolverConfig::new(0.05)
    };
    let r = solve(&s, &cfg).unwrap();
    assert!(!r.converged);
    assert_eq!(r.iterations, 2);
    assert!(r.min_eig >= cfg.eps - 1e-8);
}

#[test]
fn warm_start_reaches_same_optimum() {
    let s = indefinite_cov(8, 3, 9, 0.15, 0.2);
    let cold = solve(&s, &SolverConfig::new(0.1)).unwrap();
    let prev = solve(&s, &SolverConfig::new(0.15)).unwrap();
    let warm = solve_from(&s, &SolverConfig::new(0.1), Some(&prev.state)).unwrap();
    let a = objective(&cold.estimate, &s, 0.1).unwrap().total;
    let b = objective(&warm.estimate, &s, 0.1).unwrap().total;
    assert!((a - b).abs() <= 1e-6 * a.max(1.0));
    assert!(solve_from(&s, &SolverConfig::new(0.1), Some(&init_state(&SymMatrix::identity(2), &SolverConfig::new(0.1)).unwrap())).is_err());
}

#[test]
fn augmented_lagrangian_decreases_along_iterations() {
    // Each Θ/Σ half-step minimizes L over one block, so L cannot increase
    // across them with Λ fixed.
    let s = indefinite_cov(6, 3, 12, 0.1, 0.1);
    let cfg = SolverConfig::new(0.1);
    let st = init_state(&s, &cfg).unwrap();
    let l0 = crate::prox::augmented_lagrangian(&st.theta, &st.sigma, &st.dual, &s, cfg.lambda, cfg.mu).unwrap();
    let theta = theta_step(&st, &cfg).unwrap();
    let l1 = crate::prox::augmented_lagrangian(&theta, &st.sigma, &st.dual, &s, cfg.lambda, cfg.mu).unwrap();
    let sigma = sigma_step(&st, &theta, &s, &cfg).unwrap();
    let l2 = crate::prox::augmented_lagrangian(&theta, &sigma, &st.dual, &s, cfg.lambda, cfg.mu).unwrap();
    // l0 is evaluated at an infeasible Θ⁰ (outside the cone), so only the
    // Σ half-step is compared.
    assert!(l0.is_finite());
    assert!(l2 <= l1 + 1e-12);
}
