use serde::{Deserialize, Serialize};

use super::GroundTruth;
use crate::error::{check_dim, Result};
use crate::matrix::{eigvalsh, SymMatrix};

/// Accuracy of one estimate against the truth. Support rates count
/// off-diagonal pairs only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub frob_loss: f64,
    pub spec_loss: f64,
    /// Fraction of true zeros estimated as nonzero (0 when the truth has
    /// no off-diagonal zeros).
    pub fpr: f64,
    /// Fraction of true nonzeros estimated as nonzero (1 when the truth
    /// has none).
    pub tpr: f64,
    pub n_neg_eigs: usize,
    pub min_eig: f64,
    pub is_pd: bool,
}

pub fn metrics(estimate: &SymMatrix, truth: &GroundTruth) -> Result<MetricsReport> {
    let p = truth.dim();
    check_dim(p, estimate.dim())?;
    let diff = estimate - &truth.sigma0;

    let (mut false_pos, mut true_zero, mut true_pos, mut true_nonzero) = (0usize, 0usize, 0usize, 0usize);
    for j in 0..p {
        for k in 0..p {
            if j == k {
                continue;
            }
            let hit = estimate.get(j, k) != 0.0;
            if truth.sigma0.get(j, k) == 0.0 {
                true_zero += 1;
                false_pos += usize::from(hit);
            } else {
                true_nonzero += 1;
                true_pos += usize::from(hit);
            }
        }
    }
    let ratio = |num: usize, den: usize, empty: f64| if den == 0 { empty } else { num as f64 / den as f64 };

    let eigs = eigvalsh(estimate)?;
    let min_eig = eigs.last().copied().unwrap_or(f64::INFINITY);
    Ok(MetricsReport {
        frob_loss: diff.frobenius_norm(),
        spec_loss: diff.spectral_norm()?,
        fpr: ratio(false_pos, true_zero, 0.0),
        tpr: ratio(true_pos, true_nonzero, 1.0),
        n_neg_eigs: eigs.iter().filter(|&&v| v < 0.0).count(),
        min_eig,
        is_pd: min_eig > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{model1_cov, model2_cov};

    #[test]
    fn perfect_estimate() {
        let t = model1_cov(30).unwrap();
        let m = metrics(&t.sigma0, &t).unwrap();
        assert_eq!((m.frob_loss, m.spec_loss, m.fpr, m.tpr), (0.0, 0.0, 0.0, 1.0));
        assert!(m.is_pd);
        assert_eq!(m.n_neg_eigs, 0);
    }

    #[test]
    fn identity_estimate_selects_nothing() {
        let t = model1_cov(100).unwrap();
        let m = metrics(&SymMatrix::identity(100), &t).unwrap();
        assert_eq!((m.fpr, m.tpr), (0.0, 0.0));
        let direct = (&SymMatrix::identity(100) - &t.sigma0).frobenius_norm();
        assert_eq!(m.frob_loss, direct);
    }

    #[test]
    fn dense_estimate_selects_everything() {
        let t = model2_cov(40).unwrap();
        let dense = SymMatrix::from_fn(40, |j, k| if j == k { 1.0 } else { 0.4 });
        let m = metrics(&dense, &t).unwrap();
        assert_eq!((m.fpr, m.tpr), (1.0, 1.0));
        assert!(m.is_pd);
    }

    #[test]
    fn negative_eigenvalues_counted() {
        let t = GroundTruth::new(SymMatrix::identity(3)).unwrap();
        let m = metrics(&SymMatrix::from_diag(&[1.0, -0.5, -2.0]), &t).unwrap();
        assert_eq!(m.n_neg_eigs, 2);
        assert!(!m.is_pd);
        assert!((m.spec_loss - 3.0).abs() < 1e-12);
        assert!(metrics(&SymMatrix::identity(2), &t).is_err());
    }
}
