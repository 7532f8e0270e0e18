use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::GroundTruth;
use crate::error::{check_dim, invalid, CovError, Result};
use crate::matrix::SymMatrix;

/// `n × p` observation matrix, one observation per row, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(rows * cols, data.len())?;
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(CovError::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(invalid(format!(
                    "row {i} has {} columns, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// The rows listed in `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (m, v) in means.iter_mut().zip(self.row(i)) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= self.rows as f64);
        means
    }
}

/// Draws `n` rows i.i.d. from `N(0, Σ⁰)` as `x = L z`, `L` the Cholesky
/// factor of `Σ⁰` and `z` standard normal from a ChaCha8 stream seeded
/// with `seed`.
pub fn mvn_sample(n: usize, truth: &GroundTruth, seed: u64) -> Result<DataMatrix> {
    if n < 2 {
        return Err(invalid(format!("need at least 2 observations, got {n}")));
    }
    let p = truth.sigma0.dim();
    let chol = truth.sigma0.cholesky()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = vec![0.0; p];
    let mut data = Vec::with_capacity(n * p);
    for _ in 0..n {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        for j in 0..p {
            let lrow = &chol[j * p..j * p + j + 1];
            data.push(lrow.iter().zip(&z).map(|(l, zk)| l * zk).sum());
        }
    }
    DataMatrix::new(n, p, data)
}

/// Centers every column and scales it to unit sample variance
/// (denominator `n − 1`).
pub fn standardize(x: &DataMatrix) -> Result<DataMatrix> {
    let n = x.rows();
    if n < 2 {
        return Err(invalid(format!("need at least 2 observations, got {n}")));
    }
    let means = x.column_means();
    let mut sds = vec![0.0; x.cols()];
    let mut peaks = vec![0.0_f64; x.cols()];
    for i in 0..n {
        for (j, v) in x.row(i).iter().enumerate() {
            let d = v - means[j];
            sds[j] += d * d;
            peaks[j] = peaks[j].max(v.abs());
        }
    }
    for (j, sd) in sds.iter_mut().enumerate() {
        *sd = (*sd / (n - 1) as f64).sqrt();
        if !(*sd > 1e-12 * peaks[j]) {
            return Err(invalid(format!("column {j} has zero variance")));
        }
    }
    let mut data = Vec::with_capacity(n * x.cols());
    for i in 0..n {
        data.extend(x.row(i).iter().enumerate().map(|(j, v)| (v - means[j]) / sds[j]));
    }
    DataMatrix::new(n, x.cols(), data)
}

/// `(1/n) Σᵢ (xᵢ − x̄)(xᵢ − x̄)ᵀ`.
pub fn sample_covariance(x: &DataMatrix) -> Result<SymMatrix> {
    let n = x.rows();
    if n < 2 {
        return Err(invalid(format!("need at least 2 observations, got {n}")));
    }
    let p = x.cols();
    let means = x.column_means();
    let mut centered = vec![0.0; p];
    let mut acc = vec![0.0; p * p];
    for i in 0..n {
        for ((c, v), m) in centered.iter_mut().zip(x.row(i)).zip(&means) {
            *c = v - m;
        }
        for j in 0..p {
            let cj = centered[j];
            for (a, ck) in acc[j * p + j..(j + 1) * p].iter_mut().zip(&centered[j..]) {
                *a += cj * ck;
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    Ok(SymMatrix::from_fn(p, |j, k| acc[j * p + k] * inv_n))
}

/// Sample correlation matrix: [`sample_covariance`] rescaled to unit
/// diagonal.
pub fn sample_correlation(x: &DataMatrix) -> Result<SymMatrix> {
    let cov = sample_covariance(x)?;
    let mut sd = Vec::with_capacity(x.cols());
    for (j, v) in cov.diag().into_iter().enumerate() {
        let peak = (0..x.rows()).map(|i| x.get(i, j).abs()).fold(0.0, f64::max);
        let s = v.sqrt();
        if !(s > 1e-12 * peak) {
            return Err(invalid(format!("column {j} has zero variance")));
        }
        sd.push(s);
    }
    Ok(SymMatrix::from_fn(x.cols(), |j, k| {
        if j == k {
            1.0
        } else {
            cov.get(j, k) / (sd[j] * sd[k])
        }
    }))
}
