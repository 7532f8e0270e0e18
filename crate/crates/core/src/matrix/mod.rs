//! Dense symmetric matrices, the symmetric eigensolver, and projection onto
//! the shifted positive semidefinite cone `{X : X ⪰ εI}`.

mod eigen;

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, CovError, Result};

pub use eigen::{eigh, eigh_below, eigvalsh, EigenDecomposition, LowerSpectrum};

/// Largest elementwise asymmetry tolerated (and averaged away) by the
/// checked constructors.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// Dense `p × p` real symmetric matrix stored row-major.
///
/// Both triangles are stored and are kept exactly equal.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag(&vec![1.0; dim])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (j, &v) in diag.iter().enumerate() {
            m.data[j * m.dim + j] = v;
        }
        m
    }

    /// Builds a matrix from a generator evaluated on the upper triangle
    /// (`j <= k`); the lower triangle is mirrored.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            for k in j..dim {
                let v = f(j, k);
                m.data[j * dim + k] = v;
                m.data[k * dim + j] = v;
            }
        }
        m
    }

    /// Checked constructor from row-major data.
    ///
    /// Entries must be finite. Pairs differing by at most
    /// [`SYMMETRY_TOLERANCE`] are replaced by their average; larger gaps are
    /// rejected.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(dim * dim, data.len())?;
        let mut data = data;
        for j in 0..dim {
            for k in 0..dim {
                if !data[j * dim + k].is_finite() {
                    return Err(CovError::NonFinite { row: j, col: k });
                }
            }
        }
        for j in 0..dim {
            for k in (j + 1)..dim {
                let a = data[j * dim + k];
                let b = data[k * dim + j];
                let gap = (a - b).abs();
                if gap > SYMMETRY_TOLERANCE {
                    return Err(CovError::Asymmetric { row: j, col: k, gap });
                }
                if gap > 0.0 {
                    let avg = 0.5 * (a + b);
                    data[j * dim + k] = avg;
                    data[k * dim + j] = avg;
                }
            }
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            check_dim(dim, row.len())?;
            data.extend_from_slice(row);
        }
        Self::from_row_major(dim, data)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.data[j * self.dim + k]
    }

    /// Sets `a[j][k]` and `a[k][j]`.
    pub fn set(&mut self, j: usize, k: usize, value: f64) {
        self.data[j * self.dim + k] = value;
        self.data[k * self.dim + j] = value;
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    /// Row-major entries (both triangles).
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|j| self.get(j, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|j| self.row(j).to_vec()).collect()
    }

    /// Applies `f` entrywise. `f` must treat `(j, k)` and `(k, j)` alike;
    /// it is evaluated on the upper triangle only and mirrored.
    pub fn map_indexed(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Self {
        Self::from_fn(self.dim, |j, k| f(j, k, self.get(j, k)))
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        }
    }

    /// Entrywise (Frobenius) inner product `⟨A, B⟩`.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// `‖A − B‖_F` without materializing the difference.
    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        self.frobenius_distance_sq(other).sqrt()
    }

    pub fn frobenius_distance_sq(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Sum of absolute values of all off-diagonal entries (both triangles).
    pub fn offdiag_l1(&self) -> f64 {
        let p = self.dim;
        let mut total = 0.0;
        for j in 0..p {
            for k in (j + 1)..p {
                total += self.get(j, k).abs();
            }
        }
        2.0 * total
    }

    /// Number of nonzero off-diagonal entries, counting both triangles.
    pub fn nnz_offdiag(&self) -> usize {
        let p = self.dim;
        let mut count = 0;
        for j in 0..p {
            for k in (j + 1)..p {
                if self.get(j, k) != 0.0 {
                    count += 2;
                }
            }
        }
        count
    }

    pub fn max_abs_offdiag(&self) -> f64 {
        let p = self.dim;
        let mut best: f64 = 0.0;
        for j in 0..p {
            for k in (j + 1)..p {
                best = best.max(self.get(j, k).abs());
            }
        }
        best
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn spectral_norm(&self) -> Result<f64> {
        let values = eigvalsh(self)?;
        Ok(values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let values = eigvalsh(self)?;
        Ok(values.last().copied().unwrap_or(f64::INFINITY))
    }

    /// Lower Cholesky factor `L` (row-major, `A = L Lᵀ`).
    pub fn cholesky(&self) -> Result<Vec<f64>> {
        let p = self.dim;
        let mut l = vec![0.0; p * p];
        for j in 0..p {
            for k in 0..=j {
                let dot: f64 = (0..k).map(|m| l[j * p + m] * l[k * p + m]).sum();
                let v = self.get(j, k) - dot;
                if j == k {
                    if v <= 0.0 || !v.is_finite() {
                        return Err(CovError::NotPositiveDefinite { pivot: j, value: v });
                    }
                    l[j * p + j] = v.sqrt();
                } else {
                    l[j * p + k] = v / l[k * p + k];
                }
            }
        }
        Ok(l)
    }

    fn mirror_upper(&mut self) {
        let p = self.dim;
        for j in 0..p {
            for k in (j + 1)..p {
                self.data[k * p + j] = self.data[j * p + k];
            }
        }
    }

    pub(crate) fn from_raw(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SymMatrix({}x{}) [", self.dim, self.dim)?;
        for j in 0..self.dim {
            writeln!(f, "  {:?}", self.row(j))?;
        }
        write!(f, "]")
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;

    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        self.add_scaled(1.0, rhs)
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;

    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        self.add_scaled(-1.0, rhs)
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;

    fn mul(self, rhs: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * rhs).collect(),
        }
    }
}

/// Frobenius-norm projection of `z` onto `{X : X ⪰ eps·I}`:
/// `Σᵢ max(λᵢ, eps) vᵢvᵢᵀ`.
///
/// Only the eigenpairs on the smaller side of `eps` enter the rank update,
/// so the cost is `O(p² · min(m, p − m))` on top of the decomposition, `m`
/// being the number of clamped eigenvalues.
pub fn project_to_cone(z: &SymMatrix, eps: f64) -> Result<SymMatrix> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(invalid(format!("cone floor must be finite and >= 0, got {eps}")));
    }
    // Usually only a few eigenvalues sit below the floor; their vectors are
    // all the update needs.
    match eigh_below(z, eps, z.dim() / 4)? {
        LowerSpectrum::Partial { below, .. } => {
            if below.values.is_empty() {
                return Ok(z.clone());
            }
            let mut out = z.clone();
            for (i, &value) in below.values.iter().enumerate() {
                rank_one_update_upper(&mut out, below.vector(i), eps - value);
            }
            out.mirror_upper();
            Ok(out)
        }
        LowerSpectrum::Full(decomp) => Ok(project_with(z, &decomp, eps)),
    }
}

/// Projection given a precomputed decomposition of `z`.
pub fn project_with(z: &SymMatrix, decomp: &EigenDecomposition, eps: f64) -> SymMatrix {
    let p = z.dim();
    // values are descending: the clamped ones form a suffix.
    let keep = decomp.values.iter().take_while(|&&v| v >= eps).count();
    if keep == p {
        return z.clone();
    }
    let mut out;
    if p - keep <= keep {
        // z + Σ_{λᵢ<ε} (ε − λᵢ) vᵢvᵢᵀ
        out = z.clone();
        for i in keep..p {
            rank_one_update_upper(&mut out, decomp.vector(i), eps - decomp.values[i]);
        }
    } else {
        // εI + Σ_{λᵢ≥ε} (λᵢ − ε) vᵢvᵢᵀ
        out = &SymMatrix::identity(p) * eps;
        for i in 0..keep {
            rank_one_update_upper(&mut out, decomp.vector(i), decomp.values[i] - eps);
        }
    }
    out.mirror_upper();
    out
}

// Touches the upper triangle only; callers restore symmetry with
// `mirror_upper`.
fn rank_one_update_upper(m: &mut SymMatrix, v: &[f64], weight: f64) {
    let p = m.dim;
    for j in 0..p {
        let wj = weight * v[j];
        let row = &mut m.data[j * p + j..(j + 1) * p];
        for (r, &vk) in row.iter_mut().zip(&v[j..]) {
            *r += wj * vk;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: f64, b: f64, c: f64) -> SymMatrix {
        SymMatrix::from_rows(&[vec![a, b], vec![b, c]]).unwrap()
    }

    #[test]
    fn checked_constructor_symmetrizes_small_drift() {
        let m = SymMatrix::from_row_major(2, vec![1.0, 0.5 + 4e-9, 0.5, 1.0]).unwrap();
        assert_eq!(m.get(0, 1), m.get(1, 0));
        assert!((m.get(0, 1) - (0.5 + 2e-9)).abs() < 1e-15);
    }

    #[test]
    fn checked_constructor_rejects_asymmetry_and_nan() {
        assert!(matches!(
            SymMatrix::from_row_major(2, vec![1.0, 0.5, 0.4, 1.0]),
            Err(CovError::Asymmetric { .. })
        ));
        assert!(matches!(
            SymMatrix::from_row_major(2, vec![1.0, f64::NAN, f64::NAN, 1.0]),
            Err(CovError::NonFinite { row: 0, col: 1 })
        ));
        assert!(SymMatrix::from_row_major(2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(SymMatrix::zeros(4).frobenius_norm(), 0.0);
        assert!((SymMatrix::identity(3).frobenius_norm() - 3f64.sqrt()).abs() < 1e-15);
        assert!((m2(3.0, 4.0, 3.0).frobenius_norm() - 50f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn spectral_norm_examples() {
        assert!((SymMatrix::identity(5).spectral_norm().unwrap() - 1.0).abs() < 1e-14);
        let d = SymMatrix::from_diag(&[2.0, -3.0]);
        assert!((d.spectral_norm().unwrap() - 3.0).abs() < 1e-14);
        assert!((m2(1.0, 2.0, 1.0).spectral_norm().unwrap() - 3.0).abs() < 1e-13);
    }

    #[test]
    fn offdiag_l1_examples() {
        assert_eq!(SymMatrix::identity(3).offdiag_l1(), 0.0);
        assert_eq!(m2(1.0, 0.5, 1.0).offdiag_l1(), 1.0);
        assert_eq!(SymMatrix::zeros(2).offdiag_l1(), 0.0);
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert!((SymMatrix::identity(2).min_eigenvalue().unwrap() - 1.0).abs() < 1e-14);
        let d = SymMatrix::from_diag(&[5.0, -2.0, 0.0]);
        assert!((d.min_eigenvalue().unwrap() + 2.0).abs() < 1e-14);
        assert!((m2(1.0, 2.0, 1.0).min_eigenvalue().unwrap() + 1.0).abs() < 1e-13);
    }

    #[test]
    fn projection_examples() {
        let id = SymMatrix::identity(3);
        assert!(project_to_cone(&id, 1e-4).unwrap().max_abs_diff(&id) < 1e-14);

        let d = SymMatrix::from_diag(&[2.0, -1.0]);
        let pd = project_to_cone(&d, 0.0).unwrap();
        assert!(pd.max_abs_diff(&SymMatrix::from_diag(&[2.0, 0.0])) < 1e-14);

        let pz = project_to_cone(&m2(1.0, 2.0, 1.0), 0.0).unwrap();
        assert!(pz.max_abs_diff(&m2(1.5, 1.5, 1.5)) < 1e-13, "{pz:?}");
    }

    #[test]
    fn projection_rejects_negative_floor() {
        assert!(project_to_cone(&SymMatrix::identity(2), -1.0).is_err());
    }

    #[test]
    fn cholesky_factors_and_rejects() {
        let a = m2(4.0, 2.0, 3.0);
        let l = a.cholesky().unwrap();
        assert_eq!(l, vec![2.0, 0.0, 1.0, 2f64.sqrt()]);
        assert!(matches!(
            m2(1.0, 2.0, 1.0).cholesky(),
            Err(CovError::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn nnz_counts_both_triangles() {
        let a = SymMatrix::from_fn(3, |j, k| if j == 0 && k == 2 { 0.3 } else if j == k { 1.0 } else { 0.0 });
        assert_eq!(a.nnz_offdiag(), 2);
        assert_eq!(a.max_abs_offdiag(), 0.3);
    }
}
