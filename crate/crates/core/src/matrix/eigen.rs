//! Symmetric eigensolver: Householder reduction to tridiagonal form followed
//! by the implicit QL iteration with Wilkinson-style shifts (the EISPACK
//! `tred2`/`tql2` pair).
//!
//! Eigenvectors are accumulated as *rows* of a row-major buffer so every
//! Givens rotation and Householder application touches contiguous memory.

use serde::{Deserialize, Serialize};

use super::SymMatrix;
use crate::error::{CovError, Result};

const MAX_QL_SWEEPS: usize = 60;

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Row `i` holds the unit eigenvector for `values[i]`.
    vectors: Vec<f64>,
    dim: usize,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// `Σᵢ f(λᵢ) vᵢvᵢᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let p = self.dim;
        let mut out = vec![0.0; p * p];
        for (i, &value) in self.values.iter().enumerate() {
            let w = f(value);
            if w == 0.0 {
                continue;
            }
            let v = self.vector(i);
            for j in 0..p {
                let wj = w * v[j];
                for (o, &vk) in out[j * p + j..(j + 1) * p].iter_mut().zip(&v[j..]) {
                    *o += wj * vk;
                }
            }
        }
        for j in 0..p {
            for k in (j + 1)..p {
                out[k * p + j] = out[j * p + k];
            }
        }
        SymMatrix::from_raw(p, out)
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(|v| v)
    }

    /// `‖VᵀV − I‖_F`.
    pub fn orthonormality_error(&self) -> f64 {
        let p = self.dim;
        let mut acc = 0.0;
        for i in 0..p {
            for j in 0..p {
                let dot: f64 = self.vector(i).iter().zip(self.vector(j)).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                acc += (dot - target) * (dot - target);
            }
        }
        acc.sqrt()
    }
}

/// Full symmetric eigendecomposition. Deterministic for a given input.
pub fn eigh(a: &SymMatrix) -> Result<EigenDecomposition> {
    check_finite(a)?;
    let tri = tridiagonalize(a);
    full_from_tridiagonal(tri.d, tri.e, &tri.reflectors, a.dim())
}

fn full_from_tridiagonal(
    mut d: Vec<f64>,
    mut e: Vec<f64>,
    reflectors: &[Reflector],
    n: usize,
) -> Result<EigenDecomposition> {
    let mut qt = form_qt(reflectors, n);
    ql_implicit(&mut d, &mut e, Some(&mut qt), n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &i in &order {
        vectors.extend_from_slice(&qt[i * n..(i + 1) * n]);
    }
    Ok(EigenDecomposition { values, vectors, dim: n })
}

/// Eigenvalues only, descending.
pub fn eigvalsh(a: &SymMatrix) -> Result<Vec<f64>> {
    check_finite(a)?;
    let n = a.dim();
    let mut tri = tridiagonalize(a);
    ql_implicit(&mut tri.d, &mut tri.e, None, n)?;
    tri.d.sort_by(|x, y| y.total_cmp(x));
    Ok(tri.d)
}

/// Result of [`eigh_below`].
#[derive(Debug, Clone)]
pub enum LowerSpectrum {
    /// Eigenpairs with eigenvalue below the bound, descending like
    /// [`EigenDecomposition`]; `all_values` holds the whole spectrum.
    Partial {
        below: EigenDecomposition,
        all_values: Vec<f64>,
    },
    /// Too many eigenvalues fell below the bound (or inverse iteration
    /// did not settle), so the full decomposition was computed instead.
    Full(EigenDecomposition),
}

/// Eigenpairs of `a` with eigenvalue `< bound`.
///
/// All eigenvalues come from the implicit QL iteration without vectors;
/// the vectors of the (at most `max_count`) selected ones are obtained by
/// inverse iteration on the tridiagonal form, orthogonalized within
/// clusters, and transformed back. Otherwise falls back to [`eigh`].
pub fn eigh_below(a: &SymMatrix, bound: f64, max_count: usize) -> Result<LowerSpectrum> {
    check_finite(a)?;
    let n = a.dim();
    let tri = tridiagonalize(a);
    let mut values = tri.d.clone();
    let mut off = tri.e.clone();
    ql_implicit(&mut values, &mut off, None, n)?;
    values.sort_by(|x, y| y.total_cmp(x));

    let count = values.iter().filter(|&&v| v < bound).count();
    if count <= max_count {
        let shifts: Vec<f64> = values[n - count..].iter().rev().copied().collect();
        if let Some(tri_vectors) = inverse_iteration(&tri.d, &tri.e, &shifts) {
            // ascending → descending
            let mut vectors = Vec::with_capacity(count * n);
            for y in tri_vectors.into_iter().rev() {
                vectors.extend(back_transform(&tri.reflectors, y));
            }
            let below = EigenDecomposition {
                values: values[n - count..].to_vec(),
                vectors,
                dim: n,
            };
            return Ok(LowerSpectrum::Partial { below, all_values: values });
        }
    }
    full_from_tridiagonal(tri.d, tri.e, &tri.reflectors, n).map(LowerSpectrum::Full)
}

fn check_finite(a: &SymMatrix) -> Result<()> {
    let n = a.dim();
    match a.as_slice().iter().position(|v| !v.is_finite()) {
        Some(pos) => Err(CovError::NonFinite {
            row: pos / n,
            col: pos % n,
        }),
        None => Ok(()),
    }
}

/// Householder reflector `I − β v vᵀ` acting on trailing coordinates
/// `k+1..n`; `β = 0` marks an identity step.
struct Reflector {
    v: Vec<f64>,
    beta: f64,
}

struct Tridiagonal {
    d: Vec<f64>,
    /// `e[i] = T[i+1][i]`; `e[n-1] = 0`.
    e: Vec<f64>,
    /// `A = Q T Qᵀ` with `Q = H_0 H_1 ⋯ H_{n-3}`.
    reflectors: Vec<Reflector>,
}

/// Dot product with four independent partial sums.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn tridiagonalize(a: &SymMatrix) -> Tridiagonal {
    let n = a.dim();
    let mut w = a.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut work = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let off = k + 1;
        d[k] = w[k * n + k];
        let mut v = w[k * n + off..(k + 1) * n].to_vec();
        let scale = v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        if scale == 0.0 {
            e[k] = 0.0;
            reflectors.push(Reflector { v, beta: 0.0 });
            continue;
        }
        // The reflector is invariant under scaling of v; working with v/scale
        // keeps vᵀv away from underflow for tiny sub-columns.
        v.iter_mut().for_each(|x| *x /= scale);
        let norm = dot(&v, &v).sqrt();
        let alpha = if v[0] > 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let beta = 2.0 / dot(&v, &v);

        // p = β A₂₂ v, then w = p − (β pᵀv / 2) v, then A₂₂ −= v wᵀ + w vᵀ.
        // Only the upper triangle of A₂₂ is read and updated.
        let p = &mut work[..m];
        p.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..m {
            let len = m - i;
            let row = &w[(off + i) * n + off + i..][..len];
            let vs = &v[i..];
            p[i] += dot(row, vs);
            let vi = v[i];
            let ps = &mut p[i..];
            for j in 1..len {
                ps[j] += row[j] * vi;
            }
        }
        p.iter_mut().for_each(|x| *x *= beta);
        let c = 0.5 * beta * dot(p, &v);
        for (pi, vi) in p.iter_mut().zip(&v) {
            *pi -= c * vi;
        }
        for i in 0..m {
            let len = m - i;
            let (vi, pi) = (v[i], p[i]);
            let row = &mut w[(off + i) * n + off + i..][..len];
            let vs = &v[i..][..len];
            let ps = &p[i..][..len];
            for j in 0..len {
                row[j] -= vi * ps[j] + pi * vs[j];
            }
        }
        e[k] = alpha * scale;
        reflectors.push(Reflector { v, beta });
    }
    match n {
        0 => {}
        1 => d[0] = w[0],
        _ => {
            d[n - 2] = w[(n - 2) * n + n - 2];
            d[n - 1] = w[(n - 1) * n + n - 1];
            e[n - 2] = w[(n - 2) * n + n - 1];
        }
    }
    Tridiagonal { d, e, reflectors }
}

/// `Qᵀ` row-major, built as `((I·H_{n-3})·H_{n-4})⋯H_0`. Before `H_k` is
/// applied only rows/cols `≥ k+1` differ from the identity.
fn form_qt(reflectors: &[Reflector], n: usize) -> Vec<f64> {
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    for (k, h) in reflectors.iter().enumerate().rev() {
        if h.beta == 0.0 {
            continue;
        }
        let off = k + 1;
        for i in off..n {
            let row = &mut q[i * n + off..(i + 1) * n];
            let s = h.beta * dot(row, &h.v);
            for (r, &vj) in row.iter_mut().zip(&h.v) {
                *r -= s * vj;
            }
        }
    }
    q
}

/// `Q y = H_0 (H_1 (⋯ H_{n-3} y))`.
fn back_transform(reflectors: &[Reflector], mut y: Vec<f64>) -> Vec<f64> {
    for (k, h) in reflectors.iter().enumerate().rev() {
        if h.beta == 0.0 {
            continue;
        }
        let tail = &mut y[k + 1..];
        let s = h.beta * dot(tail, &h.v);
        for (t, &vj) in tail.iter_mut().zip(&h.v) {
            *t -= s * vj;
        }
    }
    y
}

/// LU factorization with partial pivoting of `T − σI` for tridiagonal `T`
/// (the `dgttrf` layout): `L` has unit diagonal and multipliers `low`,
/// `U` has diagonal `diag` and superdiagonals `up1`, `up2`.
struct ShiftedLu {
    diag: Vec<f64>,
    up1: Vec<f64>,
    up2: Vec<f64>,
    low: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn new(d: &[f64], e: &[f64], shift: f64, tiny: f64) -> Self {
        let n = d.len();
        let mut diag: Vec<f64> = d.iter().map(|x| x - shift).collect();
        let mut up1: Vec<f64> = e[..n.saturating_sub(1)].to_vec();
        let mut sub: Vec<f64> = up1.clone();
        let mut up2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if diag[i].abs() >= sub[i].abs() {
                if diag[i] == 0.0 {
                    diag[i] = tiny;
                }
                let l = sub[i] / diag[i];
                sub[i] = l;
                diag[i + 1] -= l * up1[i];
            } else {
                let l = diag[i] / sub[i];
                diag[i] = sub[i];
                sub[i] = l;
                let t = up1[i];
                up1[i] = diag[i + 1];
                diag[i + 1] = t - l * diag[i + 1];
                if i + 2 < n {
                    up2[i] = up1[i + 1];
                    up1[i + 1] *= -l;
                }
                swapped[i] = true;
            }
        }
        if n > 0 && diag[n - 1] == 0.0 {
            diag[n - 1] = tiny;
        }
        Self { diag, up1, up2, low: sub, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
                b[i + 1] -= self.low[i] * b[i];
            } else {
                b[i + 1] -= self.low[i] * b[i];
            }
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            if i + 1 < n {
                v -= self.up1[i] * b[i + 1];
            }
            if i + 2 < n {
                v -= self.up2[i] * b[i + 2];
            }
            b[i] = v / self.diag[i];
        }
    }
}

const INVERSE_ITERATION_STEPS: usize = 6;

/// Unit eigenvectors of the tridiagonal `(d, e)` for the ascending
/// eigenvalue approximations `shifts`. Vectors whose eigenvalues lie
/// within `1e-3‖T‖` of each other are orthogonalized against one
/// another. Returns `None` if a residual stays above the acceptance level.
fn inverse_iteration(d: &[f64], e: &[f64], shifts: &[f64]) -> Option<Vec<Vec<f64>>> {
    let n = d.len();
    let eps = f64::EPSILON;
    // Work with T/‖T‖∞ so the pivot floor and growth stay representable.
    let norm = (0..n)
        .map(|i| d[i].abs() + e[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 })
        .fold(0.0, f64::max);
    let norm = if norm > 0.0 { norm } else { 1.0 };
    let d: Vec<f64> = d.iter().map(|v| v / norm).collect();
    let e: Vec<f64> = e.iter().map(|v| v / norm).collect();
    let shifts: Vec<f64> = shifts.iter().map(|v| v / norm).collect();
    let (d, e, norm) = (&d[..], &e[..], 1.0);
    let cluster_gap = 1e-3 * norm;
    let separation = 10.0 * eps * norm;
    let accept = 1e3 * (n as f64).sqrt() * eps * norm;
    let tiny = eps * norm;

    let mut out: Vec<Vec<f64>> = Vec::with_capacity(shifts.len());
    let mut cluster_start = 0;
    let mut prev_shift = f64::NEG_INFINITY;
    for (j, &lambda) in shifts.iter().enumerate() {
        if j > 0 && lambda - shifts[j - 1] > cluster_gap {
            cluster_start = j;
        }
        // Coincident shifts would produce the same vector; separate them.
        let shift = if lambda - prev_shift < separation { prev_shift + separation } else { lambda };
        prev_shift = shift;
        let lu = ShiftedLu::new(d, e, shift, tiny);

        let mut state = 0x9E37_79B9_7F4A_7C15_u64 ^ (j as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
        let mut x: Vec<f64> = (0..n)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        normalize(&mut x);

        let mut residual = f64::INFINITY;
        for _ in 0..INVERSE_ITERATION_STEPS {
            let mut y = x.clone();
            lu.solve(&mut y);
            for _ in 0..2 {
                for prev in &out[cluster_start..j] {
                    let c = dot(&y, prev);
                    y.iter_mut().zip(prev).for_each(|(yi, pi)| *yi -= c * pi);
                }
            }
            let growth = normalize(&mut y);
            if !(growth.is_finite() && growth > 0.0) {
                return None;
            }
            x = y;
            let was_converged = residual <= accept;
            residual = tridiagonal_residual(d, e, lambda, &x);
            if was_converged && residual <= accept {
                break;
            }
        }
        if residual > accept {
            return None;
        }
        out.push(x);
    }
    Some(out)
}

/// `√(a² + b²)`, falling back to `hypot` when the squares leave the
/// normal range.
#[inline]
fn pythag(a: f64, b: f64) -> f64 {
    let s = a * a + b * b;
    if s.is_finite() && s > 1e-290 {
        s.sqrt()
    } else {
        a.hypot(b)
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let nrm = dot(x, x).sqrt();
    if nrm > 0.0 && nrm.is_finite() {
        x.iter_mut().for_each(|v| *v /= nrm);
    }
    nrm
}

/// `‖T x − λ x‖₂`.
fn tridiagonal_residual(d: &[f64], e: &[f64], lambda: f64, x: &[f64]) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut r = (d[i] - lambda) * x[i];
        if i > 0 {
            r += e[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            r += e[i] * x[i + 1];
        }
        acc += r * r;
    }
    acc.sqrt()
}

/// Implicit QL on the tridiagonal `(d, e)`; on return `d` holds the
/// eigenvalues (unsorted) and row `i` of `qt` the eigenvector for `d[i]`.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut qt: Option<&mut Vec<f64>>, n: usize) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(CovError::EigenFailure { index: l });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = pythag(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = pythag(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    if let Some(q) = qt.as_deref_mut() {
                        let (head, tail) = q.split_at_mut((i + 1) * n);
                        let row_i = &mut head[i * n..];
                        let row_next = &mut tail[..n];
                        for (a, b) in row_i.iter_mut().zip(row_next.iter_mut()) {
                            let t = *b;
                            *b = s * *a + c * t;
                            *a = c * *a - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(p: usize, seed: u64) -> SymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SymMatrix::from_fn(p, |_, _| rng.random_range(-1.0..1.0))
    }

    fn check_invariants(a: &SymMatrix, dec: &EigenDecomposition) {
        let p = a.dim() as f64;
        let recon = a.frobenius_distance(&dec.reconstruct());
        assert!(recon <= 1e-10 * a.frobenius_norm().max(1.0), "reconstruction {recon:e}");
        let orth = dec.orthonormality_error();
        assert!(orth <= 1e-10 * p, "orthonormality {orth:e}");
        assert!(dec.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let a = SymMatrix::identity(3);
        let dec = eigh(&a).unwrap();
        assert_eq!(dec.values, vec![1.0, 1.0, 1.0]);
        check_invariants(&a, &dec);
    }

    #[test]
    fn diagonal_is_axis_aligned() {
        let a = SymMatrix::from_diag(&[2.0, -1.0]);
        let dec = eigh(&a).unwrap();
        assert_eq!(dec.values, vec![2.0, -1.0]);
        assert!((dec.vector(0)[0].abs() - 1.0).abs() < 1e-15);
        assert!((dec.vector(1)[1].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_hand_example() {
        // [[1,2],[2,1]]: eigenvalues 3, −1 with (1,1)/√2 and (1,−1)/√2.
        let a = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let dec = eigh(&a).unwrap();
        assert!((dec.values[0] - 3.0).abs() < 1e-14);
        assert!((dec.values[1] + 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = dec.vector(0);
        let v1 = dec.vector(1);
        assert!((v0[0].abs() - h).abs() < 1e-14 && (v0[0] - v0[1]).abs() < 1e-14);
        assert!((v1[0].abs() - h).abs() < 1e-14 && (v1[0] + v1[1]).abs() < 1e-14);
    }

    #[test]
    fn empty_and_scalar() {
        assert!(eigh(&SymMatrix::zeros(0)).unwrap().values.is_empty());
        assert_eq!(eigh(&SymMatrix::from_diag(&[-4.5])).unwrap().values, vec![-4.5]);
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = SymMatrix::identity(3);
        a.set(0, 2, f64::INFINITY);
        assert!(matches!(eigh(&a), Err(CovError::NonFinite { .. })));
        assert!(eigvalsh(&a).is_err());
    }

    #[test]
    fn random_matrices_up_to_200() {
        for (i, &p) in [1usize, 2, 3, 7, 25, 64, 120, 200].iter().enumerate() {
            let a = random_sym(p, 100 + i as u64);
            let dec = eigh(&a).unwrap();
            check_invariants(&a, &dec);
            let vals = eigvalsh(&a).unwrap();
            for (x, y) in vals.iter().zip(&dec.values) {
                assert!((x - y).abs() < 1e-10 * a.frobenius_norm().max(1.0));
            }
        }
    }

    #[test]
    fn rank_deficient_clustered_spectrum() {
        // Sample-covariance-like: rank 3 in dimension 30 gives a 27-fold zero.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = 30;
        let rows: Vec<Vec<f64>> = (0..3).map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let a = SymMatrix::from_fn(p, |j, k| rows.iter().map(|r| r[j] * r[k]).sum());
        let dec = eigh(&a).unwrap();
        check_invariants(&a, &dec);
        assert!(dec.values[3..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn deterministic() {
        let a = random_sym(40, 5);
        let x = eigh(&a).unwrap();
        let y = eigh(&a).unwrap();
        assert_eq!(x.values, y.values);
        assert_eq!(x.vectors, y.vectors);
    }

    #[test]
    fn structured_matrix_with_vanishing_subcolumns() {
        // Off-block-diagonal pattern: Householder sub-columns shrink to
        // ~1e-150 during the reduction.
        let blk = |i: usize| i / 20;
        let a = SymMatrix::from_fn(40, |j, k| {
            let linked = (j == 19 && k >= 20) || (k == 19 && j >= 20);
            if blk(j) == blk(k) || linked { 0.0 } else { 0.4 }
        });
        let dec = eigh(&a).unwrap();
        check_invariants(&a, &dec);
        assert_eq!(eigvalsh(&a).unwrap().len(), 40);
    }

    fn partial_matches_full(a: &SymMatrix, bound: f64) {
        let full = eigh(a).unwrap();
        let n = a.dim();
        let count = full.values.iter().filter(|&&v| v < bound).count();
        match eigh_below(a, bound, n).unwrap() {
            LowerSpectrum::Partial { below, all_values } => {
                assert_eq!(below.values.len(), count);
                for (x, y) in all_values.iter().zip(&full.values) {
                    assert!((x - y).abs() < 1e-12 * a.frobenius_norm().max(1.0));
                }
                let scale = a.frobenius_norm().max(1.0);
                for i in 0..count {
                    let v = below.vector(i);
                    let av: Vec<f64> = (0..n).map(|r| dot(a.row(r), v)).collect();
                    let res: f64 = av.iter().zip(v).map(|(x, y)| (x - below.values[i] * y).powi(2)).sum::<f64>().sqrt();
                    assert!(res < 1e-10 * scale, "residual {res}");
                    for j in 0..count {
                        let target = if i == j { 1.0 } else { 0.0 };
                        assert!((dot(v, below.vector(j)) - target).abs() < 1e-10);
                    }
                }
            }
            LowerSpectrum::Full(_) => panic!("unexpected fallback"),
        }
    }

    #[test]
    fn partial_spectrum_on_random_matrices() {
        for (p, seed) in [(1, 1), (2, 2), (5, 3), (30, 4), (100, 5)] {
            let a = random_sym(p, seed);
            let mut values = eigvalsh(&a).unwrap();
            values.reverse();
            let bound = values[p / 3] + 1e-9;
            partial_matches_full(&a, bound);
            partial_matches_full(&a, f64::NEG_INFINITY);
        }
    }

    #[test]
    fn partial_spectrum_on_degenerate_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = 40;
        let rows: Vec<Vec<f64>> = (0..5).map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        // 35-fold eigenvalue at -0.5
        let a = SymMatrix::from_fn(p, |j, k| {
            rows.iter().map(|r| r[j] * r[k]).sum::<f64>() - if j == k { 0.5 } else { 0.0 }
        });
        partial_matches_full(&a, 0.0);
        partial_matches_full(&SymMatrix::identity(6), 2.0);
        partial_matches_full(&SymMatrix::zeros(6), 1.0);
    }

    #[test]
    fn partial_spectrum_falls_back_when_many_selected() {
        let a = random_sym(20, 8);
        match eigh_below(&a, f64::INFINITY, 5).unwrap() {
            LowerSpectrum::Full(dec) => check_invariants(&a, &dec),
            LowerSpectrum::Partial { .. } => panic!("expected the full decomposition"),
        }
    }
}
