//! Small dense linear algebra: square matrices, symmetric eigendecomposition by
//! cyclic Jacobi rotations, and the generalized symmetric-definite eigenproblem.
//!
//! Everything here works on tiny matrices (the state dimension of an ODE), so the
//! storage is a plain row-major `Vec<f64>` and no effort is spent on blocking.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const JACOBI_REL_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;
const PD_REL_TOL: f64 = 1e-12;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    n: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from rows; every row must have the same length as the row count.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { n, data })
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.n.max(1))
            .map(|r| r.to_vec())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Self {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `selfᵀ · x`
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                out[j] += self.data[i * n + j] * x[i];
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Mat) -> Self {
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Self {
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Mat) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Option<Mat> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
                .unwrap();
            if a[(piv, col)].abs() <= 1e-14 * scale {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                    inv.data.swap(piv * n + j, col * n + j);
                }
            }
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= d;
                inv[(col, j)] /= d;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = a[(i, col)];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a.data[i * n + j] -= f * a.data[col * n + j];
                    inv.data[i * n + j] -= f * inv.data[col * n + j];
                }
            }
        }
        Some(inv)
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Real symmetric matrix. Symmetrized as `(A + Aᵀ)/2` on construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix(Mat);

impl SymMatrix {
    pub fn new(m: Mat) -> Self {
        let n = m.dim();
        let mut s = m;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (s[(i, j)] + s[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        Self(s)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Ok(Self::new(Mat::from_rows(rows)?))
    }

    pub fn zeros(n: usize) -> Self {
        Self(Mat::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        Self(Mat::identity(n))
    }

    pub fn diag(d: &[f64]) -> Self {
        Self(Mat::diag(d))
    }

    /// Symmetric matrix with ones at `(i, j)` and `(j, i)`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Mat::zeros(n);
        m[(i, j)] = 1.0;
        m[(j, i)] = 1.0;
        Self(m)
    }

    /// Rebuilds a matrix from its upper triangle listed row by row.
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        if upper.len() != n * (n + 1) / 2 {
            return Err(Error::DimensionMismatch {
                expected: n * (n + 1) / 2,
                got: upper.len(),
            });
        }
        let mut m = Mat::zeros(n);
        let mut it = upper.iter();
        for i in 0..n {
            for j in i..n {
                let v = *it.next().unwrap();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(Self(m))
    }

    /// Upper triangle, row by row.
    pub fn upper(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.scaled(s))
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        Self(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &SymMatrix) -> Self {
        Self(self.0.sub(&other.0))
    }

    pub fn axpy(&mut self, s: f64, other: &SymMatrix) {
        self.0.axpy(s, &other.0);
    }

    pub fn add_diag(&mut self, s: f64) {
        for i in 0..self.dim() {
            self.0[(i, i)] += s;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    /// `xᵀ A x`
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let ax = self.0.mul_vec(x);
        ax.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `Mᵀ A M`
    pub fn congruence(&self, m: &Mat) -> SymMatrix {
        SymMatrix::new(m.transpose().matmul(&self.0).matmul(m))
    }

    /// `A J + Jᵀ A` for a general `J`.
    pub fn lyapunov_sum(&self, j: &Mat) -> SymMatrix {
        let aj = self.0.matmul(j);
        SymMatrix::new(aj.add(&aj.transpose()))
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(s: SymMatrix) -> Self {
        s.0.rows()
    }
}

/// Eigenvalues (descending) and matching orthonormal eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl SymEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.vectors.dim())
            .map(|i| self.vectors[(i, k)])
            .collect()
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn sym_eig(a: &SymMatrix) -> Result<SymEigen> {
    let n = a.dim();
    let mut m = a.as_mat().clone();
    let mut v = Mat::identity(n);
    let norm = m.frobenius();
    let target = JACOBI_REL_TOL * norm;

    let mut converged = n <= 1 || norm == 0.0;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let mut off = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += m[(p, q)] * m[(p, q)];
                }
            }
        }
        if off.sqrt() <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Mat::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, col)] = v[(r, src)];
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Eigenvalues only, descending.
pub fn sym_eigvals(a: &SymMatrix) -> Result<Vec<f64>> {
    Ok(sym_eig(a)?.values)
}

/// Largest eigenvalue of `A`; `A ⪯ 0` iff the result is `≤ 0`.
pub fn psd_slack(a: &SymMatrix) -> f64 {
    match sym_eig(a) {
        Ok(e) => e.values.first().copied().unwrap_or(0.0),
        Err(_) => f64::INFINITY,
    }
}

/// Matrix scale used for relative tolerances: `max(1, ‖A‖_max)`.
pub fn matrix_scale(a: &SymMatrix) -> f64 {
    a.max_abs().max(1.0)
}

/// Precomputed `B^{-1/2}` for repeated generalized eigenproblems with a fixed `B ≻ 0`.
#[derive(Clone, Debug)]
pub struct PdPencil {
    b: SymMatrix,
    inv_sqrt: Mat,
    min_eig: f64,
    max_eig: f64,
}

impl PdPencil {
    pub fn new(b: &SymMatrix) -> Result<Self> {
        let e = sym_eig(b)?;
        let n = b.dim();
        let max_eig = e.values[0];
        let min_eig = e.values[n - 1];
        if !(min_eig > PD_REL_TOL * b.max_abs().max(f64::MIN_POSITIVE)) {
            return Err(Error::NotPositiveDefinite { min_eig });
        }
        let mut inv_sqrt = Mat::zeros(n);
        for k in 0..n {
            let w = 1.0 / e.values[k].sqrt();
            for i in 0..n {
                for j in 0..n {
                    inv_sqrt[(i, j)] += w * e.vectors[(i, k)] * e.vectors[(j, k)];
                }
            }
        }
        Ok(Self {
            b: b.clone(),
            inv_sqrt,
            min_eig,
            max_eig,
        })
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.b
    }

    pub fn min_eig(&self) -> f64 {
        self.min_eig
    }

    pub fn max_eig(&self) -> f64 {
        self.max_eig
    }

    /// `B^{-1/2} A B^{-1/2}`
    pub fn whiten(&self, a: &SymMatrix) -> SymMatrix {
        a.congruence(&self.inv_sqrt)
    }

    /// Generalized eigenvalues of `(A, B)`, descending.
    pub fn eigvals(&self, a: &SymMatrix) -> Result<Vec<f64>> {
        sym_eigvals(&self.whiten(a))
    }

    /// Generalized eigenpairs; the eigenvectors are `B`-orthonormal.
    pub fn eig(&self, a: &SymMatrix) -> Result<SymEigen> {
        let e = sym_eig(&self.whiten(a))?;
        Ok(SymEigen {
            values: e.values,
            vectors: self.inv_sqrt.matmul(&e.vectors),
        })
    }

    pub fn lambda_max(&self, a: &SymMatrix) -> Result<f64> {
        Ok(self.eigvals(a)?[0])
    }
}

/// Generalized eigenvalues of the pair `(A, B)` with `B ≻ 0`, descending.
pub fn gen_eig(a: &SymMatrix, b: &SymMatrix) -> Result<Vec<f64>> {
    check_dims(a, b)?;
    PdPencil::new(b)?.eigvals(a)
}

/// Largest generalized eigenvalue: the least `μ` with `A − μB ⪯ 0`.
pub fn lambda_max_gen(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    Ok(gen_eig(a, b)?[0])
}

/// Number of generalized eigenvalues strictly above `tol`.
pub fn count_positive_gen_eigs(a: &SymMatrix, b: &SymMatrix, tol: f64) -> Result<usize> {
    Ok(gen_eig(a, b)?.into_iter().filter(|&l| l > tol).count())
}

/// Principal square root of a positive definite matrix.
pub fn sqrt_pd(b: &SymMatrix) -> Result<SymMatrix> {
    let e = sym_eig(b)?;
    let n = b.dim();
    let min_eig = e.values[n - 1];
    if !(min_eig > PD_REL_TOL * b.max_abs().max(f64::MIN_POSITIVE)) {
        return Err(Error::NotPositiveDefinite { min_eig });
    }
    let mut out = Mat::zeros(n);
    for k in 0..n {
        let w = e.values[k].sqrt();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += w * e.vectors[(i, k)] * e.vectors[(j, k)];
            }
        }
    }
    Ok(SymMatrix::new(out))
}

/// Spectral condition number `λ_max(P) / λ_min(P)`.
pub fn cond2(p: &SymMatrix) -> Result<f64> {
    let pencil = PdPencil::new(p)?;
    Ok(pencil.max_eig() / pencil.min_eig())
}

fn check_dims(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            got: a.dim(),
        });
    }
    Ok(())
}

/// Singular values in descending order by one-sided Jacobi rotations, accurate
/// relative to each singular value.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    let n = a.dim();
    let mut u = a.clone();
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    alpha += u[(i, p)] * u[(i, p)];
                    beta += u[(i, q)] * u[(i, q)];
                    gamma += u[(i, p)] * u[(i, q)];
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| u[(i, j)] * u[(i, j)]).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = rng.gen_range(-5.0..5.0);
            }
        }
        SymMatrix::new(m)
    }

    fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = rng.gen_range(-1.0..1.0);
            }
        }
        let mut b = SymMatrix::new(m.transpose().matmul(&m));
        b.add_diag(0.5);
        b
    }

    #[test]
    fn identity_eigenvalues() {
        let e = sym_eig(&SymMatrix::identity(4)).unwrap();
        assert!(e.values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn diagonal_sorted_descending() {
        let v = sym_eigvals(&SymMatrix::diag(&[1.0, 3.0, -2.0])).unwrap();
        assert_eq!(v, vec![3.0, 1.0, -2.0]);
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a = random_sym(&mut rng, 5);
            let e = sym_eig(&a).unwrap();
            let mut rec = Mat::zeros(5);
            for k in 0..5 {
                for i in 0..5 {
                    for j in 0..5 {
                        rec[(i, j)] += e.values[k] * e.vectors[(i, k)] * e.vectors[(j, k)];
                    }
                }
            }
            assert!(rec.sub(a.as_mat()).max_abs() < 1e-10 * a.max_abs());
            let vtv = e.vectors.transpose().matmul(&e.vectors);
            assert!(vtv.sub(&Mat::identity(5)).max_abs() < 1e-10);
            for k in 0..5 {
                let vk = e.vector(k);
                let av = a.as_mat().mul_vec(&vk);
                for i in 0..5 {
                    assert!((av[i] - e.values[k] * vk[i]).abs() < 1e-10 * a.max_abs());
                }
            }
        }
    }

    #[test]
    fn gen_eig_hand_solved_pair() {
        // (4 − 2λ)(−2 − λ) = 0
        let a = SymMatrix::diag(&[4.0, -2.0]);
        let b = SymMatrix::diag(&[2.0, 1.0]);
        let l = gen_eig(&a, &b).unwrap();
        assert!((l[0] - 2.0).abs() < 1e-14 && (l[1] + 2.0).abs() < 1e-14);
        assert_eq!(count_positive_gen_eigs(&a, &b, 0.0).unwrap(), 1);
        assert!((lambda_max_gen(&a, &b).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gen_eig_with_identity_matches_sym_eig() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a = random_sym(&mut rng, 3);
            let g = gen_eig(&a, &SymMatrix::identity(3)).unwrap();
            let s = sym_eigvals(&a).unwrap();
            for (x, y) in g.iter().zip(&s) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gen_eigvectors_are_b_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = random_sym(&mut rng, 4);
            let b = random_pd(&mut rng, 4);
            let e = PdPencil::new(&b).unwrap().eig(&a).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    let xi = e.vector(i);
                    let xj = e.vector(j);
                    let bxj = b.as_mat().mul_vec(&xj);
                    let ip: f64 = xi.iter().zip(&bxj).map(|(p, q)| p * q).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - expect).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn lambda_max_is_tight() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = random_sym(&mut rng, 3);
            let b = random_pd(&mut rng, 3);
            let lm = lambda_max_gen(&a, &b).unwrap();
            let scale = matrix_scale(&a).max(matrix_scale(&b));
            let mut at = a.clone();
            at.axpy(-lm, &b);
            assert!(psd_slack(&at) <= 1e-9 * scale);
            let mut below = a.clone();
            below.axpy(-(lm - 1e-6 * scale), &b);
            assert!(psd_slack(&below) > 0.0);
        }
    }

    #[test]
    fn count_positive_trivial_cases() {
        let i3 = SymMatrix::identity(3);
        assert_eq!(
            count_positive_gen_eigs(&i3.scaled(-1.0), &i3, 0.0).unwrap(),
            0
        );
        assert_eq!(count_positive_gen_eigs(&i3, &i3, 0.0).unwrap(), 3);
    }

    #[test]
    fn sqrt_examples() {
        let r = sqrt_pd(&SymMatrix::identity(3)).unwrap();
        assert!(r.sub(&SymMatrix::identity(3)).max_abs() < 1e-15);
        let r = sqrt_pd(&SymMatrix::diag(&[4.0, 9.0])).unwrap();
        assert!(r.sub(&SymMatrix::diag(&[2.0, 3.0])).max_abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let b = random_pd(&mut rng, 4);
            let r = sqrt_pd(&b).unwrap();
            let sq = r.as_mat().matmul(r.as_mat());
            assert!(sq.sub(b.as_mat()).max_abs() < 1e-10 * b.max_abs());
            assert!(sym_eigvals(&r).unwrap()[3] > 0.0);
        }
        assert!(matches!(
            sqrt_pd(&SymMatrix::diag(&[1.0, -1.0])),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn cond2_examples() {
        assert!((cond2(&SymMatrix::identity(3)).unwrap() - 1.0).abs() < 1e-15);
        assert!((cond2(&SymMatrix::diag(&[10.0, 1.0])).unwrap() - 10.0).abs() < 1e-13);
        assert!(cond2(&SymMatrix::diag(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn psd_slack_examples() {
        assert_eq!(psd_slack(&SymMatrix::zeros(3)), 0.0);
        assert_eq!(psd_slack(&SymMatrix::identity(3).scaled(-1.0)), -1.0);
        assert_eq!(psd_slack(&SymMatrix::diag(&[2.0, -5.0])), 2.0);
    }

    #[test]
    fn not_pd_pencil_rejected() {
        let a = SymMatrix::identity(2);
        assert!(gen_eig(&a, &SymMatrix::diag(&[1.0, -1.0])).is_err());
        assert!(gen_eig(&a, &SymMatrix::identity(3)).is_err());
    }

    #[test]
    fn upper_roundtrip() {
        let p = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 5.0]]).unwrap();
        assert_eq!(p.upper(), vec![1.0, 2.0, 5.0]);
        assert_eq!(SymMatrix::from_upper(2, &p.upper()).unwrap(), p);
    }

    #[test]
    fn inverse_of_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let b = random_pd(&mut rng, 4);
        let inv = b.as_mat().inverse().unwrap();
        assert!(inv.matmul(b.as_mat()).sub(&Mat::identity(4)).max_abs() < 1e-10);
        assert!(Mat::zeros(2).inverse().is_none());
    }

    #[test]
    fn singular_values_match_gram_eigenvalues() {
        let a = Mat::from_rows(&[
            vec![3.0, 1.0, 0.0],
            vec![-1.0, 2.0, 4.0],
            vec![0.5, 0.0, 1.0],
        ])
        .unwrap();
        let sv = singular_values(&a);
        let gram = SymMatrix::new(a.transpose().matmul(&a));
        for (s, l) in sv.iter().zip(sym_eigvals(&gram).unwrap()) {
            assert!((s * s - l).abs() < 1e-12 * l.abs().max(1.0));
        }
        let d = singular_values(&Mat::diag(&[1e-12, 1e12, -3.0]));
        assert_eq!(d.len(), 3);
        assert!(
            (d[0] - 1e12).abs() < 1e-3
                && (d[1] - 3.0).abs() < 1e-15
                && (d[2] - 1e-12).abs() < 1e-27
        );
    }
}
