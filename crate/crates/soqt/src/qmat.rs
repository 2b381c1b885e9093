//! Minimal dense complex matrix core for 2x2 and 4x4 operators.
//!
//! Basis ordering is fixed globally as |00>, |01>, |10>, |11> with |0> the
//! +1/2 eigenstate of S_z; every module in this crate assumes it.

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Tolerance for exact algebraic identities (products, traces, kron).
pub const TOL_ALGEBRAIC: f64 = 1e-12;
/// Tolerance for spectral computations (eigensystems, matrix exponentials).
pub const TOL_SPECTRAL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum QmatError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("not a density matrix: {0}")]
    InvalidDensity(String),
}

/// Dense row-major complex matrix of dimension 2 or 4.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    dim: usize,
    entries: Vec<C64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "CMat supports dim 2 or 4, got {dim}");
        CMat {
            dim,
            entries: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMat::zeros(dim);
        for i in 0..dim {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(dim: usize, rows: &[&[C64]]) -> Self {
        assert_eq!(rows.len(), dim);
        let mut m = CMat::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim);
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMat::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Diagonal matrix from complex entries.
    pub fn diag(entries: &[C64]) -> Self {
        let mut m = CMat::zeros(entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        CMat::from_fn(self.dim, |i, j| self.get(i, j) + other.get(i, j))
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        CMat::from_fn(self.dim, |i, j| self.get(i, j) - other.get(i, j))
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat::from_fn(self.dim, |i, j| s * self.get(i, j))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    /// Elementwise complex conjugate (no transpose).
    pub fn conj(&self) -> CMat {
        CMat::from_fn(self.dim, |i, j| self.get(i, j).conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Apply as a unitary conjugation: U rho U^dagger.
    pub fn conjugate(&self, rho: &CMat) -> CMat {
        self.mul(rho).mul(&self.adjoint())
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.mul(&self.adjoint())
            .max_abs_diff(&CMat::identity(self.dim))
            <= tol
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> C64 {
        let n = self.dim;
        let mut a = self.entries.clone();
        let mut det = C64::new(1.0, 0.0);
        for col in 0..n {
            let (mut piv, mut best) = (col, a[col * n + col].norm());
            for r in col + 1..n {
                let v = a[r * n + col].norm();
                if v > best {
                    piv = r;
                    best = v;
                }
            }
            if best == 0.0 {
                return C64::new(0.0, 0.0);
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                det = -det;
            }
            let d = a[col * n + col];
            det *= d;
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                for j in col..n {
                    let v = a[col * n + j];
                    a[r * n + j] -= f * v;
                }
            }
        }
        det
    }

    /// Solve self * x = b by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[C64]) -> Option<Vec<C64>> {
        let n = self.dim;
        assert_eq!(b.len(), n);
        let mut a = self.entries.clone();
        let mut x: Vec<C64> = b.to_vec();
        for col in 0..n {
            let (mut piv, mut best) = (col, a[col * n + col].norm());
            for r in col + 1..n {
                let v = a[r * n + col].norm();
                if v > best {
                    piv = r;
                    best = v;
                }
            }
            if best < 1e-300 {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                x.swap(col, piv);
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                if f.norm_sqr() == 0.0 {
                    continue;
                }
                for j in col..n {
                    let v = a[col * n + j];
                    a[r * n + j] -= f * v;
                }
                let xc = x[col];
                x[r] -= f * xc;
            }
        }
        for row in (0..n).rev() {
            let mut acc = x[row];
            for j in row + 1..n {
                acc -= a[row * n + j] * x[j];
            }
            x[row] = acc / a[row * n + row];
        }
        Some(x)
    }

    /// Numerical rank by row echelon with the given pivot threshold.
    pub fn rank(&self, tol: f64) -> usize {
        let n = self.dim;
        let mut a = self.entries.clone();
        let mut rank = 0;
        let mut row = 0;
        for col in 0..n {
            let (mut piv, mut best) = (row, 0.0f64);
            for r in row..n {
                let v = a[r * n + col].norm();
                if v > best {
                    piv = r;
                    best = v;
                }
            }
            if best <= tol {
                continue;
            }
            for j in 0..n {
                a.swap(row * n + j, piv * n + j);
            }
            let d = a[row * n + col];
            for r in row + 1..n {
                let f = a[r * n + col] / d;
                for j in col..n {
                    let v = a[row * n + j];
                    a[r * n + j] -= f * v;
                }
            }
            rank += 1;
            row += 1;
            if row == n {
                break;
            }
        }
        rank
    }

    /// Cofactor (-1)^(i+j) * det(minor_ij); dim 4 only.
    pub fn cofactor(&self, i: usize, j: usize) -> C64 {
        assert_eq!(self.dim, 4);
        let mut sub = [C64::new(0.0, 0.0); 9];
        let mut r = 0;
        for ii in 0..4 {
            if ii == i {
                continue;
            }
            let mut c = 0;
            for jj in 0..4 {
                if jj == j {
                    continue;
                }
                sub[r * 3 + c] = self.get(ii, jj);
                c += 1;
            }
            r += 1;
        }
        let det3 = sub[0] * (sub[4] * sub[8] - sub[5] * sub[7])
            - sub[1] * (sub[3] * sub[8] - sub[5] * sub[6])
            + sub[2] * (sub[3] * sub[7] - sub[4] * sub[6]);
        if (i + j).is_multiple_of(2) {
            det3
        } else {
            -det3
        }
    }
}

/// Pauli matrices and spin-1/2 operators (S = sigma/2).
pub fn sigma_x() -> CMat {
    let o = C64::new(1.0, 0.0);
    let z = C64::new(0.0, 0.0);
    CMat::from_rows(2, &[&[z, o], &[o, z]])
}

pub fn sigma_y() -> CMat {
    let i = C64::new(0.0, 1.0);
    let z = C64::new(0.0, 0.0);
    CMat::from_rows(2, &[&[z, -i], &[i, z]])
}

pub fn sigma_z() -> CMat {
    let o = C64::new(1.0, 0.0);
    let z = C64::new(0.0, 0.0);
    CMat::from_rows(2, &[&[o, z], &[z, -o]])
}

pub fn spin_x() -> CMat {
    sigma_x().scale(C64::new(0.5, 0.0))
}

pub fn spin_y() -> CMat {
    sigma_y().scale(C64::new(0.5, 0.0))
}

pub fn spin_z() -> CMat {
    sigma_z().scale(C64::new(0.5, 0.0))
}

/// Tensor product of two 2x2 matrices, qubit 1 (system) first.
pub fn kron(a: &CMat, b: &CMat) -> Result<CMat, QmatError> {
    if a.dim() != 2 {
        return Err(QmatError::DimensionMismatch {
            expected: 2,
            got: a.dim(),
        });
    }
    if b.dim() != 2 {
        return Err(QmatError::DimensionMismatch {
            expected: 2,
            got: b.dim(),
        });
    }
    Ok(CMat::from_fn(4, |i, j| {
        a.get(i / 2, j / 2) * b.get(i % 2, j % 2)
    }))
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matrix whose columns are
/// the corresponding orthonormal eigenvectors.
pub fn eigh(h: &CMat) -> Result<(Vec<f64>, CMat), QmatError> {
    let dev = h.max_abs_diff(&h.adjoint());
    if dev > TOL_SPECTRAL {
        return Err(QmatError::NotHermitian { deviation: dev });
    }
    let n = h.dim();
    // Symmetrize to kill roundoff asymmetry before factorizing.
    let mut a = h.add(&h.adjoint()).scale(C64::new(0.5, 0.0));
    let mut v = CMat::identity(n);
    let scale = a
        .entries()
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
        .max(1.0);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a.get(p, q).norm());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                let b = apq.norm();
                if b <= 1e-18 * scale {
                    continue;
                }
                // A_block = P B P^dag with P = diag(e^{i phi}, 1) and B the
                // real symmetric block; the real rotation angle diagonalizes B.
                let phase = apq / b;
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let theta = 0.5 * (2.0 * b).atan2(app - aqq);
                let (c, s) = (theta.cos(), theta.sin());
                // column-p/q coefficients of W = P R
                let wpp = phase * c;
                let wpq = -phase * s;
                let wqp = C64::new(s, 0.0);
                let wqq = C64::new(c, 0.0);
                // A <- W^dag A W
                for i in 0..n {
                    let (aip, aiq) = (a.get(i, p), a.get(i, q));
                    a.set(i, p, aip * wpp + aiq * wqp);
                    a.set(i, q, aip * wpq + aiq * wqq);
                }
                for j in 0..n {
                    let (apj, aqj) = (a.get(p, j), a.get(q, j));
                    a.set(p, j, wpp.conj() * apj + wqp.conj() * aqj);
                    a.set(q, j, wpq.conj() * apj + wqq.conj() * aqj);
                }
                // the rotation zeroes this pair by construction
                a.set(p, q, C64::new(0.0, 0.0));
                a.set(q, p, C64::new(0.0, 0.0));
                for i in 0..n {
                    let d = a.get(i, i);
                    a.set(i, i, C64::new(d.re, 0.0));
                }
                // V <- V W
                for i in 0..n {
                    let (vip, viq) = (v.get(i, p), v.get(i, q));
                    v.set(i, p, vip * wpp + viq * wqp);
                    v.set(i, q, vip * wpq + viq * wqq);
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| a.get(x, x).re.partial_cmp(&a.get(y, y).re).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&k| a.get(k, k).re).collect();
    let vecs = CMat::from_fn(n, |i, j| v.get(i, idx[j]));
    Ok((vals, vecs))
}

/// exp(-i h t) for Hermitian h, via spectral decomposition.
pub fn expm_hermitian(h: &CMat, t: f64) -> Result<CMat, QmatError> {
    let (vals, vecs) = eigh(h)?;
    let n = h.dim();
    let phases: Vec<C64> = vals.iter().map(|&l| (-C64::i() * l * t).exp()).collect();
    let mut out = CMat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += vecs.get(i, k) * phases[k] * vecs.get(j, k).conj();
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// A validated density matrix (Hermitian, unit trace, positive semidefinite).
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self, QmatError> {
        let dev = mat.max_abs_diff(&mat.adjoint());
        if dev > TOL_ALGEBRAIC {
            return Err(QmatError::InvalidDensity(format!(
                "not Hermitian (deviation {dev:.3e})"
            )));
        }
        let tr = mat.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TOL_ALGEBRAIC {
            return Err(QmatError::InvalidDensity(format!("trace {tr} != 1")));
        }
        let (vals, _) = eigh(&mat)?;
        if let Some(&min) = vals.first() {
            if min < -1e-10 {
                return Err(QmatError::InvalidDensity(format!(
                    "negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(DensityMatrix { mat })
    }

    /// Skip validation; for states produced by trace-preserving maps from
    /// already-validated inputs.
    pub(crate) fn new_unchecked(mat: CMat) -> Self {
        DensityMatrix { mat }
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }
}

/// Trace out qubit 2 (the assistant) of a two-qubit state.
pub fn partial_trace_assistant(rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::new_unchecked(partial_trace_assistant_mat(rho.mat()))
}

pub(crate) fn partial_trace_assistant_mat(m: &CMat) -> CMat {
    assert_eq!(m.dim(), 4);
    CMat::from_fn(2, |i, j| m.get(2 * i, 2 * j) + m.get(2 * i + 1, 2 * j + 1))
}

/// Trace out qubit 1 (the system), leaving the assistant's state.
pub fn partial_trace_system(rho: &DensityMatrix) -> DensityMatrix {
    let m = rho.mat();
    assert_eq!(m.dim(), 4);
    DensityMatrix::new_unchecked(CMat::from_fn(2, |i, j| m.get(i, j) + m.get(2 + i, 2 + j)))
}
