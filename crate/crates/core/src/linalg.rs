//! Dense complex matrices and the handful of spectral primitives the rate
//! formulas need: products, adjoints, Gram matrices, a cyclic Jacobi
//! eigensolver for Hermitian input, and Sylvester-reduced log-determinants.
//!
//! Matrices are tiny (M x M with M rarely above 8) or tall and skinny
//! (n x M codewords), so everything is a plain row-major `Vec`.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const JACOBI_REL_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;
const HERMITIAN_REL_TOL: f64 = 1e-10;

/// Dense complex matrix in row-major layout.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    /// Real diagonal matrix.
    pub fn from_diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Builds a matrix from `(re, im)` pairs given row by row.
    pub fn from_pairs(rows: usize, cols: usize, pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            pairs.iter().map(|&(re, im)| C64::new(re, im)).collect(),
        )
    }

    /// Column vector.
    pub fn column(values: &[C64]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::invalid(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        matmul(self, other)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude strictly off the main diagonal.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut m = 0.0f64;
        for r in 0..self.rows {
            for c in 0..self.cols {
                if r != c {
                    m = m.max(self[(r, c)].norm());
                }
            }
        }
        m
    }

    /// `||A - A^H||_F`, zero for Hermitian matrices.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut s = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                s += (self[(r, c)] - self[(c, r)].conj()).norm_sqr();
            }
        }
        s.sqrt()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return Err(Error::invalid(format!(
            "matmul dimension mismatch: {}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = ComplexMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a[(i, k)];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            let brow = b.row(k);
            let orow = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for (o, &bkj) in orow.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
    Ok(out)
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

/// `X^H X`, Hermitian positive semidefinite with `cols(X)` rows.
pub fn gram(x: &ComplexMatrix) -> ComplexMatrix {
    let m = x.cols;
    let mut g = ComplexMatrix::zeros(m, m);
    for r in 0..x.rows {
        let row = x.row(r);
        for i in 0..m {
            let ci = row[i].conj();
            for j in i..m {
                g[(i, j)] += ci * row[j];
            }
        }
    }
    for i in 0..m {
        g[(i, i)].im = 0.0;
        for j in (i + 1)..m {
            g[(j, i)] = g[(i, j)].conj();
        }
    }
    g
}

/// Spectral decomposition `A = Q diag(values) Q^H` of a Hermitian matrix.
///
/// Eigenvalues are sorted ascending (ties keep their Jacobi order) and each
/// eigenvector's largest-magnitude component is rotated onto the positive
/// real axis, so the output is fully deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.col(k)
    }

    /// Eigenvector of the smallest eigenvalue (lowest index on ties).
    pub fn min_vector(&self) -> Vec<C64> {
        self.vector(0)
    }

    pub fn min_value(&self) -> f64 {
        self.values[0]
    }

    pub fn max_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `Q diag(values) Q^H`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_fn(n, n, |r, c| {
            (0..n)
                .map(|k| self.vectors[(r, k)] * self.values[k] * self.vectors[(c, k)].conj())
                .sum()
        })
    }
}

/// Cyclic Jacobi eigensolver for complex Hermitian matrices.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::invalid(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let norm = a.frobenius_norm();
    if !norm.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_REL_TOL * norm {
        return Err(Error::invalid(format!(
            "matrix is not Hermitian: ||A - A^H||_F = {defect:e}"
        )));
    }

    let n = a.rows;
    // Symmetrize so rounding in the caller's input does not leak into the rotations.
    let mut w = ComplexMatrix::from_fn(n, n, |r, c| 0.5 * (a[(r, c)] + a[(c, r)].conj()));
    let mut v = ComplexMatrix::identity(n);
    let tol = JACOBI_REL_TOL * norm;

    let mut converged = norm == 0.0 || n == 1;
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                rotate(&mut w, &mut v, p, q);
            }
        }
        sweeps += 1;
        converged = w.max_off_diagonal() < tol;
    }
    if !converged {
        return Err(Error::Numerical {
            message: format!("Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps"),
            residual: w.max_off_diagonal(),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(i, i)].re.total_cmp(&w[(j, j)].re));
    let values = order.iter().map(|&i| w[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let mut col = v.col(src);
        fix_phase(&mut col);
        for (r, z) in col.into_iter().enumerate() {
            vectors[(r, k)] = z;
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// One complex Jacobi rotation annihilating `w[(p, q)]`.
///
/// With `w_pq = |w_pq| e^{i phi}` the unitary `U = diag(1, e^{-i phi}) R`
/// reduces the 2x2 pivot block to a real symmetric one that the classical
/// rotation `R = [[c, s], [-s, c]]` diagonalizes.
fn rotate(w: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = w[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = w[(p, p)].re;
    let aqq = w[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let phase = apq.conj() / mag; // e^{-i phi}

    let u_pp = C64::new(c, 0.0);
    let u_pq = C64::new(s, 0.0);
    let u_qp = -phase * s;
    let u_qq = phase * c;

    let n = w.rows;
    // W <- W U
    for k in 0..n {
        let wkp = w[(k, p)];
        let wkq = w[(k, q)];
        w[(k, p)] = wkp * u_pp + wkq * u_qp;
        w[(k, q)] = wkp * u_pq + wkq * u_qq;
    }
    // W <- U^H W
    for k in 0..n {
        let wpk = w[(p, k)];
        let wqk = w[(q, k)];
        w[(p, k)] = u_pp.conj() * wpk + u_qp.conj() * wqk;
        w[(q, k)] = u_pq.conj() * wpk + u_qq.conj() * wqk;
    }
    w[(p, q)] = C64::new(0.0, 0.0);
    w[(q, p)] = C64::new(0.0, 0.0);
    w[(p, p)].im = 0.0;
    w[(q, q)].im = 0.0;
    // V <- V U
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

/// Rotates `x` so its largest-magnitude entry (lowest index on ties) is real positive.
pub(crate) fn fix_phase(x: &mut [C64]) {
    let mut best = 0;
    for (i, z) in x.iter().enumerate() {
        if z.norm() > x[best].norm() {
            best = i;
        }
    }
    let pivot = x[best];
    let mag = pivot.norm();
    if mag == 0.0 {
        return;
    }
    let rot = pivot.conj() / mag;
    for z in x.iter_mut() {
        *z *= rot;
    }
}

/// LU factorization with partial pivoting; returns `(log2 |det A|, det A / |det A|)`.
///
/// A singular matrix yields `log2 |det| = -inf`.
pub fn log2_det(a: &ComplexMatrix) -> Result<(f64, C64)> {
    if !a.is_square() {
        return Err(Error::invalid(format!(
            "determinant needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    let mut lu = a.data.clone();
    let mut log_abs = 0.0;
    let mut phase = C64::new(1.0, 0.0);
    for k in 0..n {
        let mut piv = k;
        for r in (k + 1)..n {
            if lu[r * n + k].norm() > lu[piv * n + k].norm() {
                piv = r;
            }
        }
        let pivot = lu[piv * n + k];
        if pivot.norm() == 0.0 {
            return Ok((f64::NEG_INFINITY, C64::new(0.0, 0.0)));
        }
        if piv != k {
            for c in 0..n {
                lu.swap(k * n + c, piv * n + c);
            }
            phase = -phase;
        }
        log_abs += pivot.norm().log2();
        phase *= pivot / pivot.norm();
        for r in (k + 1)..n {
            let f = lu[r * n + k] / pivot;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for c in (k + 1)..n {
                let t = lu[k * n + c];
                lu[r * n + c] -= f * t;
            }
        }
    }
    Ok((log_abs, phase))
}

/// `log2 det(c I_n + X P X^H)` for an `n x M` matrix `X`, computed through
/// Sylvester's identity as `n log2 c + log2 det(I_M + P X^H X / c)`.
pub fn logdet2_shifted_gram(c: f64, x: &ComplexMatrix, p: &ComplexMatrix) -> Result<f64> {
    if !p.is_square() || p.rows != x.cols {
        return Err(Error::invalid(format!(
            "precoder covariance must be {m}x{m}, got {}x{}",
            p.rows,
            p.cols,
            m = x.cols
        )));
    }
    logdet2_shifted_from_gram(c, x.rows, &gram(x), p)
}

/// Same as [`logdet2_shifted_gram`] with `X^H X` already formed.
pub fn logdet2_shifted_from_gram(
    c: f64,
    n: usize,
    gram: &ComplexMatrix,
    p: &ComplexMatrix,
) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::invalid(format!("shift must be positive, got {c}")));
    }
    let m = gram.rows;
    let mut core = matmul(p, gram)?.scale(1.0 / c);
    for i in 0..m {
        core[(i, i)] += 1.0;
    }
    let (log_abs, phase) = log2_det(&core)?;
    // det(I + P G / c) equals det(I + G^{1/2} P G^{1/2} / c) >= 1.
    if !log_abs.is_finite() || (phase - 1.0).norm() > 1e-6 {
        return Err(Error::Numerical {
            message: "shifted Gram determinant is not a positive real".into(),
            residual: (phase - 1.0).norm(),
        });
    }
    let total = n as f64 * c.log2() + log_abs;
    if !total.is_finite() {
        return Err(Error::Numerical {
            message: "non-finite log-determinant".into(),
            residual: f64::NAN,
        });
    }
    Ok(total)
}
