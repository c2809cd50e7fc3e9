//! Dense complex matrices for small dimensions (at most 64).
//!
//! Storage is row-major. Everything here is a plain value type; the
//! eigensolver is a cyclic complex Jacobi iteration.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance for the Hermitian check.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = -1e-10;
/// Trace tolerance for a density matrix.
pub const TRACE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("not positive semi-definite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(LinalgError::DimMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Row-major real entries, handy for literals in tests.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// |v><v| for a column vector v.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert_eq!(self.rows, self.cols);
        self.rows
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// self += s * other
    pub fn axpy(&mut self, s: C64, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "axpy shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(LinalgError::DimMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn max_hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_hermitian_deviation() <= tol
    }

    /// Hermitian part (M + M†)/2, used to wash out rounding asymmetry.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("mul shape mismatch")
    }
}

/// A matrix known to satisfy M = M† within [`HERMITIAN_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(LinalgError::NotSquare { rows: m.rows, cols: m.cols });
        }
        let dev = m.max_hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(LinalgError::NotHermitian(dev));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }
}

/// Unit-trace positive semi-definite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let h = HermitianMatrix::new(m)?;
        let tr = h.0.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(LinalgError::BadTrace(tr));
        }
        let min = eig_hermitian(&h).values[0];
        if min < PSD_TOL {
            return Err(LinalgError::NotPsd(min));
        }
        Ok(Self(h))
    }

    pub fn pure(psi: &[C64]) -> Result<Self> {
        Self::new(ComplexMatrix::outer(psi))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(HermitianMatrix(ComplexMatrix::identity(dim).scale(1.0 / dim as f64)))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0 .0
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0 .0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn purity(&self) -> f64 {
        hs_norm_sq(self.matrix())
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (p, q) = (b.rows, b.cols);
    ComplexMatrix::from_fn(a.rows * p, a.cols * q, |r, c| a[(r / p, c / q)] * b[(r % p, c % q)])
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    let mut acc = ComplexMatrix::identity(1);
    for f in factors {
        acc = kron(&acc, f);
    }
    acc
}

/// Trace over every factor whose `keep` flag is false.
pub fn partial_trace(m: &ComplexMatrix, keep: &[bool], dims: &[usize]) -> Result<ComplexMatrix> {
    if keep.len() != dims.len() {
        return Err(LinalgError::DimMismatch(format!(
            "{} keep flags for {} factors",
            keep.len(),
            dims.len()
        )));
    }
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows != total {
        return Err(LinalgError::DimMismatch(format!(
            "factor dims multiply to {total}, matrix is {}x{}",
            m.rows, m.cols
        )));
    }
    let kept_dims: Vec<usize> = dims.iter().zip(keep).filter(|(_, &k)| k).map(|(&d, _)| d).collect();
    let dk: usize = kept_dims.iter().product();
    let split = |idx: usize| -> (usize, usize) {
        // returns (kept index, traced index) in mixed radix, last factor fastest
        let mut rem = idx;
        let (mut ki, mut kstride, mut ti, mut tstride) = (0, 1, 0, 1);
        for (f, &d) in dims.iter().enumerate().rev() {
            let digit = rem % d;
            rem /= d;
            if keep[f] {
                ki += digit * kstride;
                kstride *= d;
            } else {
                ti += digit * tstride;
                tstride *= d;
            }
        }
        (ki, ti)
    };
    let parts: Vec<(usize, usize)> = (0..total).map(split).collect();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for i in 0..total {
        let (ki, ti) = parts[i];
        for j in 0..total {
            let (kj, tj) = parts[j];
            if ti == tj {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Transpose of the second tensor factor of an (A ⊗ B) operator.
pub fn partial_transpose_b(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    if !m.is_square() || m.rows != dim_a * dim_b {
        return Err(LinalgError::DimMismatch(format!(
            "{}x{} matrix with dim_a={dim_a}, dim_b={dim_b}",
            m.rows, m.cols
        )));
    }
    Ok(ComplexMatrix::from_fn(m.rows, m.cols, |r, c| {
        let (a1, b1) = (r / dim_b, r % dim_b);
        let (a2, b2) = (c / dim_b, c % dim_b);
        m[(a1 * dim_b + b2, a2 * dim_b + b1)]
    }))
}

/// Tr[a† b].
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if (a.rows, a.cols) != (b.rows, b.cols) {
        return Err(LinalgError::DimMismatch(format!(
            "{}x{} vs {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum())
}

pub fn hs_norm_sq(a: &ComplexMatrix) -> f64 {
    a.data.iter().map(|z| z.norm_sqr()).sum()
}

/// Tr[a b] for Hermitian a, b, which is real. No shape check beyond debug.
pub fn trace_product_real(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    debug_assert_eq!((a.rows, a.cols), (b.cols, b.rows));
    let n = a.rows;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = a.data[i * n + j];
            let y = b.data[j * n + i];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

#[derive(Clone, Debug)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column k is the eigenvector of `values[k]`.
    pub vectors: ComplexMatrix,
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
pub fn eig_hermitian(h: &HermitianMatrix) -> Eigen {
    jacobi(h.matrix())
}

/// Same as [`eig_hermitian`] but checks the input first.
pub fn eig(m: &ComplexMatrix) -> Result<Eigen> {
    Ok(eig_hermitian(&HermitianMatrix::new(m.clone())?))
}

fn off_diag_sq(a: &ComplexMatrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s
}

fn jacobi(m: &ComplexMatrix) -> Eigen {
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = hs_norm_sq(&a).sqrt().max(1.0);
    let tol = 1e-12 * scale;
    for _sweep in 0..100 {
        if off_diag_sq(&a).sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g < 1e-300 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / g;
                let theta = (aqq - app) / (2.0 * g);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on columns (p, q)
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Eigen { values, vectors }
}

/// V diag(f(λ)) V†.
pub fn spectral_map(e: &Eigen, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let n = e.values.len();
    let fv: Vec<f64> = e.values.iter().map(|&x| f(x)).collect();
    ComplexMatrix::from_fn(n, n, |i, j| {
        (0..n).map(|k| e.vectors[(i, k)] * e.vectors[(j, k)].conj() * fv[k]).sum()
    })
}

/// Sum of singular values. Hermitian input goes through the eigenvalues
/// directly, anything else through the eigenvalues of m†m.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare { rows: m.rows, cols: m.cols });
    }
    if m.is_hermitian(1e-10) {
        return Ok(jacobi(m).values.iter().map(|x| x.abs()).sum());
    }
    let g = &m.adjoint() * m;
    Ok(jacobi(&g).values.iter().map(|x| x.max(0.0).sqrt()).sum())
}

/// Principal square root of a PSD matrix; eigenvalues in [-1e-8, 0) are clamped.
pub fn mat_sqrt_psd(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    let e = eig_hermitian(h);
    if e.values[0] < -1e-8 {
        return Err(LinalgError::NotPsd(e.values[0]));
    }
    Ok(HermitianMatrix(spectral_map(&e, |x| x.max(0.0).sqrt()).hermitian_part()))
}
