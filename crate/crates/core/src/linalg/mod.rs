//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are row-major. Vectorization is row-based, so
//! `vec(u · vᵀ) = u ⊗ v` without any conjugation.

mod eigen;
pub(crate) mod svd;

use std::fmt;
use std::ops::{Index, IndexMut};

pub use eigen::{eig_hermitian, eigvals_hermitian, hermitian_part};
pub use svd::{small_row_svd, SmallSvd, DEGENERACY_TOL, ZERO_SIGMA_TOL};

pub use num_complex::Complex64 as Complex;

use crate::error::{Error, Result};

pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);
pub(crate) const ONE: Complex = Complex::new(1.0, 0.0);

fn check_finite(data: &[Complex]) -> Result<()> {
    match data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be non-empty");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| ZERO)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { ONE } else { ZERO })
    }

    pub fn diag(entries: &[Complex]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |r, c| if r == c { entries[r] } else { ZERO })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<Complex>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
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

    pub fn data(&self) -> &[Complex] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[Complex] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> ComplexVector {
        ComplexVector::from_raw((0..self.rows).map(|r| self[(r, c)]).collect())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|z| z * s).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex, Complex) -> Complex) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = vec![ZERO; self.rows * other.cols];
        for r in 0..self.rows {
            let out_row = &mut out[r * other.cols..(r + 1) * other.cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(Self::from_raw(self.rows, other.cols, out))
    }

    pub fn matvec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if self.cols != v.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix applied to dim {} vector",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        let out = (0..self.rows)
            .map(|r| self.row(r).iter().zip(v.data()).map(|(a, b)| a * b).sum())
            .collect();
        Ok(ComplexVector::from_raw(out))
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |r, c| {
            self[(r / r2, c / c2)] * other[(r % r2, c % c2)]
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;

    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(16) {
            write!(f, " ")?;
            for z in self.row(r).iter().take(16) {
                write!(f, " {:.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Dense complex vector.
#[derive(Clone, PartialEq)]
pub struct ComplexVector {
    data: Vec<Complex>,
}

impl ComplexVector {
    pub fn new(data: Vec<Complex>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::DimensionMismatch("vector must be non-empty".into()));
        }
        check_finite(&data)?;
        Ok(Self { data })
    }

    pub fn from_real(data: &[f64]) -> Result<Self> {
        Self::new(data.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub(crate) fn from_raw(data: Vec<Complex>) -> Self {
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_raw(vec![ZERO; dim])
    }

    /// Canonical basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[index] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[Complex] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex> {
        self.data
    }

    pub fn norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroInput);
        }
        Ok(self.scale(Complex::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self::from_raw(self.data.iter().map(|z| z * s).collect())
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Complex {
        inner(&self.data, &other.data)
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::from_raw(kron_slices(&self.data, &other.data))
    }

    pub fn add_scaled(&mut self, s: Complex, other: &Self) {
        assert_eq!(self.dim(), other.dim());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex;

    fn index(&self, i: usize) -> &Complex {
        &self.data[i]
    }
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexVector[{}](", self.dim())?;
        for (i, z) in self.data.iter().take(16).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:.6}{:+.6}i", z.re, z.im)?;
        }
        if self.dim() > 16 {
            write!(f, ", ...")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn norm(data: &[Complex]) -> f64 {
    data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn inner(a: &[Complex], b: &[Complex]) -> Complex {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn kron_slices(a: &[Complex], b: &[Complex]) -> Vec<Complex> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

/// Row-based vectorization: `out[r·cols + c] = m[(r, c)]`.
pub fn vec(m: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_raw(m.data.clone())
}

/// Inverse of [`vec`].
pub fn unvec(v: &ComplexVector, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if rows == 0 || cols == 0 || v.dim() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "cannot reshape dim {} vector into {rows}x{cols}",
            v.dim()
        )));
    }
    Ok(ComplexMatrix::from_raw(rows, cols, v.data.clone()))
}

/// `‖a − b‖₂`.
pub fn norm2_diff(a: &ComplexVector, b: &ComplexVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("dim {} vs dim {}", a.dim(), b.dim())));
    }
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Mean squared error `‖a − b‖₂² / dim`.
pub fn mean_squared_diff(a: &ComplexVector, b: &ComplexVector) -> Result<f64> {
    let e = norm2_diff(a, b)?;
    Ok(e * e / a.dim() as f64)
}

/// Smallest `n` with `radix^n == dim`, if any.
pub(crate) fn exact_log(dim: usize, radix: usize) -> Option<usize> {
    let mut d = dim;
    let mut n = 0;
    while d > 1 {
        if !d.is_multiple_of(radix) {
            return None;
        }
        d /= radix;
        n += 1;
    }
    (d == 1).then_some(n)
}
