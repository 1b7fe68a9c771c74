use std::ops::{Add, Mul, Sub};

use rayon::prelude::*;

use super::{Complex, ComplexMatrix};
use crate::error::{Error, Result};

/// Relative off-diagonal Frobenius norm at which sweeps stop.
const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;
const PARALLEL_DIM: usize = 256;

trait Scalar: Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    const ZERO: Self;
    fn from_re(x: f64) -> Self;
    fn re(self) -> f64;
    fn conj(self) -> Self;
    fn abs(self) -> f64;
    fn abs_sqr(self) -> f64;
    fn scale(self, s: f64) -> Self;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    fn from_re(x: f64) -> Self {
        x
    }
    fn re(self) -> f64 {
        self
    }
    fn conj(self) -> Self {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn abs_sqr(self) -> f64 {
        self * self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Scalar for Complex {
    const ZERO: Self = Complex::new(0.0, 0.0);
    fn from_re(x: f64) -> Self {
        Complex::new(x, 0.0)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn abs_sqr(self) -> f64 {
        self.norm_sqr()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

/// `(m + m†) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "hermitian part of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    Ok(ComplexMatrix::from_fn(m.rows(), m.cols(), |r, c| {
        (m[(r, c)] + m[(c, r)].conj()) * 0.5
    }))
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut asym = 0.0;
    for r in 0..n {
        for c in 0..n {
            asym += (m[(r, c)] - m[(c, r)].conj()).norm_sqr();
        }
    }
    let asym = asym.sqrt();
    let scale = m.frobenius_norm();
    if asym > 1e-10 * scale {
        return Err(Error::NotHermitian(asym / scale));
    }
    Ok(())
}

/// Eigenvalues (descending) and eigenvectors (matching columns) of a
/// Hermitian matrix by cyclic Jacobi sweeps.
///
/// Real symmetric input runs the real rotation kernel, which is about four
/// times cheaper than the complex one.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    check_hermitian(m)?;
    let n = m.rows();
    let (values, vt) = if m.is_real() {
        let a: Vec<f64> = m.data().iter().map(|z| z.re).collect();
        let (vals, vt) = jacobi(a, n, true);
        (vals, vt.unwrap().into_iter().map(Complex::from_re).collect::<Vec<_>>())
    } else {
        let (vals, vt) = jacobi(m.data().to_vec(), n, true);
        (vals, vt.unwrap())
    };
    let order = descending(&values);
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| vt[order[c] * n + r]);
    Ok((order.iter().map(|&i| values[i]).collect(), vectors))
}

/// Eigenvalues only, descending. Skips the eigenvector accumulation.
pub fn eigvals_hermitian(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let n = m.rows();
    let values = if m.is_real() {
        jacobi(m.data().iter().map(|z| z.re).collect(), n, false).0
    } else {
        jacobi(m.data().to_vec(), n, false).0
    };
    Ok(descending(&values).into_iter().map(|i| values[i]).collect())
}

fn descending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// Pairings of a round-robin tournament on `n` indices: every step holds
/// disjoint pairs and every pair appears exactly once per sweep.
fn round_robin(n: usize) -> Vec<Vec<(usize, usize)>> {
    let m = n + n % 2;
    if m < 2 {
        return Vec::new();
    }
    let ring = m - 1;
    (0..ring)
        .map(|r| {
            let mut pairs = Vec::with_capacity(m / 2);
            let mut push = |a: usize, b: usize| {
                if a < n && b < n {
                    pairs.push((a.min(b), a.max(b)));
                }
            };
            push(ring, r);
            for k in 1..m / 2 {
                push((r + k) % ring, (r + ring - k) % ring);
            }
            pairs
        })
        .collect()
}

struct Rotation<T> {
    p: usize,
    q: usize,
    c: f64,
    s: f64,
    e: T,
    app: f64,
    aqq: f64,
}

/// Cyclic Jacobi on a full Hermitian row-major matrix. Returns the diagonal
/// and, if requested, the eigenvectors stored as rows.
///
/// Sweeps follow a round-robin order so each step applies `n/2` disjoint
/// rotations at once: first to the rows `J·A` (contiguous), then to the
/// columns `A·J†` one row at a time.
fn jacobi<T: Scalar>(mut a: Vec<T>, n: usize, want_vectors: bool) -> (Vec<f64>, Option<Vec<T>>) {
    let mut vt = want_vectors.then(|| {
        let mut v = vec![T::ZERO; n * n];
        for i in 0..n {
            v[i * n + i] = T::from_re(1.0);
        }
        v
    });
    for i in 0..n {
        a[i * n + i] = T::from_re(a[i * n + i].re());
    }
    let frob = a.iter().map(|z| z.abs_sqr()).sum::<f64>().sqrt();
    let tol = OFF_DIAGONAL_TOL * frob;
    // entries this small cannot move the off-diagonal norm above tol
    let skip = 1e-17 * frob;
    let schedule = round_robin(n);

    let mut rotations: Vec<Rotation<T>> = Vec::with_capacity(n / 2);
    let mut row_p = vec![T::ZERO; n];
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[r * n + c].abs_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            break;
        }
        for pairs in &schedule {
            rotations.clear();
            for &(p, q) in pairs {
                let apq = a[p * n + q];
                let g = apq.abs();
                if g <= skip {
                    continue;
                }
                let app = a[p * n + p].re();
                let aqq = a[q * n + q].re();
                let theta = (aqq - app) / (2.0 * g);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                // unit phase of a_pq; real kernel: ±1
                let e = apq.scale(1.0 / g);
                rotations.push(Rotation {
                    p,
                    q,
                    c,
                    s: t * c,
                    e,
                    app: app - t * g,
                    aqq: aqq + t * g,
                });
            }
            if rotations.is_empty() {
                continue;
            }
            // rows: p ← c·p − s·e·q, q ← s·p + c·e·q
            for r in &rotations {
                rotate_rows(&mut a, n, r, r.e, &mut row_p);
                if let Some(vt) = vt.as_mut() {
                    rotate_rows(vt, n, r, r.e.conj(), &mut row_p);
                }
            }
            // columns: the conjugate action, rows independent
            let rotate_columns = |row: &mut [T]| {
                for r in &rotations {
                    let (xp, xq) = (row[r.p], row[r.q]);
                    let eq = r.e.conj() * xq;
                    row[r.p] = xp.scale(r.c) - eq.scale(r.s);
                    row[r.q] = xp.scale(r.s) + eq.scale(r.c);
                }
            };
            if n >= PARALLEL_DIM {
                a.par_chunks_exact_mut(n).for_each(rotate_columns);
            } else {
                a.chunks_exact_mut(n).for_each(rotate_columns);
            }
            for r in &rotations {
                a[r.p * n + r.p] = T::from_re(r.app);
                a[r.q * n + r.q] = T::from_re(r.aqq);
                a[r.p * n + r.q] = T::ZERO;
                a[r.q * n + r.p] = T::ZERO;
            }
        }
    }
    ((0..n).map(|i| a[i * n + i].re()).collect(), vt)
}

fn rotate_rows<T: Scalar>(m: &mut [T], n: usize, r: &Rotation<T>, e: T, scratch: &mut [T]) {
    let (p, q) = (r.p, r.q);
    scratch.copy_from_slice(&m[p * n..(p + 1) * n]);
    let (head, tail) = m.split_at_mut(q * n);
    let row_p = &mut head[p * n..(p + 1) * n];
    let row_q = &mut tail[..n];
    for ((xp, xq), old) in row_p.iter_mut().zip(row_q.iter_mut()).zip(scratch.iter()) {
        let eq = e * *xq;
        *xp = old.scale(r.c) - eq.scale(r.s);
        *xq = old.scale(r.s) + eq.scale(r.c);
    }
}
