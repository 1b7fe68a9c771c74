//! Arithmetic on tensor-product terms without forming dense operators.
//!
//! An operator term is `α · Q₁ ⊗ … ⊗ Q_n` with 2×2 factors and a vector term
//! is `β · p₁ ⊗ … ⊗ p_n` with unit two-component factors. Qubit 1 is the most
//! significant bit of every index.

use std::ops::Mul;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{small_row_svd, Complex, ComplexMatrix, ComplexVector, ONE, ZERO};
use crate::tree::{Decomposition, DecompositionMode, PathTerm, ThresholdSpec};

/// Largest factor count [`operator_term_to_dense`] will expand.
pub const DENSE_FACTOR_LIMIT: usize = 13;

const UNIT_TOL: f64 = 1e-12;

/// A row-major 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Mat2(m.map(|row| row.map(|x| Complex::new(x, 0.0))))
    }

    /// Row-major `[a, b, c, d]`.
    pub fn from_slice(v: &[Complex]) -> Self {
        Mat2([[v[0], v[1]], [v[2], v[3]]])
    }

    pub fn to_vec(self) -> Vec<Complex> {
        let [[a, b], [c, d]] = self.0;
        vec![a, b, c, d]
    }

    pub fn to_matrix(self) -> ComplexMatrix {
        ComplexMatrix::from_raw(2, 2, self.to_vec())
    }

    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        if m.rows() != 2 || m.cols() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "expected a 2x2 matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        Ok(Self::from_slice(m.data()))
    }

    /// `u · vᵀ`.
    pub fn outer(u: [Complex; 2], v: [Complex; 2]) -> Self {
        Mat2([[u[0] * v[0], u[0] * v[1]], [u[1] * v[0], u[1] * v[1]]])
    }

    pub fn det(&self) -> Complex {
        let [[a, b], [c, d]] = self.0;
        a * d - b * c
    }

    pub fn adjoint(&self) -> Self {
        let [[a, b], [c, d]] = self.0;
        Mat2([[a.conj(), c.conj()], [b.conj(), d.conj()]])
    }

    pub fn scale(&self, s: Complex) -> Self {
        Mat2(self.0.map(|row| row.map(|x| x * s)))
    }

    pub fn apply(&self, v: [Complex; 2]) -> [Complex; 2] {
        let [[a, b], [c, d]] = self.0;
        [a * v[0] + b * v[1], c * v[0] + d * v[1]]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖M†M − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint() * *self;
        let [[a, b], [c, d]] = p.0;
        ((a - ONE).norm_sqr() + b.norm_sqr() + c.norm_sqr() + (d - ONE).norm_sqr()).sqrt()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Closed-form inverse through the adjugate.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() <= UNIT_TOL {
            return None;
        }
        let [[a, b], [c, d]] = self.0;
        let inv = ONE / det;
        Some(Mat2([[d * inv, -b * inv], [-c * inv, a * inv]]))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// `β · p₁ ⊗ … ⊗ p_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorTermVector {
    pub beta: Complex,
    pub factors: Vec<[Complex; 2]>,
}

impl TensorTermVector {
    pub fn new(beta: Complex, factors: Vec<[Complex; 2]>) -> Result<Self> {
        for (i, f) in factors.iter().enumerate() {
            let n = (f[0].norm_sqr() + f[1].norm_sqr()).sqrt();
            if (n - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidArgument(format!(
                    "vector factor {i} has norm {n}, expected 1"
                )));
            }
        }
        Ok(Self { beta, factors })
    }

    /// Computational basis state `|index⟩` on `n` qubits.
    pub fn basis(n: usize, index: usize) -> Self {
        let factors = (0..n)
            .map(|k| {
                if (index >> (n - 1 - k)) & 1 == 0 {
                    [ONE, ZERO]
                } else {
                    [ZERO, ONE]
                }
            })
            .collect();
        Self { beta: ONE, factors }
    }

    /// Vector-mode path term; every factor must have dimension 2.
    pub fn from_path_term(t: &PathTerm) -> Result<Self> {
        let factors = t
            .factors
            .iter()
            .map(|f| match f.data() {
                [a, b] => Ok([*a, *b]),
                _ => Err(Error::DimensionMismatch(format!(
                    "vector term factors must have dim 2, got {}",
                    f.dim()
                ))),
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            beta: Complex::new(t.coefficient, 0.0),
            factors,
        })
    }

    pub fn to_dense(&self) -> ComplexVector {
        let mut v = vec![self.beta];
        for f in &self.factors {
            let mut next = Vec::with_capacity(v.len() * 2);
            for &x in &v {
                next.push(x * f[0]);
                next.push(x * f[1]);
            }
            v = next;
        }
        ComplexVector::from_raw(v)
    }
}

/// `α · Q₁ ⊗ … ⊗ Q_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorTermOperator {
    pub alpha: Complex,
    pub factors: Vec<Mat2>,
}

impl TensorTermOperator {
    pub fn new(alpha: Complex, factors: Vec<Mat2>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("operator term needs at least one factor".into()));
        }
        Ok(Self { alpha, factors })
    }

    pub fn qubits(&self) -> usize {
        self.factors.len()
    }
}

/// A homogeneous sum of terms, `A = Σ A_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TermSum<T> {
    terms: Vec<T>,
}

pub trait FactorCount {
    fn factor_count(&self) -> usize;
}

impl FactorCount for TensorTermOperator {
    fn factor_count(&self) -> usize {
        self.factors.len()
    }
}

impl FactorCount for TensorTermVector {
    fn factor_count(&self) -> usize {
        self.factors.len()
    }
}

impl<T: FactorCount> TermSum<T> {
    pub fn new(terms: Vec<T>) -> Result<Self> {
        if let Some(first) = terms.first() {
            let n = first.factor_count();
            if let Some(bad) = terms.iter().position(|t| t.factor_count() != n) {
                return Err(Error::DimensionMismatch(format!(
                    "term {bad} has {} factors, term 0 has {n}",
                    terms[bad].factor_count()
                )));
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[T] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<T> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Factors per term (0 for an empty sum).
    pub fn factor_count(&self) -> usize {
        self.terms.first().map_or(0, FactorCount::factor_count)
    }
}

fn spinor(f: &ComplexVector) -> Result<[Complex; 2]> {
    match f.data() {
        [a, b] => Ok([*a, *b]),
        _ => Err(Error::DimensionMismatch(format!(
            "expected a two-component factor, got dim {}",
            f.dim()
        ))),
    }
}

/// Turns a vector-mode path term of `vec(A)` (A of size 2ⁿ×2ⁿ, row-major)
/// into the operator term `α · Q₁ ⊗ … ⊗ Q_n`.
///
/// The path factors are grouped as row-bit factors `f₁…f_n` followed by
/// column-bit factors `f_{n+1}…f_{2n}`, and `Q_i = f_i · f_{n+i}ᵀ` (plain
/// transpose), which makes `vec(α · ⊗ Q_i)` equal to the path's tensor.
pub fn vec_term_to_operator(t: &PathTerm) -> Result<TensorTermOperator> {
    let count = t.factors.len();
    if count == 0 || !count.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "vector term of a square matrix needs an even factor count, got {count}"
        )));
    }
    let n = count / 2;
    let factors = (0..n)
        .map(|i| Ok(Mat2::outer(spinor(&t.factors[i])?, spinor(&t.factors[n + i])?)))
        .collect::<Result<_>>()?;
    Ok(TensorTermOperator {
        alpha: Complex::new(t.coefficient, 0.0),
        factors,
    })
}

/// Operator-mode path term: every four-component factor is a row-major 2×2
/// matrix.
pub fn operator_mode_term(t: &PathTerm) -> Result<TensorTermOperator> {
    let factors = t
        .factors
        .iter()
        .map(|f| {
            if f.dim() == 4 {
                Ok(Mat2::from_slice(f.data()))
            } else {
                Err(Error::DimensionMismatch(format!(
                    "operator-mode factors must have dim 4, got {}",
                    f.dim()
                )))
            }
        })
        .collect::<Result<_>>()?;
    TensorTermOperator::new(Complex::new(t.coefficient, 0.0), factors)
}

/// All terms of a matrix decomposition as operator terms, scaled by the
/// input norm so that their sum approximates the original matrix.
pub fn operator_terms(d: &Decomposition) -> Result<TermSum<TensorTermOperator>> {
    let norm = Complex::new(d.input_norm(), 0.0);
    let terms = d
        .terms()
        .iter()
        .map(|t| {
            let mut op = match d.mode() {
                DecompositionMode::Vector => vec_term_to_operator(t)?,
                DecompositionMode::Operator => operator_mode_term(t)?,
            };
            op.alpha *= norm;
            Ok(op)
        })
        .collect::<Result<_>>()?;
    TermSum::new(terms)
}

/// Dense `α · Q₁ ⊗ … ⊗ Q_n`.
pub fn operator_term_to_dense(t: &TensorTermOperator) -> Result<ComplexMatrix> {
    if t.factors.len() > DENSE_FACTOR_LIMIT {
        return Err(Error::SizeGuard(format!(
            "dense expansion of {} factors exceeds the limit of {DENSE_FACTOR_LIMIT}",
            t.factors.len()
        )));
    }
    let mut m = ComplexMatrix::from_raw(1, 1, vec![t.alpha]);
    for q in &t.factors {
        m = m.kron(&q.to_matrix());
    }
    Ok(m)
}

/// `A_i |ψ_j⟩ = αβ · Q₁p₁ ⊗ … ⊗ Q_n p_n`, with every `Q_k p_k`
/// re-normalized and its norm folded into the coefficient.
pub fn apply(a: &TensorTermOperator, psi: &TensorTermVector) -> Result<TensorTermVector> {
    if a.factors.len() != psi.factors.len() {
        return Err(Error::DimensionMismatch(format!(
            "operator has {} factors, vector has {}",
            a.factors.len(),
            psi.factors.len()
        )));
    }
    let mut beta = a.alpha * psi.beta;
    let mut factors = Vec::with_capacity(psi.factors.len());
    for (q, p) in a.factors.iter().zip(&psi.factors) {
        let w = q.apply(*p);
        let n = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
        if n == 0.0 {
            return Ok(TensorTermVector {
                beta: ZERO,
                factors: vec![[ONE, ZERO]; psi.factors.len()],
            });
        }
        beta *= n;
        factors.push([w[0] / n, w[1] / n]);
    }
    Ok(TensorTermVector { beta, factors })
}

/// Entry `index` of `(Σ_i A_i) |ψ⟩` in O(r·n) arithmetic.
pub fn entry(
    a: &TermSum<TensorTermOperator>,
    psi: &TensorTermVector,
    index: usize,
) -> Result<Complex> {
    entry_counted(a, psi, index).map(|(z, _)| z)
}

/// [`entry`] together with the number of complex multiplications it used.
pub fn entry_counted(
    a: &TermSum<TensorTermOperator>,
    psi: &TensorTermVector,
    index: usize,
) -> Result<(Complex, u64)> {
    let n = psi.factors.len();
    if a.factor_count() != n && !a.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "operator has {} factors, vector has {n}",
            a.factor_count()
        )));
    }
    if n >= usize::BITS as usize || index >> n != 0 {
        return Err(Error::InvalidArgument(format!(
            "index {index} out of range for {n} qubits"
        )));
    }
    let mut mults = 0u64;
    let mut total = ZERO;
    for term in a.terms() {
        let mut acc = term.alpha * psi.beta;
        mults += 1;
        for (k, (q, p)) in term.factors.iter().zip(&psi.factors).enumerate() {
            let bit = (index >> (n - 1 - k)) & 1;
            let row = q.0[bit];
            acc *= row[0] * p[0] + row[1] * p[1];
            mults += 3;
        }
        total += acc;
    }
    Ok((total, mults))
}

/// Applies `Q` to qubit `k` (0 = most significant) of an `n`-qubit state.
pub(crate) fn apply_factor(state: &mut [Complex], n: usize, k: usize, q: &Mat2) {
    let stride = 1usize << (n - 1 - k);
    let [[a, b], [c, d]] = q.0;
    for block in state.chunks_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (x0, x1) in lo.iter_mut().zip(hi.iter_mut()) {
            let (u, v) = (*x0, *x1);
            *x0 = a * u + b * v;
            *x1 = c * u + d * v;
        }
    }
}

/// `(Σ_i A_i) ψ` for a dense ψ by n successive 2×2 contractions per term,
/// O(r·n·2ⁿ). Terms run in parallel and are summed by a fixed pairwise tree,
/// so the result does not depend on the thread count.
pub fn sum_apply(a: &TermSum<TensorTermOperator>, psi: &ComplexVector) -> Result<ComplexVector> {
    let n = a.factor_count();
    if a.is_empty() {
        return Ok(ComplexVector::zeros(psi.dim()));
    }
    if n >= usize::BITS as usize || psi.dim() != 1usize << n {
        return Err(Error::DimensionMismatch(format!(
            "{n}-factor terms applied to a dim {} vector",
            psi.dim()
        )));
    }
    let mut partial: Vec<Vec<Complex>> = a
        .terms()
        .par_iter()
        .map(|t| {
            let mut state = psi.data().to_vec();
            for (k, q) in t.factors.iter().enumerate() {
                apply_factor(&mut state, n, k, q);
            }
            state.iter_mut().for_each(|z| *z *= t.alpha);
            state
        })
        .collect();
    while partial.len() > 1 {
        partial = partial
            .chunks_mut(2)
            .map(|pair| match pair {
                [x, y] => {
                    let mut x = std::mem::take(x);
                    x.iter_mut().zip(y.iter()).for_each(|(a, b)| *a += b);
                    x
                }
                [x] => std::mem::take(x),
                _ => unreachable!(),
            })
            .collect();
    }
    Ok(ComplexVector::from_raw(partial.pop().unwrap()))
}

/// Operator-mode decomposition holding the terms of `a`. Factors are scaled
/// to unit Frobenius norm and the phase of `α` moves into the first factor.
pub fn operator_sum_to_decomposition(a: &TermSum<TensorTermOperator>) -> Result<Decomposition> {
    let mut terms = Vec::with_capacity(a.len());
    for t in a.terms() {
        let mut coefficient = t.alpha.norm();
        let mut factors = Vec::with_capacity(t.factors.len());
        for (k, q) in t.factors.iter().enumerate() {
            let norm = q.frobenius_norm();
            if norm == 0.0 || coefficient == 0.0 {
                return Err(Error::ZeroInput);
            }
            coefficient *= norm;
            let mut scale = Complex::new(1.0 / norm, 0.0);
            if k == 0 {
                scale *= t.alpha / t.alpha.norm();
            }
            factors.push(ComplexVector::from_raw(q.scale(scale).to_vec()));
        }
        terms.push(PathTerm {
            coefficient,
            factors,
            path: Vec::new(),
        });
    }
    let norm = terms.iter().map(|t| t.coefficient * t.coefficient).sum::<f64>().sqrt();
    for t in &mut terms {
        t.coefficient /= norm;
    }
    Decomposition::from_terms(DecompositionMode::Operator, norm, terms, ThresholdSpec::none())
}

/// `(α · ⊗ Q_k)⁻¹ = α⁻¹ · ⊗ Q_k⁻¹` with closed-form 2×2 inverses.
pub fn invert_single_term(a: &TensorTermOperator) -> Result<TensorTermOperator> {
    if a.alpha.norm() <= UNIT_TOL {
        return Err(Error::InvalidArgument(format!(
            "coefficient {} is not invertible",
            a.alpha
        )));
    }
    let factors = a
        .factors
        .iter()
        .enumerate()
        .map(|(index, q)| {
            q.inverse().ok_or(Error::SingularFactor {
                index,
                det: q.det().norm(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(TensorTermOperator {
        alpha: ONE / a.alpha,
        factors,
    })
}

/// Writes `q = scale · (U₊ + U₋) / 2` with unitary `U±`.
///
/// With `q = Σ s_i · u_i · v_i†` and `s'_i = s_i / s₁`,
/// `U± = Σ (s'_i ± i·√(1 − s'_i²)) · u_i · v_i†`; `scale` is the largest
/// singular value `s₁`.
pub fn split_into_unitaries(q: &Mat2) -> Result<(Mat2, Mat2, f64)> {
    let svd = small_row_svd(&q.to_matrix())?;
    let scale = svd.sigmas[0];
    if scale == 0.0 {
        return Err(Error::InvalidArgument("cannot split a zero matrix".into()));
    }
    let u = [spinor(&svd.left[0])?, spinor(&svd.left[1])?];
    // right rows are conj(v_i); a missing second row is the complement of the first
    let r0 = spinor(svd.right[0].as_ref().expect("largest sigma is nonzero"))?;
    let r1 = match &svd.right[1] {
        Some(r) => spinor(r)?,
        None => [-r0[1].conj(), r0[0].conj()],
    };
    let rows = [r0, r1];

    let mut plus = Mat2([[ZERO; 2]; 2]);
    let mut minus = Mat2([[ZERO; 2]; 2]);
    for i in 0..2 {
        let s = (svd.sigmas[i] / scale).min(1.0);
        let c = (1.0 - s * s).max(0.0).sqrt();
        let outer = Mat2::outer(u[i], rows[i]);
        let p = outer.scale(Complex::new(s, c));
        let m = outer.scale(Complex::new(s, -c));
        for r in 0..2 {
            for col in 0..2 {
                plus.0[r][col] += p.0[r][col];
                minus.0[r][col] += m.0[r][col];
            }
        }
    }
    Ok((plus, minus, scale))
}

/// Replaces every non-unitary factor by its two unitary parts, doubling the
/// term count per such factor. The sum of the returned terms equals `t`.
pub fn split_term_into_unitaries(t: &TensorTermOperator, tol: f64) -> Result<Vec<TensorTermOperator>> {
    let mut out = vec![TensorTermOperator {
        alpha: t.alpha,
        factors: Vec::with_capacity(t.factors.len()),
    }];
    for q in &t.factors {
        if q.is_unitary(tol) {
            out.iter_mut().for_each(|term| term.factors.push(*q));
            continue;
        }
        let (plus, minus, scale) = split_into_unitaries(q)?;
        let half = Complex::new(0.5 * scale, 0.0);
        out = out
            .into_iter()
            .flat_map(|term| {
                [plus, minus].map(|u| {
                    let mut factors = term.factors.clone();
                    factors.push(u);
                    TensorTermOperator {
                        alpha: term.alpha * half,
                        factors,
                    }
                })
            })
            .collect();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    use crate::linalg::vec;
    use crate::tree::decompose;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    fn x() -> Mat2 {
        Mat2::from_real([[0.0, 1.0], [1.0, 0.0]])
    }

    fn mat_close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        a.max_abs_diff(b) <= tol
    }

    #[test]
    fn basis_factors_give_projector() {
        let e0 = ComplexVector::basis(2, 0);
        let t = PathTerm {
            coefficient: 1.0,
            factors: vec![e0.clone(), e0],
            path: vec![0],
        };
        let op = vec_term_to_operator(&t).unwrap();
        assert_eq!(op.factors[0], Mat2::from_real([[1.0, 0.0], [0.0, 0.0]]));
    }

    #[test]
    fn plus_factors_give_half_ones() {
        let plus = ComplexVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let t = PathTerm {
            coefficient: 1.0,
            factors: vec![plus.clone(), plus],
            path: vec![0],
        };
        let op = vec_term_to_operator(&t).unwrap();
        let expected = Mat2::from_real([[0.5, 0.5], [0.5, 0.5]]);
        assert!(mat_close(&op.factors[0].to_matrix(), &expected.to_matrix(), 1e-15));
        let odd = PathTerm {
            coefficient: 1.0,
            factors: vec![ComplexVector::basis(2, 0); 3],
            path: vec![],
        };
        assert!(vec_term_to_operator(&odd).is_err());
    }

    #[test]
    fn hadamard_terms_sum_to_hadamard() {
        let h = ComplexMatrix::from_real(2, 2, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2])
            .unwrap();
        let d = decompose(&vec(&h), DecompositionMode::Vector, ThresholdSpec::none()).unwrap();
        let ops = operator_terms(&d).unwrap();
        assert_eq!(ops.len(), 2);
        let mut sum = ComplexMatrix::zeros(2, 2);
        for t in ops.terms() {
            sum = sum.add(&operator_term_to_dense(t).unwrap()).unwrap();
        }
        assert!(mat_close(&sum, &h, 1e-12));
    }

    #[test]
    fn dense_expansion_examples() {
        let id = TensorTermOperator::new(ONE, vec![Mat2::IDENTITY; 2]).unwrap();
        assert_eq!(operator_term_to_dense(&id).unwrap(), ComplexMatrix::identity(4));
        let two_x = TensorTermOperator::new(c(2.0), vec![x()]).unwrap();
        assert_eq!(
            operator_term_to_dense(&two_x).unwrap(),
            ComplexMatrix::from_real(2, 2, &[0.0, 2.0, 2.0, 0.0]).unwrap()
        );
        let p0 = Mat2::from_real([[1.0, 0.0], [0.0, 0.0]]);
        let p1 = Mat2::from_real([[0.0, 0.0], [0.0, 1.0]]);
        let t = TensorTermOperator::new(ONE, vec![p0, p1]).unwrap();
        assert_eq!(
            operator_term_to_dense(&t).unwrap(),
            ComplexMatrix::diag(&[c(0.0), c(1.0), c(0.0), c(0.0)])
        );
        let big = TensorTermOperator::new(ONE, vec![Mat2::IDENTITY; 14]).unwrap();
        assert!(matches!(operator_term_to_dense(&big), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn apply_examples() {
        let psi = TensorTermVector::basis(2, 0);
        let id = TensorTermOperator::new(ONE, vec![Mat2::IDENTITY; 2]).unwrap();
        assert_eq!(apply(&id, &psi).unwrap(), psi);
        let xx = TensorTermOperator::new(ONE, vec![x(); 2]).unwrap();
        assert_eq!(apply(&xx, &psi).unwrap(), TensorTermVector::basis(2, 3));
        let p1 = Mat2::from_real([[0.0, 0.0], [0.0, 1.0]]);
        let kill = TensorTermOperator::new(ONE, vec![p1, Mat2::IDENTITY]).unwrap();
        assert_eq!(apply(&kill, &psi).unwrap().beta, ZERO);
        let short = TensorTermOperator::new(ONE, vec![x()]).unwrap();
        assert!(apply(&short, &psi).is_err());
    }

    #[test]
    fn entry_examples() {
        let id = TermSum::new(vec![TensorTermOperator::new(ONE, vec![Mat2::IDENTITY; 3]).unwrap()])
            .unwrap();
        let psi = TensorTermVector::basis(3, 0);
        assert_eq!(entry(&id, &psi, 0).unwrap(), ONE);
        assert_eq!(entry(&id, &psi, 4).unwrap(), ZERO);
        assert!(entry(&id, &psi, 8).is_err());
    }

    #[test]
    fn sum_apply_identities() {
        let psi = ComplexVector::new(vec![c(1.0), Complex::new(0.0, 2.0), c(-1.0), c(0.5)]).unwrap();
        let one = TermSum::new(vec![TensorTermOperator::new(ONE, vec![Mat2::IDENTITY; 2]).unwrap()])
            .unwrap();
        assert_eq!(sum_apply(&one, &psi).unwrap(), psi);
        let half = TensorTermOperator::new(c(0.5), vec![Mat2::IDENTITY; 2]).unwrap();
        let two = TermSum::new(vec![half.clone(), half]).unwrap();
        assert_eq!(sum_apply(&two, &psi).unwrap(), psi);
        let short = ComplexVector::zeros(8);
        assert!(sum_apply(&two, &short).is_err());
    }

    #[test]
    fn invert_examples() {
        let t = TensorTermOperator::new(c(2.0), vec![Mat2::IDENTITY; 2]).unwrap();
        let inv = invert_single_term(&t).unwrap();
        assert_eq!(inv.alpha, c(0.5));
        assert_eq!(inv.factors, vec![Mat2::IDENTITY; 2]);

        let g = TensorTermOperator::new(
            ONE,
            vec![
                Mat2::from_real([[2.0, 0.0], [0.0, 1.0]]),
                Mat2::from_real([[1.0, 0.0], [0.0, 3.0]]),
            ],
        )
        .unwrap();
        let inv = invert_single_term(&g).unwrap();
        let expected = [
            Mat2::from_real([[0.5, 0.0], [0.0, 1.0]]),
            Mat2::from_real([[1.0, 0.0], [0.0, 1.0 / 3.0]]),
        ];
        for (a, b) in inv.factors.iter().zip(&expected) {
            assert!(mat_close(&a.to_matrix(), &b.to_matrix(), 1e-15));
        }
        let prod = operator_term_to_dense(&g)
            .unwrap()
            .matmul(&operator_term_to_dense(&inv).unwrap())
            .unwrap();
        assert!(mat_close(&prod, &ComplexMatrix::identity(4), 1e-12));

        let singular = TensorTermOperator::new(ONE, vec![Mat2::IDENTITY, Mat2::from_real([[1.0, 0.0], [0.0, 0.0]])])
            .unwrap();
        assert!(matches!(
            invert_single_term(&singular),
            Err(Error::SingularFactor { index: 1, .. })
        ));
    }

    fn check_split(q: &Mat2) -> (Mat2, Mat2, f64) {
        let (p, m, s) = split_into_unitaries(q).unwrap();
        assert!(p.is_unitary(1e-12), "U+ defect {}", p.unitarity_defect());
        assert!(m.is_unitary(1e-12), "U- defect {}", m.unitarity_defect());
        let back = Mat2(std::array::from_fn(|r| std::array::from_fn(|c| (p.0[r][c] + m.0[r][c]) * (0.5 * s))));
        assert!(mat_close(&back.to_matrix(), &q.to_matrix(), 1e-12));
        (p, m, s)
    }

    #[test]
    fn split_unitary_is_itself() {
        let h = Mat2::from_real([[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]]);
        let (p, m, s) = check_split(&h);
        assert!((s - 1.0).abs() < 1e-15);
        assert!(mat_close(&p.to_matrix(), &h.to_matrix(), 1e-12));
        assert!(mat_close(&m.to_matrix(), &h.to_matrix(), 1e-12));
    }

    #[test]
    fn split_projector() {
        let (p, m, s) = check_split(&Mat2::from_real([[1.0, 0.0], [0.0, 0.0]]));
        assert_eq!(s, 1.0);
        let i = Complex::new(0.0, 1.0);
        assert!(mat_close(&p.to_matrix(), &Mat2([[ONE, ZERO], [ZERO, i]]).to_matrix(), 1e-15));
        assert!(mat_close(&m.to_matrix(), &Mat2([[ONE, ZERO], [ZERO, -i]]).to_matrix(), 1e-15));
    }

    #[test]
    fn split_half_identity() {
        // s' = 1 for both singular values, so U± = I and scale = 1/2
        let (p, _, s) = check_split(&Mat2::from_real([[0.5, 0.0], [0.0, 0.5]]));
        assert!((s - 0.5).abs() < 1e-15);
        assert!(mat_close(&p.to_matrix(), &ComplexMatrix::identity(2), 1e-15));
        assert!(split_into_unitaries(&Mat2([[ZERO; 2]; 2])).is_err());
    }

    #[test]
    fn split_term_sums_back() {
        let q = Mat2::from_real([[0.3, 0.1], [0.0, 0.2]]);
        let t = TensorTermOperator::new(c(1.5), vec![q, x()]).unwrap();
        let parts = split_term_into_unitaries(&t, 1e-10).unwrap();
        assert_eq!(parts.len(), 2);
        let mut sum = ComplexMatrix::zeros(4, 4);
        for p in &parts {
            assert!(p.factors.iter().all(|f| f.is_unitary(1e-10)));
            sum = sum.add(&operator_term_to_dense(p).unwrap()).unwrap();
        }
        assert!(mat_close(&sum, &operator_term_to_dense(&t).unwrap(), 1e-12));
    }

    #[test]
    fn operator_sum_round_trip() {
        let q1 = Mat2::from_real([[2.0, 1.0], [0.0, 1.0]]);
        let q2 = Mat2::from_real([[0.0, 3.0], [1.0, 0.0]]);
        let a = TermSum::new(vec![
            TensorTermOperator::new(Complex::new(0.0, -1.5), vec![q1, q2]).unwrap(),
            TensorTermOperator::new(Complex::new(0.5, 0.0), vec![q2, q2]).unwrap(),
        ])
        .unwrap();
        let d = operator_sum_to_decomposition(&a).unwrap();
        let back = operator_terms(&d).unwrap();
        let dense = |s: &TermSum<TensorTermOperator>| {
            s.terms()
                .iter()
                .map(|t| operator_term_to_dense(t).unwrap())
                .reduce(|x, y| x.add(&y).unwrap())
                .unwrap()
        };
        assert!(dense(&a).max_abs_diff(&dense(&back)) < 1e-12);
    }
}
