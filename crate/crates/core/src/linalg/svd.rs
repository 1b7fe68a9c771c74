use std::cmp::Ordering;

use super::{eig_hermitian, inner, norm, Complex, ComplexMatrix, ComplexVector, ONE, ZERO};
use crate::error::{Error, Result};

/// Singular values at or below this fraction of `‖m‖_F` are treated as zero.
pub const ZERO_SIGMA_TOL: f64 = 1e-13;

/// Singular values closer than this fraction of `‖m‖_F` are degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Components smaller than this are skipped by the phase convention.
const PHASE_TOL: f64 = 1e-12;

/// Thin SVD of a 2×M or 4×M matrix.
///
/// `right[i]` is the row `left_i† · m / σ_i`, i.e. the complex conjugate of
/// the usual right singular vector, so that `m = Σ σ_i · left_i · right_iᵀ`
/// and `vec(m) = Σ σ_i · left_i ⊗ right_i`. It is `None` when `sigmas[i]` is
/// numerically zero.
#[derive(Debug, Clone)]
pub struct SmallSvd {
    pub sigmas: Vec<f64>,
    pub left: Vec<ComplexVector>,
    pub right: Vec<Option<ComplexVector>>,
}

impl SmallSvd {
    /// `Σ σ_i · left_i · right_iᵀ` as a dense matrix with `cols` columns.
    pub fn recompose(&self, cols: usize) -> ComplexMatrix {
        let rows = self.left.len();
        let mut out = ComplexMatrix::zeros(rows, cols);
        for ((sigma, u), v) in self.sigmas.iter().zip(&self.left).zip(&self.right) {
            let Some(v) = v else { continue };
            for r in 0..rows {
                for c in 0..cols {
                    out[(r, c)] += u[r] * v[c] * *sigma;
                }
            }
        }
        out
    }
}

/// SVD of a matrix with 2 or 4 rows.
///
/// Two rows use the closed-form eigen-decomposition of the 2×2 Gram matrix
/// `m·m†`; four rows diagonalize the 4×4 Gram matrix with Jacobi sweeps. In
/// both cases the singular values are recomputed as `‖left_i† · m‖` and the
/// right vectors are orthogonalized in order, which keeps small singular
/// values accurate to machine precision instead of `√ε`.
///
/// The first component of every left vector with modulus above `1e-12` is
/// real and non-negative; the compensating phase lives in the right vector.
pub fn small_row_svd(m: &ComplexMatrix) -> Result<SmallSvd> {
    if m.rows() != 2 && m.rows() != 4 {
        return Err(Error::InvalidArgument(format!(
            "small_row_svd needs 2 or 4 rows, got {}",
            m.rows()
        )));
    }
    Ok(split_rows(m.data(), m.rows()))
}

/// SVD of the `rows × (data.len() / rows)` row-major reshape of `data`.
pub(crate) fn split_rows(data: &[Complex], rows: usize) -> SmallSvd {
    debug_assert!(rows == 2 || rows == 4);
    debug_assert_eq!(data.len() % rows, 0);
    let cols = data.len() / rows;
    let row = |r: usize| &data[r * cols..(r + 1) * cols];

    let scale = norm(data);
    if scale == 0.0 {
        return SmallSvd {
            sigmas: vec![0.0; rows],
            left: (0..rows).map(|i| ComplexVector::basis(rows, i)).collect(),
            right: vec![None; rows],
        };
    }

    let mut left = if rows == 2 {
        gram_eigvecs_2(row(0), row(1), scale)
    } else {
        gram_eigvecs_4(data, cols)
    };
    for u in &mut left {
        fix_phase(u);
    }

    // w_i = u_i† m, orthogonalized against the earlier right vectors.
    let mut sigmas = Vec::with_capacity(rows);
    let mut right: Vec<Option<Vec<Complex>>> = Vec::with_capacity(rows);
    for u in &left {
        let mut w = vec![ZERO; cols];
        for (r, ur) in u.iter().enumerate() {
            let ur = ur.conj();
            if ur == ZERO {
                continue;
            }
            for (wk, &mk) in w.iter_mut().zip(row(r)) {
                *wk += ur * mk;
            }
        }
        for v in right.iter().flatten() {
            let proj = inner(v, &w);
            for (wk, &vk) in w.iter_mut().zip(v) {
                *wk -= proj * vk;
            }
        }
        let sigma = norm(&w);
        if sigma <= ZERO_SIGMA_TOL * scale {
            sigmas.push(0.0);
            right.push(None);
        } else {
            let inv = 1.0 / sigma;
            w.iter_mut().for_each(|z| *z *= inv);
            sigmas.push(sigma);
            right.push(Some(w));
        }
    }

    let mut order: Vec<usize> = (0..rows).collect();
    // insertion sort: the tie-aware comparator is not a strict weak order
    for i in 1..rows {
        let mut j = i;
        while j > 0 && compare(order[j], order[j - 1], &sigmas, &left, scale) == Ordering::Less {
            order.swap(j, j - 1);
            j -= 1;
        }
    }

    SmallSvd {
        sigmas: order.iter().map(|&i| sigmas[i]).collect(),
        left: order
            .iter()
            .map(|&i| ComplexVector::from_raw(left[i].clone()))
            .collect(),
        right: order
            .iter()
            .map(|&i| right[i].clone().map(ComplexVector::from_raw))
            .collect(),
    }
}

/// Descending sigma; within the degeneracy tolerance, larger `|u[0]|` first,
/// then larger `(re, im)` of `u[0]`.
fn compare(a: usize, b: usize, sigmas: &[f64], left: &[Vec<Complex>], scale: f64) -> Ordering {
    if (sigmas[a] - sigmas[b]).abs() > DEGENERACY_TOL * scale {
        return sigmas[b].total_cmp(&sigmas[a]);
    }
    let (ua, ub) = (left[a][0], left[b][0]);
    ub.norm()
        .total_cmp(&ua.norm())
        .then(ub.re.total_cmp(&ua.re))
        .then(ub.im.total_cmp(&ua.im))
}

fn fix_phase(u: &mut [Complex]) {
    if let Some(&z) = u.iter().find(|z| z.norm() > PHASE_TOL) {
        let phase = z.conj() / z.norm();
        u.iter_mut().for_each(|x| *x *= phase);
    }
}

/// Eigenvectors of `[[a, b], [b̄, d]]` (the Gram matrix of two rows), larger
/// eigenvalue first.
fn gram_eigvecs_2(r0: &[Complex], r1: &[Complex], scale: f64) -> Vec<Vec<Complex>> {
    let a = norm(r0).powi(2);
    let d = norm(r1).powi(2);
    let b: Complex = r0.iter().zip(r1).map(|(x, y)| x * y.conj()).sum();

    // λ± = (t ± √(t² − 4·det)) / 2 with t² − 4·det = (a − d)² + 4|b|²
    let half = 0.5 * (a - d);
    let radius = half.hypot(b.norm());
    let lambda_plus = 0.5 * (a + d) + radius;
    let det = a * d - b.norm_sqr();
    let lambda_minus = if lambda_plus > 0.0 {
        (det / lambda_plus).max(0.0)
    } else {
        0.0
    };
    let gap = lambda_plus.sqrt() - lambda_minus.sqrt();

    let u1 = if gap <= DEGENERACY_TOL * scale {
        [ONE, ZERO]
    } else {
        let raw = if a >= d {
            [Complex::new(half + radius, 0.0), b.conj()]
        } else {
            [b, Complex::new(radius - half, 0.0)]
        };
        let n = norm(&raw);
        [raw[0] / n, raw[1] / n]
    };
    let u2 = [-u1[1].conj(), u1[0].conj()];
    vec![u1.to_vec(), u2.to_vec()]
}

fn gram_eigvecs_4(data: &[Complex], cols: usize) -> Vec<Vec<Complex>> {
    let row = |r: usize| &data[r * cols..(r + 1) * cols];
    let mut gram = ComplexMatrix::zeros(4, 4);
    for i in 0..4 {
        for j in i..4 {
            let g: Complex = row(i).iter().zip(row(j)).map(|(x, y)| x * y.conj()).sum();
            gram[(i, j)] = g;
            gram[(j, i)] = g.conj();
        }
        gram[(i, i)].im = 0.0;
    }
    let (_, vecs) = eig_hermitian(&gram).expect("Gram matrix is Hermitian by construction");
    (0..4).map(|c| vecs.column(c).into_data()).collect()
}
