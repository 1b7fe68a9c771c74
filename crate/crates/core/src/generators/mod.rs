//! Seeded inputs: random matrices, Gram and symmetrized matrices, QFT, ring
//! images, TFIM Hamiltonians, variational circuits and CSV datasets.
//!
//! Every generator is a pure function of its arguments and seed. The stream
//! comes from ChaCha8 seeded with `seed_from_u64`, which is specified
//! independently of the platform.

mod data;
mod rings;
mod tfim;
mod vqc;

use std::f64::consts::PI;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{Complex, ComplexMatrix};

pub use data::{iris, load_csv_matrix, load_csv_str, CsvOptions, IRIS_COLUMNS};
pub use rings::{rings_image, RingsSpec, DEFAULT_RING_RADII};
pub use tfim::{tfim_hamiltonian, TfimSpec, Topology, TFIM_QUBIT_LIMIT};
pub use vqc::{vqc_build, VqcSpec};

/// Largest register [`qft_matrix`] builds.
pub const QFT_QUBIT_LIMIT: usize = 12;

/// Seeded random stream.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Standard normal by Box-Muller; the second value of each pair is cached.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare_normal = Some(r * s);
        r * c
    }

    /// Exponential with scale 1 by inverse CDF.
    pub fn exponential(&mut self) -> f64 {
        -(1.0 - self.uniform()).ln()
    }

    /// Poisson with rate 1 by Knuth's multiplication method.
    pub fn poisson(&mut self) -> f64 {
        let limit = (-1.0f64).exp();
        let mut k = 0u32;
        let mut p = self.uniform();
        while p > limit {
            k += 1;
            p *= self.uniform();
        }
        f64::from(k)
    }

    pub fn sample(&mut self, kind: DistributionKind) -> f64 {
        match kind {
            DistributionKind::Uniform => self.uniform(),
            DistributionKind::Normal => self.normal(),
            DistributionKind::Exponential => self.exponential(),
            DistributionKind::Poisson => self.poisson(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistributionKind {
    Uniform,
    Normal,
    Exponential,
    Poisson,
}

impl DistributionKind {
    pub const ALL: [DistributionKind; 4] = [
        DistributionKind::Uniform,
        DistributionKind::Normal,
        DistributionKind::Exponential,
        DistributionKind::Poisson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistributionKind::Uniform => "uniform",
            DistributionKind::Normal => "normal",
            DistributionKind::Exponential => "exponential",
            DistributionKind::Poisson => "poisson",
        }
    }
}

impl std::fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DistributionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DistributionKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown distribution {s:?}")))
    }
}

/// Real matrix with i.i.d. entries, drawn row by row.
pub fn random_matrix(rows: usize, cols: usize, kind: DistributionKind, rng: &mut Rng) -> Result<ComplexMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument(format!("random matrix of size {rows}x{cols}")));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |_, _| Complex::new(rng.sample(kind), 0.0)))
}

/// `G = X†X`, one row and column per column of `X`.
pub fn gram(x: &ComplexMatrix) -> ComplexMatrix {
    let n = x.cols();
    let mut g = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut s = Complex::new(0.0, 0.0);
            for r in 0..x.rows() {
                s += x[(r, i)].conj() * x[(r, j)];
            }
            g[(i, j)] = s;
            g[(j, i)] = s.conj();
        }
        g[(i, i)].im = 0.0;
    }
    g
}

/// `X + Xᵀ` (plain transpose).
pub fn symmetrize(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !x.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cannot symmetrize a {}x{} matrix",
            x.rows(),
            x.cols()
        )));
    }
    x.add(&x.transpose())
}

/// `ω^{jk} / √N` with `ω = e^{2πi/N}`, `N = 2^n`.
pub fn qft_matrix(n_qubits: usize) -> Result<ComplexMatrix> {
    if n_qubits == 0 || n_qubits > QFT_QUBIT_LIMIT {
        return Err(Error::SizeGuard(format!(
            "QFT qubit count must be in 1..={QFT_QUBIT_LIMIT}, got {n_qubits}"
        )));
    }
    let n = 1usize << n_qubits;
    let norm = 1.0 / (n as f64).sqrt();
    // reduce jk mod N first so large exponents keep full angle precision
    let roots: Vec<Complex> = (0..n)
        .map(|k| {
            let (s, c) = (2.0 * PI * k as f64 / n as f64).sin_cos();
            Complex::new(c * norm, s * norm)
        })
        .collect();
    Ok(ComplexMatrix::from_fn(n, n, |j, k| roots[(j * k) % n]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigvals_hermitian;

    #[test]
    fn same_seed_same_matrix() {
        for kind in DistributionKind::ALL {
            let a = random_matrix(2, 2, kind, &mut Rng::new(42)).unwrap();
            let b = random_matrix(2, 2, kind, &mut Rng::new(42)).unwrap();
            assert_eq!(a, b);
        }
        assert!(random_matrix(0, 2, DistributionKind::Uniform, &mut Rng::new(1)).is_err());
    }

    #[test]
    fn sample_moments() {
        let mut rng = Rng::new(7);
        let n = 10_000;
        let mean = |rng: &mut Rng, kind| (0..n).map(|_| rng.sample(kind)).sum::<f64>() / n as f64;
        let u = mean(&mut rng, DistributionKind::Uniform);
        assert!((0.48..=0.52).contains(&u), "{u}");
        let z = mean(&mut rng, DistributionKind::Normal);
        assert!(z.abs() < 0.05, "{z}");
        let e = mean(&mut rng, DistributionKind::Exponential);
        assert!((e - 1.0).abs() < 0.05, "{e}");
        let p = mean(&mut rng, DistributionKind::Poisson);
        assert!((p - 1.0).abs() < 0.05, "{p}");
        let var = (0..n).map(|_| rng.normal().powi(2)).sum::<f64>() / n as f64;
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn poisson_is_integral() {
        let m = random_matrix(20, 20, DistributionKind::Poisson, &mut Rng::new(3)).unwrap();
        assert!(m.data().iter().all(|z| z.re >= 0.0 && z.re.fract() == 0.0 && z.im == 0.0));
    }

    #[test]
    fn gram_examples() {
        assert_eq!(gram(&ComplexMatrix::identity(3)), ComplexMatrix::identity(3));
        let col = ComplexMatrix::from_real(2, 1, &[1.0, 1.0]).unwrap();
        assert_eq!(gram(&col), ComplexMatrix::from_real(1, 1, &[2.0]).unwrap());
        let x = random_matrix(3, 4, DistributionKind::Normal, &mut Rng::new(11)).unwrap();
        let g = gram(&x);
        assert_eq!((g.rows(), g.cols()), (4, 4));
        let vals = eigvals_hermitian(&g).unwrap();
        assert!(vals.iter().all(|&l| l >= -1e-12), "{vals:?}");
    }

    #[test]
    fn complex_gram_is_hermitian() {
        let x = ComplexMatrix::from_fn(3, 2, |r, c| Complex::new(r as f64 - c as f64, (r * c) as f64 + 0.5));
        let g = gram(&x);
        assert!(g.max_abs_diff(&g.adjoint()) == 0.0);
        assert!(g.max_abs_diff(&x.adjoint().matmul(&x).unwrap()) < 1e-14);
    }

    #[test]
    fn symmetrize_examples() {
        let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            symmetrize(&x).unwrap(),
            ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
        );
        let s = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 3.0]).unwrap();
        assert_eq!(symmetrize(&s).unwrap(), s.scale(Complex::new(2.0, 0.0)));
        let r = random_matrix(4, 4, DistributionKind::Normal, &mut Rng::new(5)).unwrap();
        let y = symmetrize(&r).unwrap();
        assert_eq!(y, y.transpose());
        assert!(symmetrize(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn qft_examples() {
        let h = qft_matrix(1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = ComplexMatrix::from_real(2, 2, &[s, s, s, -s]).unwrap();
        assert!(h.max_abs_diff(&expected) < 1e-15);

        let q = qft_matrix(3).unwrap();
        let edge = 1.0 / 8f64.sqrt();
        for k in 0..8 {
            assert!((q[(0, k)] - Complex::new(edge, 0.0)).norm() < 1e-15);
            assert!((q[(k, 0)] - Complex::new(edge, 0.0)).norm() < 1e-15);
        }
        let prod = q.matmul(&q.adjoint()).unwrap();
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(8)) < 1e-12);
        assert!(qft_matrix(0).is_err());
        assert!(matches!(qft_matrix(13), Err(Error::SizeGuard(_))));
    }
}
