//! Approximation of vectors and vectorized matrices as sums of tensor
//! products of two-dimensional factors.
//!
//! A normalized input is split repeatedly with Schmidt decompositions: the
//! most significant qubit is peeled off first, the right singular vectors are
//! split again, and every root-to-leaf path of the resulting tree is one
//! tensor-product term whose coefficient is the product of the singular values
//! along the path. Paths whose coefficient falls below a threshold are cut
//! while the tree is being built, which is safe because coefficients never
//! grow with depth.
//!
//! The crate is organised as
//!
//! * [`linalg`]: complex dense matrices, the closed-form two-row SVD and a
//!   Jacobi eigensolver for Hermitian matrices,
//! * [`tree`]: the recursion tree, pruning, reconstruction and error metrics,
//! * [`terms`]: arithmetic directly on tensor-product terms (matrix-vector
//!   products, single entries, inverses, splitting into unitaries),
//! * [`generators`]: seeded inputs (random matrices, Gram matrices, QFT, TFIM,
//!   ring images, variational circuits, CSV data),
//! * [`circuit`]: a state-vector simulator and LCU circuit synthesis,
//! * [`io`], [`report`] and [`cli`]: file formats, experiment recipes and the
//!   `schmidt` command-line tool.

pub mod circuit;
pub mod cli;
pub mod error;
pub mod generators;
pub mod io;
pub mod linalg;
pub mod report;
pub mod terms;
pub mod tree;

pub use error::{Error, Result};
pub use linalg::{Complex, ComplexMatrix, ComplexVector};
