//! Python bindings. Vectors are lists of complex numbers and matrices are
//! lists of rows.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use schmidt_core::circuit::{circuit_to_string, lcu_synthesize, UNITARY_TOL};
use schmidt_core::generators::{
    self, qft_matrix, random_matrix, rings_image, tfim_hamiltonian, vqc_build, DistributionKind, RingsSpec, Rng,
    TfimSpec, Topology, VqcSpec,
};
use schmidt_core::io::{parse_terms, terms_to_string};
use schmidt_core::linalg::{self, Complex, ComplexMatrix, ComplexVector};
use schmidt_core::report::{apply_cutoff, run_recipe, Recipe, RecipeOptions};
use schmidt_core::terms::{self, operator_terms, split_term_into_unitaries, Mat2, TermSum};
use schmidt_core::tree::{
    self, approx_error, histogram_of, CutoffPolicy, Decomposition, DecompositionMode, HistogramScale, ThresholdSpec,
};
use schmidt_core::Error;

type Rows = Vec<Vec<Complex>>;
type SvdParts = (Vec<f64>, Vec<Vec<Complex>>, Vec<Option<Vec<Complex>>>);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_matrix(rows: Rows) -> PyResult<ComplexMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err("matrix rows have different lengths"));
    }
    ComplexMatrix::new(r, c, rows.into_iter().flatten().collect()).map_err(py_err)
}

fn from_matrix(m: &ComplexMatrix) -> Rows {
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

fn to_vector(values: Vec<Complex>) -> PyResult<ComplexVector> {
    ComplexVector::new(values).map_err(py_err)
}

fn threshold(cutoff_prob: Option<f64>, cutoff_coeff: Option<f64>) -> PyResult<ThresholdSpec> {
    match (cutoff_prob, cutoff_coeff) {
        (Some(_), Some(_)) => Err(PyValueError::new_err("give cutoff_prob or cutoff_coeff, not both")),
        (Some(p), None) => ThresholdSpec::probability(p).map_err(py_err),
        (None, Some(c)) => ThresholdSpec::coefficient(c).map_err(py_err),
        (None, None) => Ok(ThresholdSpec::none()),
    }
}

fn policy(name: &str) -> PyResult<CutoffPolicy> {
    match name {
        "gap" => Ok(CutoffPolicy::LargestGap),
        "midpoint" => Ok(CutoffPolicy::Midpoint),
        "geometric" => Ok(CutoffPolicy::GeometricMidpoint),
        other => Err(PyValueError::new_err(format!(
            "unknown policy {other:?} (gap, midpoint, geometric)"
        ))),
    }
}

/// Result of `decompose`: terms sorted by descending coefficient.
#[pyclass(name = "Decomposition", module = "schmidt_tensor", frozen)]
struct PyDecomposition {
    inner: Decomposition,
}

#[pymethods]
impl PyDecomposition {
    #[getter]
    fn mode(&self) -> String {
        self.inner.mode().to_string()
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    #[getter]
    fn input_norm(&self) -> f64 {
        self.inner.input_norm()
    }

    #[getter]
    fn kept_mass(&self) -> f64 {
        self.inner.kept_mass()
    }

    #[getter]
    fn pruned_mass(&self) -> f64 {
        self.inner.pruned_mass()
    }

    #[getter]
    fn zero_branches(&self) -> usize {
        self.inner.zero_branches()
    }

    #[getter]
    fn factor_count(&self) -> usize {
        self.inner.factor_count()
    }

    #[getter]
    fn threshold(&self) -> String {
        self.inner.threshold().to_string()
    }

    fn __len__(&self) -> usize {
        self.inner.terms().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Decomposition(mode={}, terms={}, kept_mass={:.6})",
            self.inner.mode(),
            self.inner.terms().len(),
            self.inner.kept_mass()
        )
    }

    fn coefficients(&self) -> Vec<f64> {
        self.inner.coefficients()
    }

    /// `(coefficient, path, factors)` per term.
    fn terms(&self) -> Vec<(f64, String, Vec<Vec<Complex>>)> {
        self.inner
            .terms()
            .iter()
            .map(|t| {
                let factors = t.factors.iter().map(|f| f.data().to_vec()).collect();
                (t.coefficient, t.path_string(), factors)
            })
            .collect()
    }

    fn reconstruct(&self) -> Vec<Complex> {
        tree::reconstruct(&self.inner).into_data()
    }

    #[pyo3(signature = (cutoff_prob=None, cutoff_coeff=None))]
    fn with_threshold(&self, cutoff_prob: Option<f64>, cutoff_coeff: Option<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_threshold(threshold(cutoff_prob, cutoff_coeff)?),
        })
    }

    fn truncated(&self, count: usize) -> Self {
        Self {
            inner: self.inner.truncated(count),
        }
    }

    /// Terms kept by a cutoff policy: "gap", "midpoint" or "geometric".
    fn cut(&self, policy_name: &str) -> PyResult<(Self, Option<f64>)> {
        let (inner, cutoff) = apply_cutoff(&self.inner, policy(policy_name)?).map_err(py_err)?;
        Ok((Self { inner }, cutoff))
    }

    /// `(l2, mse)` against the original vector.
    fn approx_error(&self, original: Vec<Complex>) -> PyResult<(f64, f64)> {
        let e = approx_error(&self.inner, &to_vector(original)?).map_err(py_err)?;
        Ok((e.l2, e.mse))
    }

    /// `(low, high, count)` rows over log10 coefficients.
    #[pyo3(signature = (bins=40, probability=false))]
    fn histogram(&self, bins: usize, probability: bool) -> PyResult<Vec<(f64, f64, usize)>> {
        let scale = if probability {
            HistogramScale::Probability
        } else {
            HistogramScale::Coefficient
        };
        let h = histogram_of(&self.inner.coefficients(), self.inner.zero_branches(), bins, scale).map_err(py_err)?;
        Ok(h.bins.iter().map(|b| (b.low, b.high, b.count)).collect())
    }

    fn to_terms_string(&self) -> String {
        terms_to_string(&self.inner)
    }

    /// `(Σ A_i) ψ` for a matrix decomposition.
    fn apply(&self, psi: Vec<Complex>) -> PyResult<Vec<Complex>> {
        let ops = operator_terms(&self.inner).map_err(py_err)?;
        Ok(terms::sum_apply(&ops, &to_vector(psi)?).map_err(py_err)?.into_data())
    }

    /// `(Σ A_i) ψ` through a simulated LCU circuit, splitting non-unitary
    /// factors first.
    fn lcu_apply(&self, psi: Vec<Complex>) -> PyResult<Vec<Complex>> {
        let lcu = lcu_synthesize(&self.unitary_terms()?).map_err(py_err)?;
        Ok(lcu.apply(&to_vector(psi)?).map_err(py_err)?.into_data())
    }

    /// Text form of the LCU circuit.
    fn lcu_circuit(&self) -> PyResult<String> {
        let lcu = lcu_synthesize(&self.unitary_terms()?).map_err(py_err)?;
        Ok(circuit_to_string(&lcu.circuit))
    }
}

impl PyDecomposition {
    fn unitary_terms(&self) -> PyResult<TermSum<terms::TensorTermOperator>> {
        let ops = operator_terms(&self.inner).map_err(py_err)?;
        let split = ops
            .terms()
            .iter()
            .map(|t| split_term_into_unitaries(t, UNITARY_TOL))
            .collect::<schmidt_core::Result<Vec<_>>>()
            .map_err(py_err)?;
        TermSum::new(split.into_iter().flatten().collect()).map_err(py_err)
    }
}

/// Decomposes a vector, or a matrix given as rows (vectorized row-major).
#[pyfunction]
#[pyo3(signature = (values, mode="vector", cutoff_prob=None, cutoff_coeff=None))]
fn decompose(
    values: &Bound<'_, PyAny>,
    mode: &str,
    cutoff_prob: Option<f64>,
    cutoff_coeff: Option<f64>,
) -> PyResult<PyDecomposition> {
    let mode: DecompositionMode = mode.parse().map_err(py_err)?;
    let v = match values.extract::<Rows>() {
        Ok(rows) => linalg::vec(&to_matrix(rows)?),
        Err(_) => to_vector(values.extract()?)?,
    };
    let spec = threshold(cutoff_prob, cutoff_coeff)?;
    let inner = values
        .py()
        .detach(|| tree::decompose(&v, mode, spec))
        .map_err(py_err)?;
    Ok(PyDecomposition { inner })
}

#[pyfunction]
fn read_terms_string(text: &str) -> PyResult<PyDecomposition> {
    Ok(PyDecomposition {
        inner: parse_terms(text).map_err(py_err)?,
    })
}

/// `(sigmas, left, right)` of a 2- or 4-row matrix with
/// `m = Σ σ_i left_i right_iᵀ`.
#[pyfunction]
fn small_row_svd(rows: Rows) -> PyResult<SvdParts> {
    let s = linalg::small_row_svd(&to_matrix(rows)?).map_err(py_err)?;
    let left = s.left.iter().map(|u| u.data().to_vec()).collect();
    let right = s.right.iter().map(|v| v.as_ref().map(|v| v.data().to_vec())).collect();
    Ok((s.sigmas, left, right))
}

/// Eigenvalues (descending) and eigenvectors (columns) of a Hermitian matrix.
#[pyfunction]
fn eigh(py: Python<'_>, rows: Rows) -> PyResult<(Vec<f64>, Rows)> {
    let m = to_matrix(rows)?;
    let (values, vectors) = py.detach(|| linalg::eig_hermitian(&m)).map_err(py_err)?;
    Ok((values, from_matrix(&vectors)))
}

/// `(plus, minus, scale)` with `q = scale · (plus + minus) / 2`.
#[pyfunction]
fn split_into_unitaries(rows: Rows) -> PyResult<(Rows, Rows, f64)> {
    let q = Mat2::from_matrix(&to_matrix(rows)?).map_err(py_err)?;
    let (plus, minus, scale) = terms::split_into_unitaries(&q).map_err(py_err)?;
    Ok((from_matrix(&plus.to_matrix()), from_matrix(&minus.to_matrix()), scale))
}

#[pyfunction]
fn qft(qubits: usize) -> PyResult<Rows> {
    Ok(from_matrix(&qft_matrix(qubits).map_err(py_err)?))
}

#[pyfunction]
#[pyo3(signature = (n=10, h=0.1, j=0.5, c=4, topology="ring"))]
fn tfim(n: usize, h: f64, j: f64, c: usize, topology: &str) -> PyResult<Rows> {
    let topology: Topology = topology.parse().map_err(py_err)?;
    let spec = TfimSpec::new(n, h, j, c).with_topology(topology);
    Ok(from_matrix(&tfim_hamiltonian(&spec).map_err(py_err)?))
}

#[pyfunction]
#[pyo3(signature = (qubits=4, depth=4, seed=0))]
fn vqc_unitary(qubits: usize, depth: usize, seed: u64) -> PyResult<Rows> {
    let c = vqc_build(&VqcSpec::new(qubits, depth, seed)).map_err(py_err)?;
    Ok(from_matrix(&schmidt_core::circuit::circuit_unitary(&c).map_err(py_err)?))
}

#[pyfunction]
#[pyo3(signature = (rows, cols, kind="normal", seed=0))]
fn random(rows: usize, cols: usize, kind: &str, seed: u64) -> PyResult<Rows> {
    let kind: DistributionKind = kind.parse().map_err(py_err)?;
    Ok(from_matrix(&random_matrix(rows, cols, kind, &mut Rng::new(seed)).map_err(py_err)?))
}

/// `XᵀX`, conjugated for complex data.
#[pyfunction]
fn gram(rows: Rows) -> PyResult<Rows> {
    Ok(from_matrix(&generators::gram(&to_matrix(rows)?)))
}

#[pyfunction]
#[pyo3(signature = (side=128, seed=0))]
fn rings(side: usize, seed: u64) -> PyResult<Rows> {
    Ok(from_matrix(&rings_image(&RingsSpec::new(side, seed)).map_err(py_err)?))
}

#[pyfunction]
#[pyo3(signature = (take_rows=None))]
fn iris(take_rows: Option<usize>) -> PyResult<Rows> {
    Ok(from_matrix(&generators::iris(take_rows).map_err(py_err)?))
}

/// Runs a named recipe; returns `(status, lines)`.
#[pyfunction]
#[pyo3(signature = (name, out_dir=None, seed=0, skip_spectrum=true))]
fn recipe(
    py: Python<'_>,
    name: &str,
    out_dir: Option<std::path::PathBuf>,
    seed: u64,
    skip_spectrum: bool,
) -> PyResult<(String, Vec<String>)> {
    let r: Recipe = name.parse().map_err(py_err)?;
    let opts = RecipeOptions {
        out_dir,
        seed,
        skip_spectrum,
        ..RecipeOptions::default()
    };
    let outcome = py.detach(|| run_recipe(r, &opts)).map_err(py_err)?;
    Ok((outcome.status.to_string(), outcome.lines))
}

#[pymodule]
fn schmidt_tensor(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDecomposition>()?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(read_terms_string, m)?)?;
    m.add_function(wrap_pyfunction!(small_row_svd, m)?)?;
    m.add_function(wrap_pyfunction!(eigh, m)?)?;
    m.add_function(wrap_pyfunction!(split_into_unitaries, m)?)?;
    m.add_function(wrap_pyfunction!(qft, m)?)?;
    m.add_function(wrap_pyfunction!(tfim, m)?)?;
    m.add_function(wrap_pyfunction!(vqc_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(random, m)?)?;
    m.add_function(wrap_pyfunction!(gram, m)?)?;
    m.add_function(wrap_pyfunction!(rings, m)?)?;
    m.add_function(wrap_pyfunction!(iris, m)?)?;
    m.add_function(wrap_pyfunction!(recipe, m)?)?;
    Ok(())
}
