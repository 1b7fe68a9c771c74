//! The Schmidt recursion tree.
//!
//! A unit vector of dimension `radix^n` is reshaped row-major into
//! `radix × (dim / radix)`, split with [`small_row_svd`](crate::linalg::small_row_svd),
//! and every right singular vector is split again until it has dimension
//! `radix`. The left singular vectors along a root-to-leaf path, followed by
//! the final right vector, are the factors of one tensor-product term; the
//! product of singular values along the path is its coefficient.
//!
//! Every split of a unit vector yields `σ ≤ 1`, so coefficients are
//! non-increasing with depth and a subtree can be discarded as soon as its
//! accumulated coefficient fails the threshold.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::svd::split_rows;
use crate::linalg::{exact_log, kron_slices, Complex, ComplexVector, ZERO};

/// Nodes at least this large split their children across the rayon pool.
const PARALLEL_MIN_DIM: usize = 1 << 12;

/// Adjacent coefficients closer than this in log10 are the same value.
const DISTINCT_LOG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecompositionMode {
    /// Binary tree, one qubit per level.
    Vector,
    /// Four-way tree over a vectorized square matrix whose row and column
    /// bits are interleaved as `r₁ c₁ r₂ c₂ …`; every leaf factor is a
    /// row-major 2×2 matrix.
    Operator,
}

impl DecompositionMode {
    pub fn radix(self) -> usize {
        match self {
            DecompositionMode::Vector => 2,
            DecompositionMode::Operator => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DecompositionMode::Vector => "vector",
            DecompositionMode::Operator => "operator",
        }
    }
}

impl fmt::Display for DecompositionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DecompositionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vector" => Ok(DecompositionMode::Vector),
            "operator" => Ok(DecompositionMode::Operator),
            other => Err(Error::InvalidArgument(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThresholdKind {
    /// Keep a path when `coefficient ≥ value`.
    Coefficient,
    /// Keep a path when `coefficient² ≥ value`.
    Probability,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    pub kind: ThresholdKind,
    pub value: f64,
}

impl ThresholdSpec {
    pub fn new(kind: ThresholdKind, value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidArgument(format!(
                "threshold must lie in [0, 1], got {value}"
            )));
        }
        Ok(Self { kind, value })
    }

    pub fn probability(value: f64) -> Result<Self> {
        Self::new(ThresholdKind::Probability, value)
    }

    pub fn coefficient(value: f64) -> Result<Self> {
        Self::new(ThresholdKind::Coefficient, value)
    }

    /// Keeps every path with a nonzero coefficient.
    pub fn none() -> Self {
        Self {
            kind: ThresholdKind::Probability,
            value: 0.0,
        }
    }

    pub fn keeps(&self, coefficient: f64) -> bool {
        match self.kind {
            ThresholdKind::Coefficient => coefficient >= self.value,
            ThresholdKind::Probability => coefficient * coefficient >= self.value,
        }
    }
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        Self::none()
    }
}

impl fmt::Display for ThresholdSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ThresholdKind::Coefficient => write!(f, "coefficient>={}", self.value),
            ThresholdKind::Probability => write!(f, "probability>={}", self.value),
        }
    }
}

/// One root-to-leaf path: `coefficient · factor₁ ⊗ … ⊗ factor_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTerm {
    pub coefficient: f64,
    /// Unit-norm factors of dimension 2 (vector mode) or 4 (operator mode),
    /// most significant first.
    pub factors: Vec<ComplexVector>,
    /// Child index taken at every split, root first.
    pub path: Vec<u8>,
}

impl PathTerm {
    /// Dense `coefficient · factor₁ ⊗ … ⊗ factor_n` in tree (permuted) order.
    pub fn tensor(&self) -> ComplexVector {
        let mut v = tensor_product(&self.factors);
        let c = Complex::new(self.coefficient, 0.0);
        v.iter_mut().for_each(|z| *z *= c);
        ComplexVector::from_raw(v)
    }

    pub fn path_string(&self) -> String {
        self.path.iter().map(|d| char::from(b'0' + d)).collect()
    }
}

pub(crate) fn tensor_product(factors: &[ComplexVector]) -> Vec<Complex> {
    let mut iter = factors.iter().rev();
    let Some(last) = iter.next() else {
        return vec![Complex::new(1.0, 0.0)];
    };
    iter.fold(last.data().to_vec(), |acc, f| kron_slices(f.data(), &acc))
}

/// Result of [`decompose`]. Immutable; terms are sorted by descending
/// coefficient, ties broken by path.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    mode: DecompositionMode,
    input_dim: usize,
    input_norm: f64,
    terms: Vec<PathTerm>,
    kept_mass: f64,
    pruned_mass: f64,
    threshold: ThresholdSpec,
    zero_branches: usize,
}

impl Decomposition {
    fn from_parts(
        mode: DecompositionMode,
        input_dim: usize,
        input_norm: f64,
        mut terms: Vec<PathTerm>,
        threshold: ThresholdSpec,
        zero_branches: usize,
    ) -> Self {
        terms.sort_by(|a, b| {
            b.coefficient
                .total_cmp(&a.coefficient)
                .then_with(|| a.path.cmp(&b.path))
        });
        let kept_mass: f64 = terms.iter().map(|t| t.coefficient * t.coefficient).sum();
        Self {
            mode,
            input_dim,
            input_norm,
            terms,
            kept_mass,
            pruned_mass: (1.0 - kept_mass).max(0.0),
            threshold,
            zero_branches,
        }
    }

    pub fn mode(&self) -> DecompositionMode {
        self.mode
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// `‖v‖` of the input before normalization.
    pub fn input_norm(&self) -> f64 {
        self.input_norm
    }

    pub fn terms(&self) -> &[PathTerm] {
        &self.terms
    }

    /// `Σ coefficient²` over the kept terms.
    pub fn kept_mass(&self) -> f64 {
        self.kept_mass
    }

    /// `1 − kept_mass`, clamped at zero.
    pub fn pruned_mass(&self) -> f64 {
        self.pruned_mass
    }

    pub fn threshold(&self) -> ThresholdSpec {
        self.threshold
    }

    /// Children dropped because their singular value was numerically zero.
    pub fn zero_branches(&self) -> usize {
        self.zero_branches
    }

    /// Factors per term.
    pub fn factor_count(&self) -> usize {
        exact_log(self.input_dim, self.mode.radix()).unwrap_or(0)
    }

    /// Kept coefficients, descending.
    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.coefficient).collect()
    }

    /// The terms that also pass `threshold`, as if the tree had been pruned
    /// with it.
    pub fn with_threshold(&self, threshold: ThresholdSpec) -> Decomposition {
        let terms = self
            .terms
            .iter()
            .filter(|t| threshold.keeps(t.coefficient))
            .cloned()
            .collect();
        Self::from_parts(
            self.mode,
            self.input_dim,
            self.input_norm,
            terms,
            threshold,
            self.zero_branches,
        )
    }

    /// The `count` largest terms.
    pub fn truncated(&self, count: usize) -> Decomposition {
        let terms = self.terms.iter().take(count).cloned().collect();
        Self::from_parts(
            self.mode,
            self.input_dim,
            self.input_norm,
            terms,
            self.threshold,
            self.zero_branches,
        )
    }

    /// `Σ coefficient · factor₁ ⊗ … ⊗ factor_n` in the input's index order,
    /// without the input norm.
    pub fn normalized_sum(&self) -> ComplexVector {
        let mut acc = vec![ZERO; self.input_dim];
        for term in &self.terms {
            let c = Complex::new(term.coefficient, 0.0);
            for (a, t) in acc.iter_mut().zip(tensor_product(&term.factors)) {
                *a += c * t;
            }
        }
        let acc = match self.mode {
            DecompositionMode::Vector => acc,
            DecompositionMode::Operator => deinterleave(&acc, self.factor_count()),
        };
        ComplexVector::from_raw(acc)
    }

    /// Builds a decomposition from terms read back from disk. The terms are
    /// re-sorted and the masses recomputed.
    pub fn from_terms(
        mode: DecompositionMode,
        input_norm: f64,
        terms: Vec<PathTerm>,
        threshold: ThresholdSpec,
    ) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::InvalidArgument("no terms".into()));
        };
        let n = first.factors.len();
        let radix = mode.radix();
        for t in &terms {
            if t.factors.len() != n || t.factors.iter().any(|f| f.dim() != radix) {
                return Err(Error::DimensionMismatch(format!(
                    "every {mode}-mode term needs {n} factors of dim {radix}"
                )));
            }
        }
        Ok(Self::from_parts(
            mode,
            radix.pow(n as u32),
            input_norm,
            terms,
            threshold,
            0,
        ))
    }
}

/// Index of `idx` (row bits then column bits, `n` each) after interleaving
/// to `r₁ c₁ r₂ c₂ … r_n c_n`.
fn interleave_index(idx: usize, n: usize) -> usize {
    let mask = (1usize << n) - 1;
    let (r, c) = (idx >> n, idx & mask);
    (0..n).fold(0, |acc, k| {
        let shift = n - 1 - k;
        (acc << 2) | (((r >> shift) & 1) << 1) | ((c >> shift) & 1)
    })
}

fn interleave(data: &[Complex], n: usize) -> Vec<Complex> {
    let mut out = vec![ZERO; data.len()];
    for (idx, &z) in data.iter().enumerate() {
        out[interleave_index(idx, n)] = z;
    }
    out
}

fn deinterleave(data: &[Complex], n: usize) -> Vec<Complex> {
    (0..data.len()).map(|idx| data[interleave_index(idx, n)]).collect()
}

struct Walk {
    terms: Vec<PathTerm>,
    zero_branches: usize,
}

struct Child {
    index: u8,
    coefficient: f64,
    left: ComplexVector,
    node: Vec<Complex>,
}

fn walk(
    node: Vec<Complex>,
    coefficient: f64,
    path: Vec<u8>,
    prefix: Vec<ComplexVector>,
    radix: usize,
    threshold: &ThresholdSpec,
) -> Walk {
    if node.len() == radix {
        let mut factors = prefix;
        factors.push(ComplexVector::from_raw(node));
        return Walk {
            terms: vec![PathTerm {
                coefficient,
                factors,
                path,
            }],
            zero_branches: 0,
        };
    }

    let split = split_rows(&node, radix);
    let large = node.len() >= PARALLEL_MIN_DIM;
    drop(node);

    let mut zero_branches = 0;
    let mut children = Vec::with_capacity(radix);
    for (i, ((sigma, left), right)) in split
        .sigmas
        .into_iter()
        .zip(split.left)
        .zip(split.right)
        .enumerate()
    {
        let Some(right) = right else {
            zero_branches += 1;
            continue;
        };
        let child_coefficient = coefficient * sigma;
        if !threshold.keeps(child_coefficient) {
            continue;
        }
        children.push(Child {
            index: i as u8,
            coefficient: child_coefficient,
            left,
            node: right.into_data(),
        });
    }

    let descend = |child: Child| {
        let mut path = path.clone();
        path.push(child.index);
        let mut prefix = prefix.clone();
        prefix.push(child.left);
        walk(child.node, child.coefficient, path, prefix, radix, threshold)
    };
    let walks: Vec<Walk> = if large && children.len() > 1 {
        children.into_par_iter().map(descend).collect()
    } else {
        children.into_iter().map(descend).collect()
    };

    let mut terms = Vec::new();
    for w in walks {
        zero_branches += w.zero_branches;
        terms.extend(w.terms);
    }
    Walk {
        terms,
        zero_branches,
    }
}

/// Decomposes `v` into Schmidt path terms, pruning every subtree whose
/// accumulated coefficient fails `threshold`.
///
/// The input is normalized first; [`Decomposition::input_norm`] keeps the
/// original norm. Children with a numerically zero singular value are
/// dropped regardless of the threshold.
pub fn decompose(
    v: &ComplexVector,
    mode: DecompositionMode,
    threshold: ThresholdSpec,
) -> Result<Decomposition> {
    let dim = v.dim();
    let radix = mode.radix();
    let n = match exact_log(dim, radix) {
        Some(n) if n >= 1 => n,
        _ => {
            return Err(Error::DimensionMismatch(format!(
                "{mode} mode needs a dimension that is a power of {radix} (at least {radix}), got {dim}"
            )))
        }
    };
    let input_norm = v.norm();
    if input_norm == 0.0 {
        return Err(Error::ZeroInput);
    }
    let inv = 1.0 / input_norm;
    let unit: Vec<Complex> = v.data().iter().map(|z| z * inv).collect();
    let root = match mode {
        DecompositionMode::Vector => unit,
        DecompositionMode::Operator => interleave(&unit, n),
    };

    let walk = walk(root, 1.0, Vec::new(), Vec::new(), radix, &threshold);
    Ok(Decomposition::from_parts(
        mode,
        dim,
        input_norm,
        walk.terms,
        threshold,
        walk.zero_branches,
    ))
}

/// `input_norm · Σ coefficient · factor₁ ⊗ … ⊗ factor_n`.
pub fn reconstruct(d: &Decomposition) -> ComplexVector {
    d.normalized_sum().scale(Complex::new(d.input_norm, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxError {
    /// `‖ψ − φ‖₂` for the normalized input ψ and the unnormalized kept sum φ.
    pub l2: f64,
    /// `l2² / dim`.
    pub mse: f64,
}

pub fn approx_error(d: &Decomposition, original: &ComplexVector) -> Result<ApproxError> {
    if original.dim() != d.input_dim {
        return Err(Error::DimensionMismatch(format!(
            "decomposition of dim {} compared with dim {}",
            d.input_dim,
            original.dim()
        )));
    }
    let psi = original.normalized()?;
    let phi = d.normalized_sum();
    let l2 = crate::linalg::norm2_diff(&psi, &phi)?;
    Ok(ApproxError {
        l2,
        mse: l2 * l2 / d.input_dim as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HistogramScale {
    /// Bins over `log10(coefficient)`.
    Coefficient,
    /// Bins over `log10(coefficient²)`.
    Probability,
}

/// Bin over log10 values, `[low, high)` except the last bin which is closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientHistogram {
    pub scale: HistogramScale,
    pub bins: Vec<HistogramBin>,
    /// Zero coefficients, excluded from the bins.
    pub zero_count: usize,
    /// All coefficients (not squared), descending.
    pub coefficients: Vec<f64>,
}

pub fn coefficient_histogram(
    d: &Decomposition,
    bins: usize,
    scale: HistogramScale,
) -> Result<CoefficientHistogram> {
    if d.terms.is_empty() {
        return Err(Error::InvalidArgument("histogram of an empty decomposition".into()));
    }
    histogram_of(&d.coefficients(), d.zero_branches, bins, scale)
}

/// Histogram of an arbitrary coefficient list.
pub fn histogram_of(
    coefficients: &[f64],
    extra_zeros: usize,
    bins: usize,
    scale: HistogramScale,
) -> Result<CoefficientHistogram> {
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be positive".into()));
    }
    let mut sorted = coefficients.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let logs: Vec<f64> = sorted
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| match scale {
            HistogramScale::Coefficient => c.log10(),
            HistogramScale::Probability => 2.0 * c.log10(),
        })
        .collect();
    let zero_count = extra_zeros + sorted.len() - logs.len();
    if logs.is_empty() {
        return Err(Error::InvalidArgument("no nonzero coefficients".into()));
    }

    let hi = logs[0];
    let lo = logs[logs.len() - 1];
    let (lo, hi) = if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in &logs {
        let i = (((x - lo) / width).floor() as isize).clamp(0, bins as isize - 1);
        counts[i as usize] += 1;
    }
    Ok(CoefficientHistogram {
        scale,
        bins: counts
            .into_iter()
            .enumerate()
            .map(|(i, count)| HistogramBin {
                low: lo + width * i as f64,
                high: if i + 1 == bins { hi } else { lo + width * (i + 1) as f64 },
                count,
            })
            .collect(),
        zero_count,
        coefficients: sorted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CutoffPolicy {
    /// Geometric midpoint of the largest adjacent gap in log10 space.
    LargestGap,
    /// Midpoint of the linear probability axis: the coefficient whose
    /// square is `(max² + min²) / 2`.
    Midpoint,
    /// Geometric mean of the largest and smallest nonzero coefficient.
    GeometricMidpoint,
}

/// Distinct nonzero values of a coefficient list, descending.
fn distinct_nonzero(coefficients: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = coefficients.iter().copied().filter(|&c| c > 0.0).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut out: Vec<f64> = Vec::with_capacity(sorted.len());
    for c in sorted {
        match out.last() {
            Some(&prev) if prev.log10() - c.log10() <= DISTINCT_LOG_TOL => {}
            _ => out.push(c),
        }
    }
    out
}

/// Coefficient cutoff for `policy`. Use it with
/// [`ThresholdSpec::coefficient`].
pub fn suggest_cutoff(coefficients: &[f64], policy: CutoffPolicy) -> Result<f64> {
    let distinct = distinct_nonzero(coefficients);
    if distinct.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two distinct nonzero coefficients".into(),
        ));
    }
    let max = distinct[0];
    let min = distinct[distinct.len() - 1];
    Ok(match policy {
        CutoffPolicy::LargestGap => {
            let stats = log_gap_stats(&distinct).expect("two distinct values");
            let hi = distinct[stats.index].log10();
            let lo = distinct[stats.index + 1].log10();
            10f64.powf(0.5 * (hi + lo))
        }
        CutoffPolicy::Midpoint => (0.5 * (max * max + min * min)).sqrt(),
        CutoffPolicy::GeometricMidpoint => (max * min).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapStats {
    /// Largest adjacent gap between distinct log10 coefficients.
    pub largest: f64,
    /// Median adjacent gap.
    pub median: f64,
    /// The largest gap lies between distinct values `index` and `index + 1`.
    pub index: usize,
}

/// Adjacent log10 gaps over the distinct nonzero coefficients; `None` with
/// fewer than two distinct values.
pub fn log_gap_stats(coefficients: &[f64]) -> Option<GapStats> {
    let distinct = distinct_nonzero(coefficients);
    if distinct.len() < 2 {
        return None;
    }
    let gaps: Vec<f64> = distinct
        .windows(2)
        .map(|w| w[0].log10() - w[1].log10())
        .collect();
    let (index, largest) = gaps
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, g)| if g > best.1 { (i, g) } else { best });
    let mut sorted = gaps.clone();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    };
    Some(GapStats {
        largest,
        median,
        index,
    })
}
