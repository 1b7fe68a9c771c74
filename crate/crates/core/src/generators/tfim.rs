use crate::error::{Error, Result};
use crate::linalg::{Complex, ComplexMatrix};

use super::Rng;

/// Largest register [`tfim_hamiltonian`] builds densely.
pub const TFIM_QUBIT_LIMIT: usize = 10;

/// Which pairs among the first `c` sites carry a `σz σz` bond.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Topology {
    /// Periodic: `(i, i+1 mod c)`, `c` bonds for `c ≥ 3`.
    #[default]
    Ring,
    /// Open: `(i, i+1)` for `i < c−1`.
    Chain,
}

impl Topology {
    pub fn name(self) -> &'static str {
        match self {
            Topology::Ring => "ring",
            Topology::Chain => "chain",
        }
    }
}

impl std::fmt::Display for Topology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ring" => Ok(Topology::Ring),
            "chain" => Ok(Topology::Chain),
            _ => Err(Error::InvalidArgument(format!("unknown topology {s:?}"))),
        }
    }
}

/// `H = Σ_i h_i σx^i + Σ_{(i,j)} J_ij σz^i σz^j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfimSpec {
    pub n: usize,
    pub h: f64,
    pub j: f64,
    /// Number of coupled sites, counted from qubit 0.
    pub c: usize,
    pub topology: Topology,
    /// When set, every site field is `h·g` and every bond `J·g` with `g`
    /// standard normal drawn from this seed (fields first, then bonds).
    pub random_fields: Option<u64>,
}

impl TfimSpec {
    pub fn new(n: usize, h: f64, j: f64, c: usize) -> Self {
        Self {
            n,
            h,
            j,
            c,
            topology: Topology::default(),
            random_fields: None,
        }
    }

    pub fn with_topology(mut self, topology: Topology) -> Self {
        self.topology = topology;
        self
    }

    pub fn with_random_fields(mut self, seed: u64) -> Self {
        self.random_fields = Some(seed);
        self
    }

    /// Coupled site pairs.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        match (self.topology, self.c) {
            (_, 0 | 1) => Vec::new(),
            (Topology::Ring, c) if c >= 3 => (0..c).map(|i| (i, (i + 1) % c)).collect(),
            (_, c) => (0..c - 1).map(|i| (i, i + 1)).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.c == 0 || self.c > self.n {
            return Err(Error::InvalidArgument(format!(
                "TFIM needs 1 <= c <= n, got n={} c={}",
                self.n, self.c
            )));
        }
        if self.n > TFIM_QUBIT_LIMIT {
            return Err(Error::SizeGuard(format!(
                "dense TFIM of {} qubits exceeds the limit of {TFIM_QUBIT_LIMIT}",
                self.n
            )));
        }
        if !self.h.is_finite() || !self.j.is_finite() {
            return Err(Error::InvalidArgument("TFIM parameters must be finite".into()));
        }
        Ok(())
    }
}

/// Dense real symmetric TFIM Hamiltonian. Qubit 0 is the most significant
/// bit; the field acts on all `n` sites.
pub fn tfim_hamiltonian(spec: &TfimSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    let n = spec.n;
    let bonds = spec.bonds();
    let (fields, couplings): (Vec<f64>, Vec<f64>) = match spec.random_fields {
        None => (vec![spec.h; n], vec![spec.j; bonds.len()]),
        Some(seed) => {
            let mut rng = Rng::new(seed);
            let f = (0..n).map(|_| spec.h * rng.normal()).collect();
            let b = (0..bonds.len()).map(|_| spec.j * rng.normal()).collect();
            (f, b)
        }
    };
    let dim = 1usize << n;
    let bit = |q: usize| 1usize << (n - 1 - q);
    let mut m = ComplexMatrix::zeros(dim, dim);
    for x in 0..dim {
        let mut diag = 0.0;
        for (&(p, q), &jv) in bonds.iter().zip(&couplings) {
            let same = ((x & bit(p)) == 0) == ((x & bit(q)) == 0);
            diag += if same { jv } else { -jv };
        }
        m[(x, x)] = Complex::new(diag, 0.0);
        for (q, &hv) in fields.iter().enumerate() {
            m[(x, x ^ bit(q))] += Complex::new(hv, 0.0);
        }
    }
    Ok(m)
}
