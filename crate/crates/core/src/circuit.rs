//! Gate lists, a state-vector simulator and LCU synthesis for term sums.
//!
//! Qubit 0 is the most significant bit of a basis index, matching the order
//! in which the recursion tree peels off factors.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{Complex, ComplexMatrix, ComplexVector, ZERO};
use crate::terms::{Mat2, TensorTermOperator, TermSum};

/// Largest register [`simulate`] accepts.
pub const SIMULATE_QUBIT_LIMIT: usize = 14;
/// Largest register [`circuit_unitary`] expands.
pub const UNITARY_QUBIT_LIMIT: usize = 10;
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Control {
    pub qubit: usize,
    /// `true` fires on |1⟩, `false` on |0⟩.
    pub on_one: bool,
}

impl Control {
    pub fn one(qubit: usize) -> Self {
        Self { qubit, on_one: true }
    }

    pub fn zero(qubit: usize) -> Self {
        Self { qubit, on_one: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Ry { target: usize, theta: f64 },
    /// Ry on `target` when `control` is |1⟩.
    CRy { control: usize, target: usize, theta: f64 },
    G1 { target: usize, matrix: Mat2 },
    CG1 { target: usize, controls: Vec<Control>, matrix: Mat2 },
}

/// `[[cos θ/2, sin θ/2], [−sin θ/2, cos θ/2]]`.
pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    Mat2::from_real([[c, s], [-s, c]])
}

impl Gate {
    pub fn target(&self) -> usize {
        match self {
            Gate::Ry { target, .. }
            | Gate::CRy { target, .. }
            | Gate::G1 { target, .. }
            | Gate::CG1 { target, .. } => *target,
        }
    }

    pub fn controls(&self) -> Vec<Control> {
        match self {
            Gate::CRy { control, .. } => vec![Control::one(*control)],
            Gate::CG1 { controls, .. } => controls.clone(),
            _ => Vec::new(),
        }
    }

    pub fn matrix(&self) -> Mat2 {
        match self {
            Gate::Ry { theta, .. } | Gate::CRy { theta, .. } => ry(*theta),
            Gate::G1 { matrix, .. } | Gate::CG1 { matrix, .. } => *matrix,
        }
    }

    /// The inverse gate.
    pub fn adjoint(&self) -> Gate {
        match self {
            Gate::Ry { target, theta } => Gate::Ry {
                target: *target,
                theta: -theta,
            },
            Gate::CRy {
                control,
                target,
                theta,
            } => Gate::CRy {
                control: *control,
                target: *target,
                theta: -theta,
            },
            Gate::G1 { target, matrix } => Gate::G1 {
                target: *target,
                matrix: matrix.adjoint(),
            },
            Gate::CG1 {
                target,
                controls,
                matrix,
            } => Gate::CG1 {
                target: *target,
                controls: controls.clone(),
                matrix: matrix.adjoint(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitDescription {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl CircuitDescription {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let c = Self { n_qubits, gates };
        c.validate()?;
        Ok(c)
    }

    pub fn empty(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::InvalidArgument("circuit needs at least one qubit".into()));
        }
        for (i, g) in self.gates.iter().enumerate() {
            check_gate(g, self.n_qubits).map_err(|msg| Error::InvalidArgument(format!("gate {i}: {msg}")))?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

fn check_gate(g: &Gate, n: usize) -> std::result::Result<(), String> {
    let target = g.target();
    if target >= n {
        return Err(format!("target {target} out of range for {n} qubits"));
    }
    let controls = g.controls();
    for (k, c) in controls.iter().enumerate() {
        if c.qubit >= n {
            return Err(format!("control {} out of range for {n} qubits", c.qubit));
        }
        if c.qubit == target {
            return Err(format!("qubit {target} is both target and control"));
        }
        if controls[..k].iter().any(|o| o.qubit == c.qubit) {
            return Err(format!("control {} listed twice", c.qubit));
        }
    }
    Ok(())
}

fn apply_gate(state: &mut [Complex], n: usize, g: &Gate) {
    let m = g.matrix().0;
    let tbit = 1usize << (n - 1 - g.target());
    let (mut mask, mut want) = (0usize, 0usize);
    for c in g.controls() {
        let b = 1usize << (n - 1 - c.qubit);
        mask |= b;
        if c.on_one {
            want |= b;
        }
    }
    for i in 0..state.len() {
        if i & tbit != 0 || i & mask != want {
            continue;
        }
        let j = i | tbit;
        let (x0, x1) = (state[i], state[j]);
        state[i] = m[0][0] * x0 + m[0][1] * x1;
        state[j] = m[1][0] * x0 + m[1][1] * x1;
    }
}

fn check_simulation(c: &CircuitDescription, initial: &ComplexVector) -> Result<()> {
    c.validate()?;
    if c.n_qubits > SIMULATE_QUBIT_LIMIT {
        return Err(Error::SizeGuard(format!(
            "simulation of {} qubits exceeds the limit of {SIMULATE_QUBIT_LIMIT}",
            c.n_qubits
        )));
    }
    if initial.dim() != 1 << c.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "{}-qubit circuit applied to a dim {} state",
            c.n_qubits,
            initial.dim()
        )));
    }
    Ok(())
}

/// Applies the gates in list order. General 2×2 gates must be unitary within
/// [`UNITARY_TOL`].
pub fn simulate(c: &CircuitDescription, initial: &ComplexVector) -> Result<ComplexVector> {
    check_simulation(c, initial)?;
    for (i, g) in c.gates.iter().enumerate() {
        if let Gate::G1 { matrix, .. } | Gate::CG1 { matrix, .. } = g {
            let defect = matrix.unitarity_defect();
            if defect > UNITARY_TOL {
                return Err(Error::NonUnitary(format!("gate {i} has unitarity defect {defect:e}")));
            }
        }
    }
    Ok(run(c, initial))
}

/// Like [`simulate`] but accepts non-unitary gates, for analysis only.
pub fn simulate_analysis(c: &CircuitDescription, initial: &ComplexVector) -> Result<ComplexVector> {
    check_simulation(c, initial)?;
    Ok(run(c, initial))
}

fn run(c: &CircuitDescription, initial: &ComplexVector) -> ComplexVector {
    let mut state = initial.data().to_vec();
    for g in &c.gates {
        apply_gate(&mut state, c.n_qubits, g);
    }
    ComplexVector::from_raw(state)
}

/// The full unitary; column `k` is the circuit applied to `|k⟩`.
pub fn circuit_unitary(c: &CircuitDescription) -> Result<ComplexMatrix> {
    if c.n_qubits > UNITARY_QUBIT_LIMIT {
        return Err(Error::SizeGuard(format!(
            "unitary of {} qubits exceeds the limit of {UNITARY_QUBIT_LIMIT}",
            c.n_qubits
        )));
    }
    let dim = 1usize << c.n_qubits;
    let mut u = ComplexMatrix::zeros(dim, dim);
    for k in 0..dim {
        let col = simulate(c, &ComplexVector::basis(dim, k))?;
        for (r, z) in col.data().iter().enumerate() {
            u[(r, k)] = *z;
        }
    }
    Ok(u)
}

/// A circuit realizing `Σ α_i A_i / Σ|α_i|` on the system register after
/// postselecting every ancilla on |0⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct LcuCircuit {
    pub circuit: CircuitDescription,
    pub n_ancilla: usize,
    pub n_system: usize,
    /// `√(|α_i| / Σ|α_j|)`, padded with zeros to `2^n_ancilla`.
    pub prepare_amplitudes: Vec<f64>,
    /// `Σ|α_i|`; postselected output times this is the term-sum action.
    pub scale: f64,
}

impl LcuCircuit {
    /// Ancilla outcome kept by postselection.
    pub fn postselect(&self) -> usize {
        0
    }

    /// Postselected (unnormalized) system state for input `ψ`.
    pub fn run(&self, psi: &ComplexVector) -> Result<ComplexVector> {
        if psi.dim() != 1 << self.n_system {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit system given a dim {} state",
                self.n_system,
                psi.dim()
            )));
        }
        let mut full = vec![ZERO; 1 << self.circuit.n_qubits];
        full[..psi.dim()].copy_from_slice(psi.data());
        let out = simulate(&self.circuit, &ComplexVector::from_raw(full))?;
        Ok(ComplexVector::from_raw(out.data()[..psi.dim()].to_vec()))
    }

    /// `(Σ α_i A_i) ψ` recovered from the postselected state.
    pub fn apply(&self, psi: &ComplexVector) -> Result<ComplexVector> {
        Ok(self.run(psi)?.scale(Complex::new(self.scale, 0.0)))
    }
}

fn ceil_log2(r: usize) -> usize {
    r.next_power_of_two().trailing_zeros() as usize
}

fn pattern(value: usize, bits: usize) -> Vec<Control> {
    (0..bits)
        .map(|q| Control {
            qubit: q,
            on_one: (value >> (bits - 1 - q)) & 1 == 1,
        })
        .collect()
}

/// Cascade of controlled rotations taking |0…0⟩ to `Σ a_k |k⟩` for real
/// non-negative `a`.
fn prepare_gates(amps: &[f64], bits: usize) -> Vec<Gate> {
    let mut weights = amps.iter().map(|a| a * a).collect::<Vec<_>>();
    // levels[l][p] = mass below prefix p of length l
    let mut levels = vec![Vec::new(); bits + 1];
    levels[bits] = std::mem::take(&mut weights);
    for l in (0..bits).rev() {
        levels[l] = levels[l + 1].chunks(2).map(|w| w[0] + w[1]).collect();
    }
    let mut gates = Vec::new();
    for l in 0..bits {
        for (p, &total) in levels[l].iter().enumerate() {
            if total <= 0.0 {
                continue;
            }
            let c = (levels[l + 1][2 * p] / total).sqrt();
            let s = (levels[l + 1][2 * p + 1] / total).sqrt();
            if s == 0.0 {
                continue;
            }
            let matrix = Mat2::from_real([[c, -s], [s, c]]);
            gates.push(if l == 0 {
                Gate::G1 { target: 0, matrix }
            } else {
                Gate::CG1 {
                    target: l,
                    controls: pattern(p, l),
                    matrix,
                }
            });
        }
    }
    gates
}

/// Builds the prepare / select / un-prepare circuit for a sum of terms with
/// unitary factors. Ancilla qubits come first; term `i` is selected by the
/// ancilla pattern `i` and the phase of `α_i` is folded into its first factor.
pub fn lcu_synthesize(terms: &TermSum<TensorTermOperator>) -> Result<LcuCircuit> {
    let r = terms.len();
    if r == 0 {
        return Err(Error::InvalidArgument("cannot synthesize an empty term sum".into()));
    }
    for (i, t) in terms.terms().iter().enumerate() {
        for (k, q) in t.factors.iter().enumerate() {
            let defect = q.unitarity_defect();
            if defect > UNITARY_TOL {
                return Err(Error::NonUnitary(format!(
                    "term {i} factor {k} has unitarity defect {defect:e}; split it first"
                )));
            }
        }
    }
    let n_system = terms.factor_count();
    let n_ancilla = ceil_log2(r);
    let scale: f64 = terms.terms().iter().map(|t| t.alpha.norm()).sum();
    if scale == 0.0 {
        return Err(Error::InvalidArgument("all term coefficients are zero".into()));
    }
    let mut amps = vec![0.0; 1 << n_ancilla];
    for (a, t) in amps.iter_mut().zip(terms.terms()) {
        *a = (t.alpha.norm() / scale).sqrt();
    }

    let prepare = prepare_gates(&amps, n_ancilla);
    let mut gates = prepare.clone();
    for (i, t) in terms.terms().iter().enumerate() {
        let norm = t.alpha.norm();
        if norm == 0.0 {
            continue;
        }
        let phase = t.alpha / norm;
        for (k, q) in t.factors.iter().enumerate() {
            let matrix = if k == 0 { q.scale(phase) } else { *q };
            let target = n_ancilla + k;
            gates.push(if n_ancilla == 0 {
                Gate::G1 { target, matrix }
            } else {
                Gate::CG1 {
                    target,
                    controls: pattern(i, n_ancilla),
                    matrix,
                }
            });
        }
    }
    gates.extend(prepare.iter().rev().map(Gate::adjoint));
    Ok(LcuCircuit {
        circuit: CircuitDescription::new(n_ancilla + n_system, gates)?,
        n_ancilla,
        n_system,
        prepare_amplitudes: amps,
        scale,
    })
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_matrix(out: &mut String, m: &Mat2) {
    for z in m.0.iter().flatten() {
        let _ = write!(out, " {} {}", fmt_f64(z.re), fmt_f64(z.im));
    }
}

/// Text form: a `CIRCUIT n=<qubits>` header and one gate per line.
pub fn circuit_to_string(c: &CircuitDescription) -> String {
    let mut out = format!("CIRCUIT n={}\n", c.n_qubits);
    for g in &c.gates {
        match g {
            Gate::Ry { target, theta } => {
                let _ = write!(out, "RY {target} {}", fmt_f64(*theta));
            }
            Gate::CRy {
                control,
                target,
                theta,
            } => {
                let _ = write!(out, "CRY {control} {target} {}", fmt_f64(*theta));
            }
            Gate::G1 { target, matrix } => {
                let _ = write!(out, "G1 {target}");
                fmt_matrix(&mut out, matrix);
            }
            Gate::CG1 {
                target,
                controls,
                matrix,
            } => {
                let _ = write!(out, "CG1 {target}");
                for ctl in controls {
                    let _ = write!(out, " {}:{}", ctl.qubit, u8::from(ctl.on_one));
                }
                fmt_matrix(&mut out, matrix);
            }
        }
        out.push('\n');
    }
    out
}

pub fn export_circuit(c: &CircuitDescription, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, circuit_to_string(c))?;
    Ok(())
}

pub fn parse_circuit(path: impl AsRef<Path>) -> Result<CircuitDescription> {
    parse_circuit_str(&std::fs::read_to_string(path)?)
}

pub fn parse_circuit_str(text: &str) -> Result<CircuitDescription> {
    let mut n_qubits = None;
    let mut gates = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some(n) = n_qubits else {
            n_qubits = Some(parse_header(&tokens).map_err(|m| Error::parse(line, m))?);
            continue;
        };
        let gate = parse_gate(&tokens).map_err(|m| Error::parse(line, m))?;
        check_gate(&gate, n).map_err(|m| Error::parse(line, m))?;
        gates.push(gate);
    }
    let n_qubits = n_qubits.ok_or_else(|| Error::parse(1, "missing CIRCUIT header"))?;
    Ok(CircuitDescription { n_qubits, gates })
}

fn parse_header(tokens: &[&str]) -> std::result::Result<usize, String> {
    match tokens {
        ["CIRCUIT", arg] => {
            let n = arg
                .strip_prefix("n=")
                .ok_or_else(|| format!("expected n=<qubits>, got {arg:?}"))?;
            let n: usize = n.parse().map_err(|_| format!("bad qubit count {n:?}"))?;
            if n == 0 {
                return Err("circuit needs at least one qubit".into());
            }
            Ok(n)
        }
        _ => Err("expected header `CIRCUIT n=<qubits>`".into()),
    }
}

fn index(tok: &str) -> std::result::Result<usize, String> {
    tok.parse().map_err(|_| format!("bad qubit index {tok:?}"))
}

fn float(tok: &str) -> std::result::Result<f64, String> {
    let x: f64 = tok.parse().map_err(|_| format!("bad number {tok:?}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("non-finite number {tok:?}"))
    }
}

fn matrix(tokens: &[&str]) -> std::result::Result<Mat2, String> {
    if tokens.len() != 8 {
        return Err(format!("expected 8 matrix numbers, got {}", tokens.len()));
    }
    let v = tokens
        .chunks(2)
        .map(|p| Ok(Complex::new(float(p[0])?, float(p[1])?)))
        .collect::<std::result::Result<Vec<_>, String>>()?;
    Ok(Mat2::from_slice(&v))
}

fn parse_gate(tokens: &[&str]) -> std::result::Result<Gate, String> {
    match tokens {
        ["RY", t, theta] => Ok(Gate::Ry {
            target: index(t)?,
            theta: float(theta)?,
        }),
        ["CRY", c, t, theta] => Ok(Gate::CRy {
            control: index(c)?,
            target: index(t)?,
            theta: float(theta)?,
        }),
        ["G1", t, rest @ ..] => Ok(Gate::G1 {
            target: index(t)?,
            matrix: matrix(rest)?,
        }),
        ["CG1", t, rest @ ..] => {
            let split = rest.iter().take_while(|s| s.contains(':')).count();
            let controls = rest[..split]
                .iter()
                .map(|s| {
                    let (q, p) = s.split_once(':').unwrap();
                    let on_one = match p {
                        "0" => false,
                        "1" => true,
                        _ => return Err(format!("bad control polarity {p:?}")),
                    };
                    Ok(Control {
                        qubit: index(q)?,
                        on_one,
                    })
                })
                .collect::<std::result::Result<_, String>>()?;
            Ok(Gate::CG1 {
                target: index(t)?,
                controls,
                matrix: matrix(&rest[split..])?,
            })
        }
        [kind, ..] => Err(format!("unknown or malformed gate {kind:?}")),
        [] => Err("empty line".into()),
    }
}
