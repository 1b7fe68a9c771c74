use crate::circuit::{CircuitDescription, Gate};
use crate::error::{Error, Result};

use super::Rng;

/// Layered Ry / controlled-Ry circuit with normally distributed angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VqcSpec {
    pub n: usize,
    pub depth: usize,
    pub seed: u64,
}

impl VqcSpec {
    pub fn new(n: usize, depth: usize, seed: u64) -> Self {
        Self { n, depth, seed }
    }
}

/// Each block of depth 4 is: Ry on every qubit, CRy on pairs `(2k, 2k+1)`,
/// Ry on every qubit, CRy on pairs `(2k+1, 2k+2)`. Angles are drawn in gate
/// order.
pub fn vqc_build(spec: &VqcSpec) -> Result<CircuitDescription> {
    vqc_with_angles(spec, |rng| rng.normal())
}

pub(crate) fn vqc_with_angles(spec: &VqcSpec, mut angle: impl FnMut(&mut Rng) -> f64) -> Result<CircuitDescription> {
    let n = spec.n;
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("VQC needs an even qubit count, got {n}")));
    }
    if spec.depth == 0 || !spec.depth.is_multiple_of(4) {
        return Err(Error::InvalidArgument(format!(
            "VQC depth must be a positive multiple of 4, got {}",
            spec.depth
        )));
    }
    let mut rng = Rng::new(spec.seed);
    let mut gates = Vec::new();
    for _ in 0..spec.depth / 4 {
        for offset in [0, 1] {
            for target in 0..n {
                gates.push(Gate::Ry {
                    target,
                    theta: angle(&mut rng),
                });
            }
            for control in (offset..n - 1).step_by(2) {
                gates.push(Gate::CRy {
                    control,
                    target: control + 1,
                    theta: angle(&mut rng),
                });
            }
        }
    }
    CircuitDescription::new(n, gates)
}
