//! Dense complex linear algebra over small Hilbert spaces.
//!
//! Basis order is the computational order. An augmented(m) register carries
//! ⊥ at index 2^m. Multi-register indices are row-major: in a pair of
//! registers of dimension d, |i⟩|j⟩ has index i·d + j.

pub mod linalg;
pub mod matrix;
pub mod measure;
pub mod operator;
pub mod random;
pub mod state;

pub use linalg::{hermitian_eigen, hermitian_eigenvalues, operator_norm, set_tolerance, tolerance, DEFAULT_TOL};
pub use matrix::{CMatrix, C64, ONE, ZERO};
pub use measure::{exact_distribution, measure, Projector, Pvm};
pub use operator::{OperatorKind, OperatorMatrix};
pub use state::{bottom_index, DensityMatrix, DimTag, PureState, QuantumState, Subsystem};

use crate::error::{Error, Result};
use state::check_dim;

/// Tensor product for states and operators.
pub trait Tensor {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for PureState {
    fn tensor(&self, other: &Self) -> Self {
        PureState::tensor(self, other)
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        DensityMatrix::tensor(self, other)
    }
}

impl Tensor for OperatorMatrix {
    fn tensor(&self, other: &Self) -> Self {
        OperatorMatrix::tensor(self, other)
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// U|ψ⟩ or UρU†.
pub fn apply<S: QuantumState>(u: &OperatorMatrix, s: &S) -> Result<S> {
    if u.kind() != OperatorKind::Unitary {
        return Err(Error::WrongKind { expected: "unitary", residual: f64::NAN });
    }
    check_dim(u.dim(), s.dim())?;
    Ok(s.evolve_unchecked(u.matrix()))
}

/// ⟨ψ|ρ|ψ⟩
pub fn fidelity(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    rho.fidelity_with(psi)
}

/// Applies `op` to the registers listed in `targets` (in that order) of a
/// vector living on registers with dimensions `dims`.
pub fn apply_to_registers(amps: &[C64], dims: &[usize], targets: &[usize], op: &CMatrix) -> Result<Vec<C64>> {
    let total: usize = dims.iter().product();
    check_dim(total, amps.len())?;
    let sub: usize = targets.iter().map(|&t| dims.get(t).copied().unwrap_or(0)).product();
    check_dim(sub, op.rows())?;
    check_dim(sub, op.cols())?;
    for (k, &t) in targets.iter().enumerate() {
        if t >= dims.len() || targets[..k].contains(&t) {
            return Err(Error::InvalidConfig(format!("bad target register list {targets:?}")));
        }
    }
    // stride of each register in the full index
    let mut strides = vec![1usize; dims.len()];
    for r in (0..dims.len().saturating_sub(1)).rev() {
        strides[r] = strides[r + 1] * dims[r + 1];
    }
    let digit = |i: usize, r: usize| (i / strides[r]) % dims[r];
    let sub_index = |i: usize| targets.iter().fold(0usize, |acc, &t| acc * dims[t] + digit(i, t));
    let clear = |i: usize| i - targets.iter().map(|&t| digit(i, t) * strides[t]).sum::<usize>();
    let place = |mut s: usize| {
        let mut off = 0;
        for &t in targets.iter().rev() {
            off += (s % dims[t]) * strides[t];
            s /= dims[t];
        }
        off
    };
    let offsets: Vec<usize> = (0..sub).map(place).collect();
    let mut out = vec![ZERO; total];
    for (i, &a) in amps.iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let t = sub_index(i);
        let base = clear(i);
        for (tp, off) in offsets.iter().enumerate() {
            let c = op[(tp, t)];
            if c != ZERO {
                out[base + off] += c * a;
            }
        }
    }
    Ok(out)
}
