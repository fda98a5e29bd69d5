//! Hamiltonians of XX-coupled chains of PT-symmetric non-Hermitian qubits.
//!
//! The annealing Hamiltonian is
//!
//! ```text
//! H(s) = (1 − s) H_in + s H_f + Σ_n (−1)^n iγ σ_n^z
//! H_in = Σ_n Δ/2 σ_n^x
//! H_f  = ½ Σ_{n<m} g(m − n) (σ_n^x σ_m^x + σ_n^y σ_m^y) + Σ_n ε/2 σ_n^z
//! ```
//!
//! with qubits numbered from 1. Basis states are ordered with qubit 1 as the
//! most significant bit and `|↑⟩` (σ^z = +1) as bit value 0, so for two
//! qubits the basis is `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::operator::{Operator, StateVector, C64, I};

/// Largest chain the dense representation is meant for (dim = 64).
pub const MAX_QUBITS: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("number of qubits must be between 1 and {MAX_QUBITS}, got {0}")]
    QubitCount(usize),
    #[error("qubit index {index} out of range 1..={n_qubits}")]
    QubitIndex { index: usize, n_qubits: usize },
    #[error("parameter {name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("gain/loss γ must be non-negative, got {0}")]
    NegativeGamma(f64),
    #[error("transition amplitude Δ must be non-zero")]
    ZeroDelta,
    #[error("coupling distance must be in 1..{n_qubits}, got {distance}")]
    CouplingDistance { distance: usize, n_qubits: usize },
    #[error("operator dimension {dim} does not match 2^{n_qubits}")]
    DimensionMismatch { dim: usize, n_qubits: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// Physical parameters of the chain, in units of Δ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    n_qubits: usize,
    delta: f64,
    epsilon: f64,
    gamma: f64,
    /// Qubit-pair distance → XX coupling strength.
    coupling: BTreeMap<usize, f64>,
}

impl ChainParams {
    /// Two qubits with Δ = 1 and nearest-neighbour coupling `g`.
    pub fn two_qubit(epsilon: f64, gamma: f64, g: f64) -> Result<Self, ModelError> {
        Self::new(2, epsilon, gamma, BTreeMap::from([(1, g)]))
    }

    /// A chain of `n_qubits` with Δ = 1 and the given coupling map.
    pub fn new(
        n_qubits: usize,
        epsilon: f64,
        gamma: f64,
        coupling: BTreeMap<usize, f64>,
    ) -> Result<Self, ModelError> {
        let params = Self { n_qubits, delta: 1.0, epsilon, gamma, coupling };
        params.validate()?;
        Ok(params)
    }

    /// Nearest-neighbour chain with coupling `g`.
    pub fn chain(n_qubits: usize, epsilon: f64, gamma: f64, g: f64) -> Result<Self, ModelError> {
        let coupling = if n_qubits > 1 { BTreeMap::from([(1, g)]) } else { BTreeMap::new() };
        Self::new(n_qubits, epsilon, gamma, coupling)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(ModelError::QubitCount(self.n_qubits));
        }
        for (name, value) in
            [("delta", self.delta), ("epsilon", self.epsilon), ("gamma", self.gamma)]
        {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { name, value });
            }
        }
        if self.delta == 0.0 {
            return Err(ModelError::ZeroDelta);
        }
        if self.gamma < 0.0 {
            return Err(ModelError::NegativeGamma(self.gamma));
        }
        for (&distance, &value) in &self.coupling {
            if distance == 0 || distance >= self.n_qubits {
                return Err(ModelError::CouplingDistance { distance, n_qubits: self.n_qubits });
            }
            if !value.is_finite() {
                return Err(ModelError::NonFinite { name: "coupling", value });
            }
        }
        Ok(())
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self, ModelError> {
        let p = Self { gamma, ..self.clone() };
        p.validate()?;
        Ok(p)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self, ModelError> {
        let p = Self { epsilon, ..self.clone() };
        p.validate()?;
        Ok(p)
    }

    /// Copy with Δ changed; all other values keep their absolute scale.
    pub fn with_delta(&self, delta: f64) -> Result<Self, ModelError> {
        let p = Self { delta, ..self.clone() };
        p.validate()?;
        Ok(p)
    }

    /// The same chain with γ = 0.
    pub fn hermitian(&self) -> Self {
        Self { gamma: 0.0, ..self.clone() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn coupling(&self) -> &BTreeMap<usize, f64> {
        &self.coupling
    }

    /// Nearest-neighbour coupling g(1); zero if absent.
    pub fn g(&self) -> f64 {
        self.coupling.get(&1).copied().unwrap_or(0.0)
    }

    /// PT symmetry holds for every parameter set only for even chains.
    pub fn is_pt_guaranteed(&self) -> bool {
        self.n_qubits.is_multiple_of(2)
    }
}

fn single_qubit(axis: PauliAxis) -> Operator {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    match axis {
        PauliAxis::X => Operator::from_rows(2, &[z, o, o, z]),
        PauliAxis::Y => Operator::from_rows(2, &[z, -I, I, z]),
        PauliAxis::Z => Operator::from_rows(2, &[o, z, z, -o]),
    }
}

/// Embeds a single-qubit Pauli matrix at `qubit_index` (1-based) of an
/// `n_qubits` chain.
pub fn pauli_operator(
    axis: PauliAxis,
    qubit_index: usize,
    n_qubits: usize,
) -> Result<Operator, ModelError> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(ModelError::QubitCount(n_qubits));
    }
    if qubit_index == 0 || qubit_index > n_qubits {
        return Err(ModelError::QubitIndex { index: qubit_index, n_qubits });
    }
    let pauli = single_qubit(axis);
    let id = Operator::identity(2);
    let mut out = Operator::identity(1);
    for q in 1..=n_qubits {
        out = out.kron(if q == qubit_index { &pauli } else { &id });
    }
    Ok(out)
}

fn pauli(axis: PauliAxis, q: usize, n: usize) -> Operator {
    pauli_operator(axis, q, n).expect("validated qubit index")
}

/// `H(s) = base + s · slope`, the form every annealing Hamiltonian here takes.
///
/// `energy_unit` is the Δ used to make the driven Schrödinger equation
/// dimensionless.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineHamiltonian {
    pub base: Operator,
    pub slope: Operator,
    pub energy_unit: f64,
}

impl AffineHamiltonian {
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn at(&self, s: f64) -> Operator {
        &self.base + &(&self.slope * s)
    }

    /// Writes `H(s) · x` into `out` without forming H(s).
    pub fn apply_into(&self, s: f64, x: &[C64], out: &mut [C64]) {
        let n = self.dim();
        let base = self.base.matrix();
        let slope = self.slope.matrix();
        for (r, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = C64::new(0.0, 0.0);
            for (c, xc) in x.iter().enumerate() {
                acc += (base[(r, c)] + slope[(r, c)] * s) * xc;
            }
            *o = acc;
        }
    }
}

/// `H_in = Σ Δ/2 σ^x`
pub fn initial_hamiltonian(params: &ChainParams) -> Operator {
    let n = params.n_qubits;
    let mut h = Operator::zeros(params.dim());
    for q in 1..=n {
        h = &h + &(&pauli(PauliAxis::X, q, n) * (params.delta / 2.0));
    }
    h
}

/// `H_f`: XX couplings plus bias.
pub fn final_hamiltonian(params: &ChainParams) -> Operator {
    let n = params.n_qubits;
    let mut h = Operator::zeros(params.dim());
    for a in 1..=n {
        for b in (a + 1)..=n {
            let Some(&g) = params.coupling.get(&(b - a)) else { continue };
            let xx = &pauli(PauliAxis::X, a, n) * &pauli(PauliAxis::X, b, n);
            let yy = &pauli(PauliAxis::Y, a, n) * &pauli(PauliAxis::Y, b, n);
            h = &h + &(&(&xx + &yy) * (g / 2.0));
        }
        h = &h + &(&pauli(PauliAxis::Z, a, n) * (params.epsilon / 2.0));
    }
    h
}

/// Staggered gain/loss `Σ (−1)^n iγ σ_n^z`, n from 1.
pub fn gain_loss_term(params: &ChainParams) -> Operator {
    let n = params.n_qubits;
    let mut h = Operator::zeros(params.dim());
    for q in 1..=n {
        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
        h = &h + &pauli(PauliAxis::Z, q, n).scale(I * (sign * params.gamma));
    }
    h
}

/// The annealing Hamiltonian in affine form, `H(s) = (H_in + gain/loss) + s (H_f − H_in)`.
pub fn hamiltonian_parts(params: &ChainParams) -> AffineHamiltonian {
    if !params.is_pt_guaranteed() {
        log::warn!(
            "odd chain (N = {}): PT symmetry of the Hamiltonian is not guaranteed",
            params.n_qubits
        );
    }
    let h_in = initial_hamiltonian(params);
    let h_f = final_hamiltonian(params);
    AffineHamiltonian {
        base: &h_in + &gain_loss_term(params),
        slope: &h_f - &h_in,
        energy_unit: params.delta,
    }
}

/// `H(s)`. Values of `s` outside `[0, 1]` are allowed for diagnostics but logged.
pub fn build_hamiltonian(params: &ChainParams, s: f64) -> Operator {
    if !(0.0..=1.0).contains(&s) {
        log::warn!("annealing parameter s = {s} lies outside [0, 1]");
    }
    let h_in = initial_hamiltonian(params);
    let h_f = final_hamiltonian(params);
    let mixed = &(&h_in * (1.0 - s)) + &(&h_f * s);
    &mixed + &gain_loss_term(params)
}

/// Basis-index permutation for chain reversal `n ↔ N + 1 − n`.
fn reversed_index(index: usize, n_qubits: usize) -> usize {
    let mut out = 0;
    for bit in 0..n_qubits {
        if index & (1 << bit) != 0 {
            out |= 1 << (n_qubits - 1 - bit);
        }
    }
    out
}

/// `P · conj(op) · P⁻¹`, where P reverses the chain (for two qubits the
/// exchange 1 ↔ 2) and conjugation implements time reversal.
pub fn pt_transform(op: &Operator, n_qubits: usize) -> Result<Operator, ModelError> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(ModelError::QubitCount(n_qubits));
    }
    let dim = 1usize << n_qubits;
    if op.dim() != dim {
        return Err(ModelError::DimensionMismatch { dim: op.dim(), n_qubits });
    }
    let mut out = Operator::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            out.set(
                reversed_index(r, n_qubits),
                reversed_index(c, n_qubits),
                op.get(r, c).conj(),
            );
        }
    }
    Ok(out)
}

/// Normalized ground state of `H_in`: each qubit in the σ^x ground state,
/// `(|↑⟩ − |↓⟩)/√2` for Δ > 0.
pub fn initial_ground_state(params: &ChainParams) -> StateVector {
    let n = params.n_qubits;
    let sign: f64 = if params.delta > 0.0 { -1.0 } else { 1.0 };
    let norm = (0.5f64).powf(n as f64 / 2.0);
    let amplitudes = (0..params.dim())
        .map(|idx| {
            let downs = (idx as u32).count_ones() as i32;
            C64::new(norm * sign.powi(downs), 0.0)
        })
        .collect();
    StateVector::new(amplitudes)
}
