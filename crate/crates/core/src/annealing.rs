//! Full-chain annealing runs and their ground-state success probability.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{self, DynamicsError, ModelHandle, OdeOptions, Schedule};
use crate::model::{build_hamiltonian, ChainParams};
use crate::operator::{StateVector, C64};

/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Ground-state gap below which the result is flagged as near-degenerate.
pub const NEAR_DEGENERATE_GAP: f64 = 1e-6;
/// Total overlap weight below which the ground probability is undefined.
pub const TAU_WEIGHT: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnealError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("total overlap weight vanished ({0:e})")]
    VanishingWeight(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub energy: f64,
    pub vector: StateVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianBasis {
    /// Ascending in energy.
    pub pairs: Vec<EigenPair>,
    /// Set when the two lowest levels are closer than [`NEAR_DEGENERATE_GAP`].
    pub near_degenerate: bool,
}

/// Scales `v` so that its largest-magnitude component (the first one, among
/// components equal in magnitude to rounding) is real and positive.
fn fix_phase(v: &mut DVector<C64>) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-9)).copied().unwrap();
    let phase = pivot.conj() / pivot.norm();
    *v *= phase;
}

/// Orthonormal basis of the span of `cluster`, built by Gram–Schmidt on the
/// projections of the standard basis vectors in index order.
fn canonical_cluster_basis(cluster: &[DVector<C64>]) -> Vec<DVector<C64>> {
    let n = cluster[0].len();
    let mut out: Vec<DVector<C64>> = Vec::with_capacity(cluster.len());
    for i in 0..n {
        if out.len() == cluster.len() {
            break;
        }
        let mut v = DVector::<C64>::zeros(n);
        for c in cluster {
            v += c * c[i].conj();
        }
        for q in &out {
            let proj = q.dotc(&v);
            v -= q * proj;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            out.push(v / C64::new(norm, 0.0));
        }
    }
    out
}

/// Eigenpairs of the Hermitian (γ = 0) Hamiltonian at `s`.
pub fn hermitian_eigenbasis(params: &ChainParams, s: f64) -> HermitianBasis {
    let h = build_hamiltonian(&params.hermitian(), s);
    let eig = SymmetricEigen::new(h.into_matrix());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let columns: Vec<DVector<C64>> = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();

    let mut vectors: Vec<DVector<C64>> = Vec::with_capacity(columns.len());
    let mut start = 0;
    while start < energies.len() {
        let mut end = start + 1;
        while end < energies.len() && energies[end] - energies[end - 1] < DEGENERACY_TOL {
            end += 1;
        }
        if end - start == 1 {
            vectors.push(columns[start].clone());
        } else {
            vectors.extend(canonical_cluster_basis(&columns[start..end]));
        }
        start = end;
    }
    let pairs = energies
        .iter()
        .zip(vectors)
        .map(|(&energy, mut v)| {
            fix_phase(&mut v);
            EigenPair { energy, vector: StateVector::new(v.iter().copied().collect()) }
        })
        .collect();
    let near_degenerate = energies.len() > 1 && energies[1] - energies[0] < NEAR_DEGENERATE_GAP;
    HermitianBasis { pairs, near_degenerate }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QaaResult {
    /// Overlaps `a_i = ⟨ψ_i(1)|Ψ(1)⟩` with the ascending Hermitian eigenbasis at `s = 1`,
    /// computed from the stored (power-of-two scaled) final state.
    pub coefficients: Vec<C64>,
    pub p_ground: f64,
    #[serde(skip)]
    pub final_state: StateVector,
    pub log2_scale: i64,
    #[serde(skip)]
    pub params: ChainParams,
    pub k: f64,
    pub near_degenerate: bool,
}

/// `|a₁|² / Σ|a_i|²`.
pub fn ground_probability(coefficients: &[C64]) -> Result<f64, AnnealError> {
    let total: f64 = coefficients.iter().map(|a| a.norm_sqr()).sum();
    if !(total > TAU_WEIGHT) || !total.is_finite() {
        return Err(AnnealError::VanishingWeight(total));
    }
    Ok(coefficients[0].norm_sqr() / total)
}

/// Anneals from the `s = 0` ground state to `s = 1` at speed `k`.
pub fn run_qaa(params: &ChainParams, k: f64) -> Result<QaaResult, AnnealError> {
    run_qaa_with(params, k, &OdeOptions::default())
}

pub fn run_qaa_with(params: &ChainParams, k: f64, opts: &OdeOptions) -> Result<QaaResult, AnnealError> {
    let psi0 = hermitian_eigenbasis(params, 0.0).pairs.swap_remove(0).vector;
    let model = ModelHandle::Full(params.clone());
    let traj = dynamics::evolve_driven_with(&model, Schedule::Linear { k }, &psi0, &[0.0, 1.0], opts)?;
    let last = traj.samples.into_iter().last().expect("two samples requested");
    let basis = hermitian_eigenbasis(params, 1.0);
    let coefficients: Vec<C64> = basis.pairs.iter().map(|p| p.vector.inner(&last.state)).collect();
    let p_ground = ground_probability(&coefficients)?;
    Ok(QaaResult {
        coefficients,
        p_ground,
        final_state: last.state,
        log2_scale: last.log2_scale,
        params: params.clone(),
        k,
        near_degenerate: basis.near_degenerate,
    })
}

/// Gram matrix `⟨v_i|v_j⟩` of the basis, for orthonormality checks.
pub fn gram_matrix(basis: &HermitianBasis) -> DMatrix<C64> {
    let n = basis.pairs.len();
    DMatrix::from_fn(n, n, |i, j| basis.pairs[i].vector.inner(&basis.pairs[j].vector))
}
