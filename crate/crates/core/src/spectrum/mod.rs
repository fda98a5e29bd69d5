//! Instantaneous spectra of `H(s)`: eigenvalues, PT-phase classification,
//! continuity-ordered branches, level crossings and exceptional points.

pub mod eigen;
pub mod matching;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{build_hamiltonian, ChainParams};
use crate::operator::{Operator, C64};

pub use eigen::{characteristic_polynomial, eigenvector};

/// Largest operator dimension accepted by [`eigenvalues`].
pub const MAX_DIM: usize = 64;
/// Relative tolerance separating real from complex eigenvalues.
pub const TAU_IM: f64 = 1e-9;
/// Conjugation-closure tolerance.
pub const TAU_CONJ: f64 = 1e-9;
/// Bracket width at which exceptional-point bisection stops.
pub const TAU_S: f64 = 1e-8;
/// Maximum eigenvalue gap (relative) accepted at an exceptional point.
pub const TAU_EP: f64 = 1e-3;
/// Minimum eigenvector overlap accepted at an exceptional point.
pub const EP_OVERLAP: f64 = 0.999;
/// Coarse scan resolution used to bracket exceptional points.
pub const EP_SCAN_POINTS: usize = 2001;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("operator dimension {dim} exceeds the supported maximum of {MAX_DIM}")]
    TooLarge { dim: usize },
    #[error("root finder did not converge for matrix {matrix}")]
    NonConvergence { matrix: String },
    #[error("eigenvalue {eigenvalue} has no conjugate partner within {tol:e}")]
    ConjugationViolation { eigenvalue: C64, tol: f64 },
    #[error("ambiguous branch matching at s = {s} (grid index {index}) between branches {branches:?}; refine the grid")]
    AmbiguousMatching { s: f64, index: usize, branches: (usize, usize) },
    #[error("invalid s grid: {0}")]
    InvalidGrid(String),
    #[error("no level crossing: |epsilon| = {epsilon} must be below |g| = {g}")]
    NoCrossing { epsilon: f64, g: f64 },
    #[error("operation requires two qubits, got {0}")]
    RequiresTwoQubits(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Phase {
    AllReal,
    PartiallyBroken(usize),
}

impl Phase {
    pub fn broken_pairs(self) -> usize {
        match self {
            Phase::AllReal => 0,
            Phase::PartiallyBroken(p) => p,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumPoint {
    pub s: f64,
    pub eigenvalues: Vec<C64>,
    pub phase: Phase,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumCurve {
    pub points: Vec<SpectrumPoint>,
}

impl SpectrumCurve {
    pub fn s_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.s).collect()
    }

    /// Values of continuity-ordered branch `j` along the grid.
    pub fn branch(&self, j: usize) -> Vec<C64> {
        self.points.iter().map(|p| p.eigenvalues[j]).collect()
    }

    pub fn n_branches(&self) -> usize {
        self.points.first().map_or(0, |p| p.eigenvalues.len())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExceptionalPoint {
    pub s_ep: f64,
    pub energy: C64,
    /// Zero-based positions of the coalescing pair in ascending-real-part order.
    pub branch_pair: (usize, usize),
}

/// All eigenvalues of a small dense operator, unordered.
pub fn eigenvalues(op: &Operator) -> Result<Vec<C64>, SpectrumError> {
    let dim = op.dim();
    if dim > MAX_DIM {
        return Err(SpectrumError::TooLarge { dim });
    }
    if dim == 0 {
        return Ok(Vec::new());
    }
    let scale = op.max_abs();
    if scale == 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); dim]);
    }
    let scaled = op.matrix() / C64::new(scale, 0.0);
    let mut coeffs = characteristic_polynomial(&scaled);
    let coeff_scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let is_real = coeffs.iter().all(|c| c.im.abs() <= 1e-12 * coeff_scale);
    if is_real {
        for c in coeffs.iter_mut() {
            c.im = 0.0;
        }
    }
    let mut roots = eigen::polynomial_roots(&coeffs).map_err(|_| SpectrumError::NonConvergence {
        matrix: format!("{:?}", op.matrix()),
    })?;
    if is_real {
        eigen::symmetrize_conjugates(&mut roots);
    }
    Ok(roots.into_iter().map(|z| z * scale).collect())
}

/// `|det(H − E·I)|` relative to the rounding bound of the characteristic polynomial.
pub fn relative_residual(op: &Operator, e: C64) -> f64 {
    let coeffs = characteristic_polynomial(op.matrix());
    let (p, _, bound) = eigen::horner(&coeffs, e);
    if bound == 0.0 {
        0.0
    } else {
        p.norm() / bound
    }
}

/// Magnitude of the two-qubit quartic secular polynomial at `e`.
pub fn secular_residual(params: &ChainParams, s: f64, e: C64) -> Result<f64, SpectrumError> {
    if params.n_qubits() != 2 {
        return Err(SpectrumError::RequiresTwoQubits(params.n_qubits()));
    }
    let d2 = params.delta().powi(2);
    let g = params.g();
    let eps = params.epsilon();
    let gam = params.gamma();
    let c2 = 4.0 * gam * gam - d2 - g * g * s * s - d2 * s * s - s * s * eps * eps + 2.0 * d2 * s;
    let c1 = -d2 * g * s.powi(3) + 2.0 * d2 * g * s * s - d2 * g * s;
    let c0 = -4.0 * gam * gam * s * s * eps * eps + g * g * s.powi(4) * eps * eps;
    Ok((e.powi(4) + e * e * c2 + e * c1 + c0).norm())
}

/// Phase tolerance for a given spectrum: `TAU_IM · max(1, spectral radius)`.
pub fn phase_tolerance(eigs: &[C64]) -> f64 {
    TAU_IM * eigs.iter().map(|e| e.norm()).fold(1.0, f64::max)
}

pub fn classify_phase(eigs: &[C64], tol: f64) -> Result<Phase, SpectrumError> {
    let conj_tol = tol.max(TAU_CONJ);
    let mut used = vec![false; eigs.len()];
    let mut complex = 0;
    for i in 0..eigs.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        if eigs[i].im.abs() < tol {
            continue;
        }
        let target = eigs[i].conj();
        let partner = (0..eigs.len())
            .filter(|&j| !used[j])
            .map(|j| (j, (eigs[j] - target).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match partner {
            Some((j, d)) if d < conj_tol => {
                used[j] = true;
                complex += 1;
            }
            _ => {
                return Err(SpectrumError::ConjugationViolation { eigenvalue: eigs[i], tol: conj_tol });
            }
        }
    }
    Ok(if complex == 0 { Phase::AllReal } else { Phase::PartiallyBroken(complex) })
}

fn sort_by_re_im(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

fn check_grid(s_grid: &[f64]) -> Result<(), SpectrumError> {
    if s_grid.is_empty() {
        return Err(SpectrumError::InvalidGrid("grid is empty".into()));
    }
    if s_grid.iter().any(|s| !s.is_finite()) {
        return Err(SpectrumError::InvalidGrid("grid contains non-finite values".into()));
    }
    if s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpectrumError::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Reorders raw per-point spectra into continuous branches.
///
/// Each point is matched against a linear extrapolation of the previous two
/// assigned points, so straight crossings keep their identity.
pub fn order_branches(s_grid: &[f64], raw: Vec<Vec<C64>>) -> Result<Vec<Vec<C64>>, SpectrumError> {
    check_grid(s_grid)?;
    assert_eq!(s_grid.len(), raw.len());
    let mut ordered: Vec<Vec<C64>> = Vec::with_capacity(raw.len());
    for (m, mut current) in raw.into_iter().enumerate() {
        sort_by_re_im(&mut current);
        if m == 0 {
            ordered.push(current);
            continue;
        }
        let prev = &ordered[m - 1];
        let reference: Vec<C64> = if m >= 2 {
            let older = &ordered[m - 2];
            let ratio = (s_grid[m] - s_grid[m - 1]) / (s_grid[m - 1] - s_grid[m - 2]);
            prev.iter().zip(older).map(|(p, o)| p + (p - o) * ratio).collect()
        } else {
            prev.clone()
        };
        let perm = matching::assign(&reference, &current);
        let assigned: Vec<C64> = perm.iter().map(|&k| current[k]).collect();
        let scale = assigned.iter().chain(prev.iter()).map(|e| e.norm()).fold(1.0, f64::max);
        if let Some(branches) = matching::find_ambiguity(&reference, &assigned, scale) {
            return Err(SpectrumError::AmbiguousMatching { s: s_grid[m], index: m, branches });
        }
        ordered.push(assigned);
    }
    Ok(ordered)
}

pub fn spectrum_sweep(params: &ChainParams, s_grid: &[f64]) -> Result<SpectrumCurve, SpectrumError> {
    check_grid(s_grid)?;
    let raw: Vec<Vec<C64>> = s_grid
        .par_iter()
        .map(|&s| eigenvalues(&build_hamiltonian(params, s)))
        .collect::<Result<_, _>>()?;
    let ordered = order_branches(s_grid, raw)?;
    let points = s_grid
        .iter()
        .zip(ordered)
        .map(|(&s, eigenvalues)| {
            let phase = classify_phase(&eigenvalues, phase_tolerance(&eigenvalues))?;
            Ok(SpectrumPoint { s, eigenvalues, phase })
        })
        .collect::<Result<_, SpectrumError>>()?;
    Ok(SpectrumCurve { points })
}

/// Two-qubit crossing point of the two lowest levels at zero gain/loss, `(s_cr, E_cr)`.
pub fn crossing_point(params: &ChainParams) -> Result<(f64, f64), SpectrumError> {
    if params.n_qubits() != 2 {
        return Err(SpectrumError::RequiresTwoQubits(params.n_qubits()));
    }
    let g = params.g();
    let eps = params.epsilon();
    if eps.abs() >= g.abs() {
        return Err(SpectrumError::NoCrossing { epsilon: eps, g });
    }
    let delta = params.delta();
    // Rationalised form of (√2·Δ√(g²−ε²) − Δ²)/(2g² − 2ε² − Δ²); it has no
    // removable singularity at 2(g²−ε²) = Δ².
    let root = std::f64::consts::SQRT_2 * (g * g - eps * eps).sqrt();
    let s_cr = delta / (delta + root);
    Ok((s_cr, -g * s_cr))
}

fn broken_pairs_at(params: &ChainParams, s: f64) -> Result<usize, SpectrumError> {
    let eigs = eigenvalues(&build_hamiltonian(params, s))?;
    Ok(classify_phase(&eigs, phase_tolerance(&eigs))?.broken_pairs())
}

fn closest_pair(eigs: &[C64]) -> (usize, usize) {
    let mut best = (0, 1);
    let mut best_d = f64::INFINITY;
    for i in 0..eigs.len() {
        for j in (i + 1)..eigs.len() {
            let d = (eigs[i] - eigs[j]).norm();
            if d < best_d {
                best_d = d;
                best = (i, j);
            }
        }
    }
    best
}

fn overlap(a: &nalgebra::DVector<C64>, b: &nalgebra::DVector<C64>) -> f64 {
    a.dotc(b).norm() / (a.norm() * b.norm())
}

/// Second-order exceptional points in `s_range`, located at the boundaries
/// between PT-unbroken and broken segments and validated by coalescence of
/// both eigenvalues and eigenvectors.
pub fn find_exceptional_points(
    params: &ChainParams,
    s_range: (f64, f64),
) -> Result<Vec<ExceptionalPoint>, SpectrumError> {
    let (lo, hi) = s_range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(SpectrumError::InvalidGrid(format!("invalid range [{lo}, {hi}]")));
    }
    if params.gamma() == 0.0 {
        return Ok(Vec::new());
    }
    let grid: Vec<f64> = (0..EP_SCAN_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / (EP_SCAN_POINTS - 1) as f64)
        .collect();
    let counts: Vec<usize> = grid
        .par_iter()
        .map(|&s| broken_pairs_at(params, s))
        .collect::<Result<_, _>>()?;

    let mut found = Vec::new();
    for k in 0..grid.len() - 1 {
        if counts[k] == counts[k + 1] {
            continue;
        }
        let broken_count = counts[k].max(counts[k + 1]);
        let left_broken = counts[k] == broken_count;
        let (mut a, mut b) = (grid[k], grid[k + 1]);
        while b - a > TAU_S {
            let mid = 0.5 * (a + b);
            let mid_broken = broken_pairs_at(params, mid)? >= broken_count;
            if mid_broken == left_broken {
                a = mid;
            } else {
                b = mid;
            }
        }
        let s_ep = 0.5 * (a + b);
        let unbroken_side = if left_broken { b } else { a };
        if let Some(ep) = validate_ep(params, s_ep, unbroken_side)? {
            found.push(ep);
        } else {
            log::debug!("rejected phase boundary at s = {s_ep}: not a coalescence");
        }
    }
    Ok(found)
}

fn validate_ep(params: &ChainParams, s_ep: f64, unbroken_side: f64) -> Result<Option<ExceptionalPoint>, SpectrumError> {
    let h = build_hamiltonian(params, s_ep);
    let eigs = eigenvalues(&h)?;
    let radius = eigs.iter().map(|e| e.norm()).fold(1.0, f64::max);
    let (i, j) = closest_pair(&eigs);
    if (eigs[i] - eigs[j]).norm() >= TAU_EP * radius {
        return Ok(None);
    }
    let vi = eigenvector(h.matrix(), eigs[i]);
    let vj = eigenvector(h.matrix(), eigs[j]);
    if overlap(&vi, &vj) <= EP_OVERLAP {
        return Ok(None);
    }
    let mut side = eigenvalues(&build_hamiltonian(params, unbroken_side))?;
    sort_by_re_im(&mut side);
    Ok(Some(ExceptionalPoint {
        s_ep,
        energy: (eigs[i] + eigs[j]) * 0.5,
        branch_pair: closest_pair(&side),
    }))
}
