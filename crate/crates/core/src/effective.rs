//! Two-level reduction of the two-qubit problem around the crossing of its
//! two lowest levels.
//!
//! In the shifted coordinates `s̃ = s − s_cr`, `Ẽ = E − E_cr` the reduced
//! Hamiltonian is `[[−g s̃, iℓ], [iℓ, −w s̃]]` in the basis `|↑⟩, |↓⟩`.

use serde::Serialize;
use thiserror::Error;

use crate::model::ChainParams;
use crate::operator::{Operator, StateVector, C64, I};
use crate::spectrum::{self, SpectrumError};

#[derive(Debug, Error)]
pub enum EffectiveError {
    #[error("no level crossing: |epsilon| = {epsilon} must be below |g| = {g}")]
    NoCrossing { epsilon: f64, g: f64 },
    #[error("the two-level reduction is defined for two qubits, got {0}")]
    RequiresTwoQubits(usize),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EffectiveModel {
    pub s_cr: f64,
    pub e_cr: f64,
    pub g: f64,
    pub w: f64,
    pub ell: f64,
    pub source_params: ChainParams,
}

/// Slope of the second crossing branch as a function of the bias.
fn slope_w(delta: f64, g: f64, eps: f64, s: f64) -> f64 {
    let d2 = delta * delta;
    let g2 = g * g;
    let e2 = eps * eps;
    let numerator = g * s * (2.0 * d2 * (s - 1.0) - g2 * s + 5.0 * s * e2);
    let denominator = (-5.0 * g2 * s * s + s * s * e2 + d2 * (s - 1.0).powi(2)).powi(2);
    let factor = -d2 + 5.0 * g2 * s * s - d2 * s * s - s * s * e2 + 2.0 * d2 * s;
    numerator / denominator * factor
}

pub fn effective_params(params: &ChainParams) -> Result<EffectiveModel, EffectiveError> {
    if params.n_qubits() != 2 {
        return Err(EffectiveError::RequiresTwoQubits(params.n_qubits()));
    }
    let (s_cr, e_cr) = spectrum::crossing_point(params).map_err(|e| match e {
        SpectrumError::NoCrossing { epsilon, g } => EffectiveError::NoCrossing { epsilon, g },
        other => EffectiveError::Spectrum(other),
    })?;
    if params.gamma() >= params.delta().abs() {
        log::warn!(
            "gain/loss γ = {} is not small compared with Δ = {}; the two-level reduction may be inaccurate",
            params.gamma(),
            params.delta()
        );
    }
    let g = params.g();
    let eps = params.epsilon();
    Ok(EffectiveModel {
        s_cr,
        e_cr,
        g,
        w: slope_w(params.delta(), g, eps, s_cr),
        ell: 2.0 * params.gamma() * s_cr * (g * g - eps * eps).sqrt(),
        source_params: params.clone(),
    })
}

impl EffectiveModel {
    /// Energy unit Δ of the underlying chain.
    pub fn delta(&self) -> f64 {
        self.source_params.delta()
    }

    /// Range of `s̃` that corresponds to `s ∈ [0, 1]`.
    pub fn s_tilde_range(&self) -> (f64, f64) {
        (-self.s_cr, 1.0 - self.s_cr)
    }

    /// `s̃` values where the two levels coalesce, `±2ℓ/|g − w|`.
    pub fn exceptional_points(&self) -> Option<(f64, f64)> {
        if self.ell == 0.0 || self.g == self.w {
            return None;
        }
        let s = 2.0 * self.ell / (self.g - self.w).abs();
        Some((-s, s))
    }

    /// The constant and `s̃`-linear parts of the reduced Hamiltonian.
    pub fn affine_parts(&self) -> (Operator, Operator) {
        let zero = C64::new(0.0, 0.0);
        let off = I * self.ell;
        let base = Operator::from_rows(2, &[zero, off, off, zero]);
        let slope = Operator::diagonal(&[C64::new(-self.g, 0.0), C64::new(-self.w, 0.0)]);
        (base, slope)
    }

    /// Eigenvalues `Ẽ = −(g + w)s̃/2 ∓ √(((g − w)s̃/2)² − ℓ²)`; the lower real
    /// part comes first, or the positive imaginary part when they coalesce in
    /// real part.
    pub fn eigenvalues(&self, s_tilde: f64) -> [C64; 2] {
        let center = -(self.g + self.w) * s_tilde / 2.0;
        let half_split = (self.g - self.w) * s_tilde / 2.0;
        let disc = half_split * half_split - self.ell * self.ell;
        let root = if disc >= 0.0 {
            C64::new(disc.sqrt(), 0.0)
        } else {
            C64::new(0.0, (-disc).sqrt())
        };
        let c = C64::new(center, 0.0);
        if disc >= 0.0 {
            [c - root, c + root]
        } else {
            [c + root, c - root]
        }
    }

    /// `|(Ẽ + g s̃)(Ẽ + w s̃) + ℓ²|`
    pub fn secular_residual(&self, s_tilde: f64, e: C64) -> f64 {
        ((e + self.g * s_tilde) * (e + self.w * s_tilde) + self.ell * self.ell).norm()
    }

    /// Whether `s̃` lies strictly inside the PT-broken window `|s̃ (g − w)/2| < ℓ`.
    pub fn is_broken(&self, s_tilde: f64) -> bool {
        (s_tilde * (self.g - self.w) / 2.0).abs() < self.ell
    }
}

pub fn effective_hamiltonian(eff: &EffectiveModel, s_tilde: f64) -> Operator {
    let (base, slope) = eff.affine_parts();
    &base + &(&slope * s_tilde)
}

/// `(ω, decay) = (|Re(E₁ − E₂)|, |Im(E₁ − E₂)|)`.
pub fn effective_gap(eff: &EffectiveModel, s_tilde: f64) -> (f64, f64) {
    let [a, b] = eff.eigenvalues(s_tilde);
    let d = a - b;
    (d.re.abs(), d.im.abs())
}

/// The state `|↓⟩`, which is the lower level at the start of the sweep.
pub fn initial_down_state() -> StateVector {
    StateVector::basis(2, 1)
}

/// Largest distance between the shifted reduced eigenvalues `E_cr + Ẽ` and
/// the two lowest (by real part) eigenvalues of the full Hamiltonian at
/// `s_cr + s̃`, after optimal pairing.
pub fn reduction_deviation(eff: &EffectiveModel, s_tilde: f64) -> Result<f64, EffectiveError> {
    let h = crate::model::build_hamiltonian(&eff.source_params, eff.s_cr + s_tilde);
    let mut full = spectrum::eigenvalues(&h)?;
    full.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let [a, b] = eff.eigenvalues(s_tilde).map(|e| e + eff.e_cr);
    let straight = (a - full[0]).norm().max((b - full[1]).norm());
    let crossed = (a - full[1]).norm().max((b - full[0]).norm());
    Ok(straight.min(crossed))
}
