//! Closed-form transition probability for a linear sweep through the
//! PT-broken window of the reduced two-level model.
//!
//! With `X = 2πℓ² / ((g − w) k Δ)` the final amplitudes satisfy
//! `|ψ↓|² = e^X`, `|ψ↑|² = e^X − 1`, so the ground-state probability is
//! `P = (e^X − 1)/(2e^X − 1)`.

use serde::Serialize;
use thiserror::Error;

use crate::effective::EffectiveModel;

/// Validity parameter above which the asymptotic formula is trusted.
pub const V_MIN: f64 = 10.0;

/// Exponent beyond which `e^X` is not formed explicitly.
const LARGE_EXPONENT: f64 = 700.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LzsError {
    #[error("formula requires g − w > 0, got g − w = {0}")]
    SlopeOrder(f64),
    #[error("sweep speed k must be positive, got {0}")]
    InvalidSpeed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LzsResult {
    pub exponent: f64,
    pub p_ground: f64,
    /// `e^X`; infinite once it leaves the `f64` range.
    pub psi_down_sq: f64,
    /// `e^X − 1`; infinite once it leaves the `f64` range.
    pub psi_up_sq: f64,
    pub validity: f64,
}

impl LzsResult {
    pub fn is_trusted(&self) -> bool {
        self.validity >= V_MIN
    }
}

fn check(eff: &EffectiveModel, k: f64) -> Result<f64, LzsError> {
    if k.is_nan() || k <= 0.0 {
        return Err(LzsError::InvalidSpeed(k));
    }
    let slope_gap = eff.g - eff.w;
    if slope_gap.is_nan() || slope_gap <= 0.0 {
        return Err(LzsError::SlopeOrder(slope_gap));
    }
    Ok(slope_gap)
}

/// `X = 2πℓ² / ((g − w) k Δ)`.
pub fn lzs_exponent(eff: &EffectiveModel, k: f64) -> Result<f64, LzsError> {
    let slope_gap = check(eff, k)?;
    Ok(2.0 * std::f64::consts::PI * eff.ell * eff.ell / (slope_gap * k * eff.delta()))
}

/// `P(X) = (e^X − 1)/(2e^X − 1)`, evaluated without overflow.
pub fn probability_from_exponent(x: f64) -> f64 {
    if x > LARGE_EXPONENT {
        // 0.5·(1 − e^{−X}/(2 − e^{−X})), with the correction far below f64 resolution.
        0.5 - 0.5 * (-x).exp()
    } else {
        let m = x.exp_m1();
        m / (2.0 * m + 1.0)
    }
}

/// Ground-state probability after the sweep from `s̃ = −s_cr` to `1 − s_cr`.
pub fn lzs_probability(eff: &EffectiveModel, k: f64) -> Result<LzsResult, LzsError> {
    let exponent = lzs_exponent(eff, k)?;
    let psi_down_sq = exponent.exp();
    Ok(LzsResult {
        exponent,
        p_ground: probability_from_exponent(exponent),
        psi_down_sq,
        psi_up_sq: exponent.exp_m1(),
        validity: lzs_validity(eff, k, 1.0 - eff.s_cr)?,
    })
}

/// `v = s̃_f √((g − w)/(kΔ))`; the formula assumes `v ≫ 1`.
pub fn lzs_validity(eff: &EffectiveModel, k: f64, s_tilde_f: f64) -> Result<f64, LzsError> {
    let slope_gap = check(eff, k)?;
    Ok(s_tilde_f * (slope_gap / (k * eff.delta())).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::effective_params;
    use crate::model::ChainParams;

    fn eff(eps: f64, gamma: f64) -> EffectiveModel {
        effective_params(&ChainParams::two_qubit(eps, gamma, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn hermitian_limit_is_zero() {
        let r = lzs_probability(&eff(0.0, 0.0), 0.01).unwrap();
        assert_eq!(r.exponent, 0.0);
        assert_eq!(r.p_ground, 0.0);
        assert_eq!(r.psi_down_sq, 1.0);
        assert_eq!(r.psi_up_sq, 0.0);
    }

    #[test]
    fn slow_sweep_saturates_at_half() {
        let e = eff(0.0, 0.1);
        let r = lzs_probability(&e, 0.001).unwrap();
        assert!((r.exponent - 18.95).abs() < 0.01);
        assert!((r.p_ground - 0.5).abs() < 1e-8);
        assert!(r.p_ground < 0.5);
        let tiny = lzs_probability(&e, 1e-9).unwrap();
        assert_eq!(tiny.p_ground, 0.5);
        assert!(tiny.psi_down_sq.is_infinite());
    }

    #[test]
    fn decomposition_reproduces_probability() {
        let e = eff(0.9, 0.1);
        for &k in &[0.5, 0.05, 0.01, 0.003] {
            let r = lzs_probability(&e, k).unwrap();
            let from_parts = r.psi_up_sq / (r.psi_up_sq + r.psi_down_sq);
            assert!((from_parts - r.p_ground).abs() < 1e-14);
        }
    }

    #[test]
    fn validity_examples() {
        let e = eff(0.0, 0.1);
        let v = lzs_validity(&e, 0.001, 1.0 - e.s_cr).unwrap();
        assert!((v - 0.586 * 2276f64.sqrt()).abs() < 0.1);
        assert!((v - 28.0).abs() < 0.1);
        assert!(!lzs_probability(&e, 0.5).unwrap().is_trusted());
        assert_eq!(lzs_validity(&e, 0.01, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors() {
        let mut e = eff(0.0, 0.1);
        assert!(matches!(lzs_probability(&e, 0.0), Err(LzsError::InvalidSpeed(_))));
        e.w = e.g + 0.1;
        assert!(matches!(lzs_probability(&e, 0.01), Err(LzsError::SlopeOrder(_))));
    }

    #[test]
    fn large_exponent_branch_is_continuous() {
        let below = probability_from_exponent(LARGE_EXPONENT);
        let above = probability_from_exponent(LARGE_EXPONENT + 1e-9);
        assert!((below - above).abs() < 1e-15);
    }
}
