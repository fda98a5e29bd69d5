//! Time evolution under static and annealing-driven non-Hermitian Hamiltonians.
//!
//! States are propagated without renormalization. Populations are
//! normalized only when they are read out, and the stored amplitudes are
//! kept representable by a power-of-two bookkeeping factor.

pub mod analysis;
pub mod expm;
pub mod ode;

use nalgebra::DVector;
use serde::Serialize;
use thiserror::Error;

use crate::effective::{initial_down_state, EffectiveModel};
use crate::model::{hamiltonian_parts, initial_ground_state, AffineHamiltonian, ChainParams};
use crate::operator::{Operator, StateVector, C64, I};

pub use ode::{OdeError, OdeOptions, OdeStats};

/// Norms at or below this are treated as vanished.
pub const TAU_ZERO: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("state norm vanished ({0:e}); populations are undefined")]
    VanishingNorm(f64),
    #[error("matrix exponential failed to converge for time step {dt}")]
    ExpmNonConvergence { dt: f64 },
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid sample grid: {0}")]
    InvalidGrid(String),
    #[error("state dimension {state} does not match Hamiltonian dimension {hamiltonian}")]
    DimensionMismatch { state: usize, hamiltonian: usize },
}

/// How the annealing parameter depends on time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Schedule {
    /// `s` frozen at `s0`; the sample grid is physical time in units of ħ/Δ.
    Constant { s0: f64 },
    /// `s = t/T` with speed `k = ħ/(ΔT)`; the sample grid is `s` itself.
    /// `k = ∞` describes an instantaneous (frozen-state) passage.
    Linear { k: f64 },
}

impl Schedule {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        match *self {
            Schedule::Constant { s0 } if !s0.is_finite() => {
                Err(DynamicsError::InvalidSchedule(format!("s0 must be finite, got {s0}")))
            }
            Schedule::Linear { k } if k.is_nan() || k <= 0.0 => {
                Err(DynamicsError::InvalidSchedule(format!("k must be positive, got {k}")))
            }
            _ => Ok(()),
        }
    }
}

/// The Hamiltonian family being driven.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelHandle {
    /// Full chain, parametrized by `s ∈ [0, 1]`.
    Full(ChainParams),
    /// Reduced two-level model, parametrized by `s̃ ∈ [−s_cr, 1 − s_cr]`.
    Effective(EffectiveModel),
}

impl ModelHandle {
    pub fn parts(&self) -> AffineHamiltonian {
        match self {
            ModelHandle::Full(p) => hamiltonian_parts(p),
            ModelHandle::Effective(e) => {
                let (base, slope) = e.affine_parts();
                AffineHamiltonian { base, slope, energy_unit: e.delta() }
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelHandle::Full(p) => p.dim(),
            ModelHandle::Effective(_) => 2,
        }
    }

    pub fn hamiltonian(&self, x: f64) -> Operator {
        self.parts().at(x)
    }

    /// Sweep interval of the schedule parameter.
    pub fn natural_range(&self) -> (f64, f64) {
        match self {
            ModelHandle::Full(_) => (0.0, 1.0),
            ModelHandle::Effective(e) => e.s_tilde_range(),
        }
    }

    /// Starting state of an annealing run: the `s = 0` ground state of the
    /// full chain, or `|↓⟩` for the reduced model.
    pub fn initial_state(&self) -> StateVector {
        match self {
            ModelHandle::Full(p) => initial_ground_state(p),
            ModelHandle::Effective(_) => initial_down_state(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    /// Time (static evolution) or schedule parameter (driven evolution).
    pub x: f64,
    /// Amplitudes divided by `2^log2_scale`.
    pub state: StateVector,
    pub log2_scale: i64,
    /// Norm of the unscaled state; may be infinite or zero when it leaves
    /// the `f64` range, in which case [`Sample::ln_norm`] remains exact.
    pub raw_norm: f64,
    pub populations: Vec<f64>,
}

impl Sample {
    fn new(x: f64, state: StateVector, log2_scale: i64) -> Result<Self, DynamicsError> {
        let populations = populations(&state)?;
        let raw_norm = state.raw_norm() * 2f64.powf(log2_scale as f64);
        Ok(Self { x, state, log2_scale, raw_norm, populations })
    }

    pub fn ln_norm(&self) -> f64 {
        self.state.raw_norm().ln() + self.log2_scale as f64 * std::f64::consts::LN_2
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub stats: OdeStats,
}

impl Trajectory {
    pub fn xs(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.x).collect()
    }

    /// Population of basis state `index` at every sample.
    pub fn population(&self, index: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.populations[index]).collect()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

/// `|ψ_i|² / Σ_j |ψ_j|²`.
pub fn populations(state: &StateVector) -> Result<Vec<f64>, DynamicsError> {
    let weights: Vec<f64> = state.amplitudes().iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = weights.iter().sum();
    if !(total.sqrt() > TAU_ZERO) || !total.is_finite() {
        return Err(DynamicsError::VanishingNorm(total.sqrt()));
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

fn check_grid(grid: &[f64]) -> Result<(), DynamicsError> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(DynamicsError::InvalidGrid("non-finite entry".into()));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(DynamicsError::InvalidGrid("grid must be non-decreasing".into()));
    }
    Ok(())
}

/// `e^{−iH·dt}`, halving the step until the self-consistency check passes.
fn propagator(h: &Operator, dt: f64) -> Result<nalgebra::DMatrix<C64>, DynamicsError> {
    fn attempt(a: &nalgebra::DMatrix<C64>, depth: u32) -> Option<nalgebra::DMatrix<C64>> {
        if let Some(m) = expm::expm_checked(a) {
            return Some(m);
        }
        if depth == 0 {
            return None;
        }
        let half = attempt(&(a * C64::new(0.5, 0.0)), depth - 1)?;
        Some(&half * &half)
    }
    let a = h.matrix() * (-I * dt);
    attempt(&a, 20).ok_or(DynamicsError::ExpmNonConvergence { dt })
}

fn rescale(v: &mut DVector<C64>, log2_scale: &mut i64) {
    let n = v.norm();
    if n > 0.0 && !(ode::NORM_FLOOR..=ode::NORM_CEIL).contains(&n) {
        let e = n.log2().round() as i32;
        *v *= C64::new(2f64.powi(-e), 0.0);
        *log2_scale += e as i64;
    }
}

/// `Ψ(t) = e^{−iHt} Ψ(0)` (ħ = 1) at every `t` in `t_grid`.
pub fn evolve_static(h: &Operator, psi0: &StateVector, t_grid: &[f64]) -> Result<Trajectory, DynamicsError> {
    if psi0.dim() != h.dim() {
        return Err(DynamicsError::DimensionMismatch { state: psi0.dim(), hamiltonian: h.dim() });
    }
    check_grid(t_grid)?;
    if t_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(DynamicsError::InvalidGrid("times must start at or after 0".into()));
    }
    let mut v = DVector::from_column_slice(psi0.amplitudes());
    let mut log2_scale = 0i64;
    let mut t_prev = 0.0;
    let mut cached: Option<(f64, nalgebra::DMatrix<C64>)> = None;
    let mut samples = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let dt = t - t_prev;
        if dt > 0.0 {
            let reuse = matches!(&cached, Some((d, _)) if (d - dt).abs() <= 1e-12 * dt);
            if !reuse {
                cached = Some((dt, propagator(h, dt)?));
            }
            let (_, u) = cached.as_ref().unwrap();
            v = u * v;
            rescale(&mut v, &mut log2_scale);
        }
        t_prev = t;
        samples.push(Sample::new(t, StateVector::new(v.iter().copied().collect()), log2_scale)?);
    }
    Ok(Trajectory { samples, stats: OdeStats::default() })
}

/// Driven evolution with the default tolerances.
pub fn evolve_driven(
    model: &ModelHandle,
    schedule: Schedule,
    psi0: &StateVector,
    grid: &[f64],
) -> Result<Trajectory, DynamicsError> {
    evolve_driven_with(model, schedule, psi0, grid, &OdeOptions::default())
}

/// Integrates `ik dΨ/dx = (H(x)/Δ) Ψ` for a linear schedule, or
/// `i dΨ/dt = H(s0) Ψ` for a constant one, sampling at `grid`.
pub fn evolve_driven_with(
    model: &ModelHandle,
    schedule: Schedule,
    psi0: &StateVector,
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<Trajectory, DynamicsError> {
    schedule.validate()?;
    check_grid(grid)?;
    let parts = model.parts();
    if psi0.dim() != parts.dim() {
        return Err(DynamicsError::DimensionMismatch { state: psi0.dim(), hamiltonian: parts.dim() });
    }
    let (lo, hi) = model.natural_range();
    if let (Schedule::Linear { .. }, Some(&first), Some(&last)) = (schedule, grid.first(), grid.last()) {
        if first < lo - 1e-12 || last > hi + 1e-12 {
            log::warn!("driven grid [{first}, {last}] extends beyond the sweep interval [{lo}, {hi}]");
        }
    }

    let (result, stats) = match schedule {
        Schedule::Linear { k } if k.is_infinite() => {
            let samples = grid
                .iter()
                .map(|&x| Sample::new(x, psi0.clone(), 0))
                .collect::<Result<_, _>>()?;
            return Ok(Trajectory { samples, stats: OdeStats::default() });
        }
        Schedule::Linear { k } => {
            let factor = -I / (k * parts.energy_unit);
            ode::integrate_linear(
                |x, y, dy| {
                    parts.apply_into(x, y, dy);
                    for d in dy.iter_mut() {
                        *d *= factor;
                    }
                },
                psi0.amplitudes(),
                grid,
                opts,
            )?
        }
        Schedule::Constant { s0 } => {
            let h = parts.at(s0);
            ode::integrate_linear(
                |_, y, dy| {
                    h.apply_into(y, dy);
                    for d in dy.iter_mut() {
                        *d *= -I;
                    }
                },
                psi0.amplitudes(),
                grid,
                opts,
            )?
        }
    };
    let samples = result
        .into_iter()
        .map(|s| Sample::new(s.x, StateVector::new(s.y), s.log2_scale))
        .collect::<Result<_, _>>()?;
    Ok(Trajectory { samples, stats })
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}
