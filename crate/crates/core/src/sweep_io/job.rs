//! JSON job description for parameter sweeps.

use serde::{Deserialize, Serialize};

use super::SweepError;
use crate::model::MAX_QUBITS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Spectrum,
    StaticEvolve,
    DrivenEvolve,
    Lzs,
    Qaa,
    EpFind,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Full,
    Effective,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    Gamma,
    K,
    Epsilon,
    S,
    #[serde(rename = "s_tilde0")]
    STilde0,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::Gamma => "gamma",
            AxisName::K => "k",
            AxisName::Epsilon => "epsilon",
            AxisName::S => "s",
            AxisName::STilde0 => "s_tilde0",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "gamma" => Some(AxisName::Gamma),
            "k" => Some(AxisName::K),
            "epsilon" => Some(AxisName::Epsilon),
            "s" => Some(AxisName::S),
            "s_tilde0" => Some(AxisName::STilde0),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Axis {
    pub fn validate(&self) -> Result<(), SweepError> {
        let name = self.name.as_str();
        if self.count < 2 {
            return Err(SweepError::Config(format!("axis {name}: count must be at least 2")));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min >= self.max {
            return Err(SweepError::Config(format!("axis {name}: need finite min < max")));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(SweepError::Config(format!("axis {name}: log spacing requires min > 0")));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                if i == n - 1 {
                    return self.max;
                }
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * f,
                    Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * f).exp(),
                }
            })
            .collect()
    }
}

/// Fixed (non-swept) parameters. Unset fields take the documented defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_tilde0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_samples: Option<usize>,
}

pub const DEFAULT_SAMPLES: usize = 1001;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepJob {
    pub target: Target,
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default)]
    pub fixed: FixedParams,
    #[serde(default)]
    pub axes: Vec<Axis>,
    /// Observable columns to keep; empty keeps all.
    #[serde(default)]
    pub outputs: Vec<String>,
}

impl SweepJob {
    pub fn new(target: Target) -> Self {
        Self { target, model: ModelKind::Full, fixed: FixedParams::default(), axes: Vec::new(), outputs: Vec::new() }
    }

    pub fn from_json(text: &str) -> Result<Self, SweepError> {
        serde_json::from_str(text).map_err(|e| SweepError::Config(e.to_string()))
    }

    pub fn axis(&self, name: AxisName) -> Option<&Axis> {
        self.axes.iter().find(|a| a.name == name)
    }

    pub fn has_axis(&self, name: AxisName) -> bool {
        self.axis(name).is_some()
    }

    /// Number of grid points (1 when there are no axes).
    pub fn grid_size(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    fn relevant_axes(&self) -> &'static [AxisName] {
        use AxisName::*;
        match (self.target, self.model) {
            (Target::Spectrum, _) => &[Gamma, Epsilon, S],
            (Target::StaticEvolve, ModelKind::Effective) => &[Gamma, Epsilon, STilde0],
            (Target::StaticEvolve, ModelKind::Full) => &[Gamma, Epsilon, S],
            (Target::DrivenEvolve | Target::Lzs | Target::Qaa, _) => &[Gamma, Epsilon, K],
            (Target::EpFind, _) => &[Gamma, Epsilon],
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let cfg = |m: String| Err(SweepError::Config(m));
        if self.axes.len() > 2 {
            return cfg(format!("at most 2 axes are supported, got {}", self.axes.len()));
        }
        for (i, a) in self.axes.iter().enumerate() {
            a.validate()?;
            if self.axes[..i].iter().any(|b| b.name == a.name) {
                return cfg(format!("axis {} given twice", a.name.as_str()));
            }
            if !self.relevant_axes().contains(&a.name) {
                return cfg(format!("axis {} has no effect on target {:?} with model {:?}", a.name.as_str(), self.target, self.model));
            }
        }
        let f = &self.fixed;
        let n = f.n_qubits.unwrap_or(2);
        if n == 0 || n > MAX_QUBITS {
            return cfg(format!("n_qubits must be in 1..={MAX_QUBITS}, got {n}"));
        }
        if self.model == ModelKind::Effective && n != 2 {
            return cfg("the effective model is defined for n_qubits = 2".into());
        }
        for (name, v) in [("epsilon", f.epsilon), ("gamma", f.gamma), ("g", f.g), ("s", f.s), ("s_tilde0", f.s_tilde0)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return cfg(format!("{name} must be finite"));
                }
            }
        }
        if f.gamma.is_some_and(|g| g < 0.0) || self.axis(AxisName::Gamma).is_some_and(|a| a.min < 0.0) {
            return cfg("gamma must be non-negative".into());
        }
        let k_axis = self.axis(AxisName::K);
        if k_axis.is_some_and(|a| a.min <= 0.0) || f.k.is_some_and(|k| k.is_nan() || k <= 0.0) {
            return cfg("k must be positive".into());
        }
        if f.t_samples.is_some_and(|t| t < 2) {
            return cfg("t_samples must be at least 2".into());
        }
        match self.target {
            Target::Spectrum => {
                if !self.has_axis(AxisName::S) && f.s.is_none() {
                    return cfg("spectrum needs an s axis or a fixed s".into());
                }
            }
            Target::StaticEvolve => {
                if !f.t_max.is_some_and(|t| t.is_finite() && t > 0.0) {
                    return cfg("static_evolve needs a positive t_max".into());
                }
            }
            Target::DrivenEvolve | Target::Lzs | Target::Qaa => {
                if f.k.is_none() && k_axis.is_none() {
                    return cfg(format!("{:?} needs k (fixed or as an axis)", self.target));
                }
                if self.target == Target::Qaa && self.model != ModelKind::Full {
                    return cfg("qaa runs on the full model".into());
                }
                if self.target == Target::Lzs && n != 2 {
                    return cfg("lzs is defined for n_qubits = 2".into());
                }
            }
            Target::EpFind => {
                if self.model != ModelKind::Full {
                    return cfg("ep_find runs on the full model".into());
                }
            }
        }
        Ok(())
    }
}
