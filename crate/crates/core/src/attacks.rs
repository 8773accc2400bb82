//! False-data injection on the governor-droop control signal and benign load
//! disturbances.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::ContinuousModel;
use crate::error::ModelError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    #[default]
    None,
    Sinusoid,
    Bias,
    Ramp,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackMode {
    /// The corrupted value overwrites ΔP_c.
    Replace,
    /// The corrupted value is added to ΔP_c.
    #[default]
    Add,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub kind: AttackKind,
    /// Peak injected value (pu). For a ramp, the value reached at `t_end`.
    #[serde(default)]
    pub amplitude: f64,
    /// Sinusoid frequency (Hz).
    #[serde(default)]
    pub frequency: f64,
    /// Sinusoid phase (rad).
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub t_start: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub mode: AttackMode,
}

fn default_t_end() -> f64 {
    f64::INFINITY
}

impl Default for AttackSpec {
    fn default() -> Self {
        Self::none()
    }
}

impl AttackSpec {
    pub fn none() -> Self {
        Self {
            kind: AttackKind::None,
            amplitude: 0.0,
            frequency: 0.0,
            phase: 0.0,
            t_start: 0.0,
            t_end: f64::INFINITY,
            mode: AttackMode::Add,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.kind == AttackKind::None {
            return Ok(());
        }
        let invalid = |field, reason: String| Err(ModelError::InvalidParameter { field, reason });
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return invalid(
                "amplitude",
                format!("must be finite and >= 0, got {}", self.amplitude),
            );
        }
        if !self.phase.is_finite() {
            return invalid("phase", format!("must be finite, got {}", self.phase));
        }
        if !(self.t_start.is_finite() && self.t_start < self.t_end) {
            return invalid(
                "t_start",
                format!(
                    "must be finite and < t_end ({}), got {}",
                    self.t_end, self.t_start
                ),
            );
        }
        if self.kind == AttackKind::Sinusoid
            && !(self.frequency.is_finite() && self.frequency > 0.0)
        {
            return invalid(
                "frequency",
                format!("must be > 0 for a sinusoid, got {}", self.frequency),
            );
        }
        if self.kind == AttackKind::Ramp && !self.t_end.is_finite() {
            return invalid("t_end", "must be finite for a ramp".to_string());
        }
        Ok(())
    }

    pub fn is_active(&self, t: f64) -> bool {
        self.kind != AttackKind::None && t >= self.t_start && t < self.t_end
    }
}

/// Control signal delivered to the generator at time `t`.
pub fn attack_signal(spec: &AttackSpec, t: f64, dp_c_legit: f64) -> f64 {
    if !spec.is_active(t) {
        return dp_c_legit;
    }
    let injected = match spec.kind {
        AttackKind::None => return dp_c_legit,
        AttackKind::Sinusoid => spec.amplitude * (2.0 * PI * spec.frequency * t + spec.phase).sin(),
        AttackKind::Bias => spec.amplitude,
        AttackKind::Ramp => spec.amplitude * (t - spec.t_start) / (spec.t_end - spec.t_start),
    };
    match spec.mode {
        AttackMode::Replace => injected,
        AttackMode::Add => dp_c_legit + injected,
    }
}

/// Frequency (Hz) of the least-damped oscillatory mode of `A`.
pub fn resonant_frequency(model: &ContinuousModel) -> Result<f64, ModelError> {
    let eig = model.a().complex_eigenvalues();
    let scale = model.a().amax().max(1.0);
    eig.iter()
        .filter(|l| l.im.abs() > 1e-9 * scale)
        .max_by(|l, r| l.re.total_cmp(&r.re))
        .map(|l| l.im.abs() / (2.0 * PI))
        .ok_or(ModelError::NoOscillatoryMode)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadStep {
    pub time: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSpec {
    #[serde(default)]
    pub load_steps: Vec<LoadStep>,
}

impl DisturbanceSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        for pair in self.load_steps.windows(2) {
            if pair[1].time < pair[0].time {
                return Err(ModelError::InvalidParameter {
                    field: "load_steps",
                    reason: format!(
                        "times must be non-decreasing ({} after {})",
                        pair[1].time, pair[0].time
                    ),
                });
            }
        }
        if let Some(s) = self
            .load_steps
            .iter()
            .find(|s| !(s.time.is_finite() && s.delta.is_finite()))
        {
            return Err(ModelError::InvalidParameter {
                field: "load_steps",
                reason: format!("non-finite entry at t = {}", s.time),
            });
        }
        Ok(())
    }

    /// Cumulative ΔP_L at time `t`.
    pub fn load_at(&self, t: f64) -> f64 {
        self.load_steps
            .iter()
            .take_while(|s| s.time <= t)
            .map(|s| s.delta)
            .sum()
    }
}
