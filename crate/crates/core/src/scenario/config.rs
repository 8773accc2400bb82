//! TOML scenario files.
//!
//! Top-level keys: `duration` (required), `dt`, `seed`, `on_trip`,
//! `initial_state`. Sections: `[params]`, `[limits]`, `[relay]`, `[scc]`,
//! `[estimator]`, `[attack]`, `[disturbance]`. Every section and every key
//! inside a section is optional and falls back to the canonical defaults.
//! Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attacks::{AttackSpec, DisturbanceSpec};
use crate::dynamics::{StateVector, SystemParams, MAX_STEP};
use crate::error::{ConfigError, ModelError};
use crate::estimator::KalmanConfig;
use crate::relays::RelayConfig;
use crate::scc::{BarrierForm, LoadInputMode, SafetyLimits, SccConfig};

/// What the run does after the first relay trip.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnTrip {
    Halt,
    #[default]
    Continue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SccSection {
    pub enabled: bool,
    pub alpha: f64,
    pub t_s: f64,
    pub h_floor: f64,
    pub load_input_mode: LoadInputMode,
    pub barrier_form: BarrierForm,
}

impl Default for SccSection {
    fn default() -> Self {
        let c = SccConfig::default();
        Self {
            enabled: true,
            alpha: c.alpha,
            t_s: c.t_s,
            h_floor: c.h_floor,
            load_input_mode: c.load_input_mode,
            barrier_form: c.barrier_form,
        }
    }
}

impl SccSection {
    pub fn config(&self) -> SccConfig {
        SccConfig {
            alpha: self.alpha,
            t_s: self.t_s,
            h_floor: self.h_floor,
            load_input_mode: self.load_input_mode,
            barrier_form: self.barrier_form,
        }
    }
}

/// Diagonal Kalman filter settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSection {
    /// Feed the SCC the plant state instead of the estimate.
    pub use_true_state: bool,
    /// Diagonal of Q.
    pub process_noise: [f64; 5],
    /// Diagonal of the measurement noise covariance.
    pub measurement_noise: [f64; 2],
    /// Diagonal of the prior covariance.
    pub initial_cov: [f64; 5],
    /// Prior mean.
    pub initial_state: StateVector,
    /// Standard deviation of white noise added to `(Δω̂, ω̂̇)` before the
    /// estimator and the local controller see them.
    pub measurement_noise_std: [f64; 2],
}

impl Default for EstimatorSection {
    fn default() -> Self {
        Self {
            use_true_state: false,
            process_noise: [1e-8; 5],
            measurement_noise: [1e-8; 2],
            initial_cov: [1e-4; 5],
            initial_state: StateVector::default(),
            measurement_noise_std: [0.0; 2],
        }
    }
}

impl EstimatorSection {
    pub fn kalman_config(&self, dt: f64) -> KalmanConfig {
        KalmanConfig::diagonal(
            self.process_noise,
            self.measurement_noise,
            self.initial_cov,
            self.initial_state,
            dt,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Simulated time (s).
    pub duration: f64,
    /// Integration step (s).
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub on_trip: OnTrip,
    /// Plant state at t = 0.
    #[serde(default)]
    pub initial_state: StateVector,
    #[serde(default)]
    pub params: SystemParams,
    #[serde(default)]
    pub limits: SafetyLimits,
    #[serde(default)]
    pub relay: RelayConfig,
    #[serde(default)]
    pub scc: SccSection,
    #[serde(default)]
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub attack: AttackSpec,
    #[serde(default)]
    pub disturbance: DisturbanceSpec,
}

fn default_dt() -> f64 {
    1e-3
}

impl ScenarioConfig {
    /// A quiescent scenario with canonical parameters.
    pub fn new(duration: f64) -> Self {
        Self {
            duration,
            dt: default_dt(),
            seed: 0,
            on_trip: OnTrip::default(),
            initial_state: StateVector::default(),
            params: SystemParams::default(),
            limits: SafetyLimits::default(),
            relay: RelayConfig::default(),
            scc: SccSection::default(),
            estimator: EstimatorSection::default(),
            attack: AttackSpec::none(),
            disturbance: DisturbanceSpec::default(),
        }
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            message: e.to_string().trim_end().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config is always representable as TOML")
    }

    /// Number of integration steps.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field: &str, reason: String| ConfigError::Invalid {
            field: field.to_string(),
            reason,
        };
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(invalid(
                "duration",
                format!("must be > 0, got {}", self.duration),
            ));
        }
        if !(self.dt > 0.0 && self.dt <= MAX_STEP) {
            return Err(invalid(
                "dt",
                format!("must lie in (0, {MAX_STEP}], got {}", self.dt),
            ));
        }
        if self.steps() == 0 {
            return Err(invalid("duration", "shorter than one step".to_string()));
        }
        if !self.initial_state.is_finite() {
            return Err(invalid("initial_state", "must be finite".to_string()));
        }

        section("params", self.params.validate())?;
        section("limits", self.limits.validate())?;
        section("relay", self.relay.validate())?;
        section("scc", self.scc.config().validate())?;
        section("attack", self.attack.validate())?;
        section("disturbance", self.disturbance.validate())?;

        let ratio = self.scc.t_s / self.dt;
        if (ratio - ratio.round()).abs() > 1e-6 * ratio.max(1.0) {
            return Err(invalid(
                "scc.t_s",
                format!(
                    "must be a multiple of dt ({}), got {}",
                    self.dt, self.scc.t_s
                ),
            ));
        }

        let est = &self.estimator;
        if est
            .measurement_noise_std
            .iter()
            .any(|s| !(s.is_finite() && *s >= 0.0))
        {
            return Err(invalid(
                "estimator.measurement_noise_std",
                "must be finite and >= 0".to_string(),
            ));
        }
        if !est.initial_state.is_finite() {
            return Err(invalid(
                "estimator.initial_state",
                "must be finite".to_string(),
            ));
        }
        est.kalman_config(self.dt)
            .validate()
            .map_err(|e| invalid("estimator", e.to_string()))?;
        Ok(())
    }
}

fn section(name: &str, result: Result<(), ModelError>) -> Result<(), ConfigError> {
    result.map_err(|e| match e {
        ModelError::InvalidParameter { field, reason } => ConfigError::Invalid {
            field: format!("{name}.{field}"),
            reason,
        },
        other => ConfigError::Model(other),
    })
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ScenarioConfig::from_toml_str(&text, &path.display().to_string())
}
