//! Definite-time over-frequency, under-frequency and ROCOF protection.
//!
//! Each element accumulates time while its pickup condition holds, resets on
//! dropout and trips once the accumulated time reaches its clearing time.
//! Trips are absorbing.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Slack on the elapsed-vs-clearing comparison to absorb accumulated rounding
/// of repeated `dt` additions.
const TIMER_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelayConfig {
    /// OF2 pickup (absolute pu).
    pub of_threshold: f64,
    /// UF2 pickup (absolute pu).
    pub uf_threshold: f64,
    /// OF2 clearing time (s).
    pub of_clearing: f64,
    /// UF2 clearing time (s).
    pub uf_clearing: f64,
    /// ROCOF pickup (pu/s).
    pub rocof_threshold: f64,
    /// Time the ROCOF condition must persist before tripping (s).
    pub rocof_pickup: f64,
}

impl Default for RelayConfig {
    fn default() -> Self {
        Self {
            of_threshold: 1.03,
            uf_threshold: 0.942,
            of_clearing: 0.160,
            uf_clearing: 0.160,
            rocof_threshold: 0.05,
            rocof_pickup: 0.050,
        }
    }
}

impl RelayConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("of_threshold", self.of_threshold),
            ("uf_threshold", self.uf_threshold),
            ("of_clearing", self.of_clearing),
            ("uf_clearing", self.uf_clearing),
            ("rocof_threshold", self.rocof_threshold),
            ("rocof_pickup", self.rocof_pickup),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidParameter {
                    field,
                    reason: format!("must be finite and > 0, got {value}"),
                });
            }
        }
        if self.of_threshold <= 1.0 {
            return Err(ModelError::InvalidParameter {
                field: "of_threshold",
                reason: format!("must exceed 1 pu, got {}", self.of_threshold),
            });
        }
        if self.uf_threshold >= 1.0 {
            return Err(ModelError::InvalidParameter {
                field: "uf_threshold",
                reason: format!("must be below 1 pu, got {}", self.uf_threshold),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelayElement {
    #[serde(rename = "OF")]
    OverFrequency,
    #[serde(rename = "UF")]
    UnderFrequency,
    #[serde(rename = "ROCOF")]
    Rocof,
}

impl RelayElement {
    pub fn name(self) -> &'static str {
        match self {
            Self::OverFrequency => "OF",
            Self::UnderFrequency => "UF",
            Self::Rocof => "ROCOF",
        }
    }
}

impl fmt::Display for RelayElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ElementState {
    #[default]
    Monitoring,
    PickedUp {
        elapsed: f64,
    },
    Tripped {
        at: f64,
    },
}

impl ElementState {
    /// Single-character code used in traces: `M`, `P` or `T`.
    pub fn code(&self) -> char {
        match self {
            Self::Monitoring => 'M',
            Self::PickedUp { .. } => 'P',
            Self::Tripped { .. } => 'T',
        }
    }

    pub fn is_tripped(&self) -> bool {
        matches!(self, Self::Tripped { .. })
    }

    /// Advances the timer. Returns `true` on the step that trips.
    fn advance(&mut self, condition: bool, clearing: f64, dt: f64, t: f64) -> bool {
        let next = match *self {
            Self::Tripped { .. } => return false,
            _ if !condition => Self::Monitoring,
            Self::Monitoring => Self::PickedUp { elapsed: 0.0 },
            Self::PickedUp { elapsed } => Self::PickedUp {
                elapsed: elapsed + dt,
            },
        };
        *self = match next {
            Self::PickedUp { elapsed } if elapsed + TIMER_EPS >= clearing => {
                Self::Tripped { at: t }
            }
            other => other,
        };
        self.is_tripped()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripEvent {
    pub element: RelayElement,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RelayBank {
    pub of: ElementState,
    pub uf: ElementState,
    pub rocof: ElementState,
}

impl RelayBank {
    pub fn new() -> Self {
        Self::default()
    }

    /// Evaluates all elements against one sample at time `t`.
    ///
    /// `omega_hat` is the absolute measured frequency (pu), `omega_dot_hat` the
    /// measured ROCOF (pu/s). The sample that first satisfies a condition marks
    /// the onset, so a held violation trips at `onset + clearing`.
    pub fn step(
        &mut self,
        cfg: &RelayConfig,
        omega_hat: f64,
        omega_dot_hat: f64,
        dt: f64,
        t: f64,
    ) -> Vec<TripEvent> {
        let mut events = Vec::new();
        let checks = [
            (
                &mut self.of,
                RelayElement::OverFrequency,
                omega_hat >= cfg.of_threshold,
                cfg.of_clearing,
            ),
            (
                &mut self.uf,
                RelayElement::UnderFrequency,
                omega_hat <= cfg.uf_threshold,
                cfg.uf_clearing,
            ),
            (
                &mut self.rocof,
                RelayElement::Rocof,
                omega_dot_hat.abs() >= cfg.rocof_threshold,
                cfg.rocof_pickup,
            ),
        ];
        for (state, element, condition, clearing) in checks {
            if state.advance(condition, clearing, dt, t) {
                events.push(TripEvent { element, t });
            }
        }
        events
    }

    /// Three-character state code in OF, UF, ROCOF order, e.g. `MPT`.
    pub fn code(&self) -> String {
        [self.of, self.uf, self.rocof]
            .iter()
            .map(|s| s.code())
            .collect()
    }

    pub fn any_tripped(&self) -> bool {
        self.of.is_tripped() || self.uf.is_tripped() || self.rocof.is_tripped()
    }
}
