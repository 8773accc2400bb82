//! Single-area load-frequency control under false-data injection, with a
//! control-barrier-function safety filter on the governor control signal.
//!
//! The crate is organised by subsystem:
//!
//! - [`dynamics`]: plant model, discretization, prediction, integration.
//! - [`scc`]: barriers, affine safety constraints and the closed-form QP.
//! - [`relays`]: over/under-frequency and ROCOF protection.
//! - [`estimator`]: Kalman filter and observability check.
//! - [`attacks`]: injected control corruptions and load disturbances.
//! - [`scenario`]: config files, the closed-loop run, traces, calibration.

pub mod attacks;
pub mod dynamics;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod relays;
pub mod scc;
pub mod scenario;

pub use error::{CalibrationError, ConfigError, EstimatorError, ModelError, RunError, TraceError};
