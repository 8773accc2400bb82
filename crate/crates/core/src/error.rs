use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("state matrix is numerically singular (condition estimate {condition:.3e})")]
    SingularModel { condition: f64 },

    #[error("discretization horizon must be positive, got {0}")]
    NonPositiveHorizon(f64),

    #[error("integration step must lie in (0, 0.01] s, got {0}")]
    StepOutOfRange(f64),

    #[error("matrix exponential failed for non-finite input")]
    NonFiniteExponential,

    #[error("input-matrix routes disagree: augmented vs inverse form differ by {0:.3e}")]
    DiscretizationMismatch(f64),

    #[error("no oscillatory mode in state matrix; set the attack frequency manually")]
    NoOscillatoryMode,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("innovation covariance is numerically singular at step {step}")]
    SingularInnovation { step: u64 },

    #[error("covariance `{field}` is not {property}")]
    InvalidCovariance {
        field: &'static str,
        property: &'static str,
    },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Syntax error, unknown key, missing field or type mismatch. The message
    /// carries the line/column and field reported by the TOML parser.
    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Estimator(#[from] EstimatorError),

    #[error("non-finite plant state at record {index} (t = {t} s)")]
    NonFinite { index: usize, t: f64 },
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("the scenario has no attack to calibrate")]
    NoAttack,

    #[error("no trip within {window} s for amplitudes up to {max_amplitude} pu")]
    NeverTrips { window: f64, max_amplitude: f64 },

    #[error(transparent)]
    Run(#[from] RunError),

    #[error(transparent)]
    Model(#[from] ModelError),
}
