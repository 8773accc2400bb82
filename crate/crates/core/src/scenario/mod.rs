//! Scenario configuration, closed-loop runs, traces and attack calibration.

mod calibrate;
mod config;
mod run;
mod trace;

pub use calibrate::{calibrate_attack, CalibrationOptions, CalibrationReport};
pub use config::{load_config, EstimatorSection, OnTrip, SccSection, ScenarioConfig};
pub use run::{run, RunOutput};
pub use trace::{
    format_float, read_trace, write_trace, write_trace_to, RunSummary, TraceRecord, TraceRow,
    SETTLING_BAND, TRACE_HEADER,
};
