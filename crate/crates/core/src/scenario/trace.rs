//! Per-step records, run summary and the CSV trace format.
//!
//! The CSV has the fixed header [`TRACE_HEADER`]; floats are written in
//! scientific notation with 9 significant digits, booleans as `0`/`1`, relay
//! states as a three-letter code (OF, UF, ROCOF; `M`onitoring, `P`icked up,
//! `T`ripped) and trip events as `;`-separated `ELEMENT@t`. Lines end in `\n`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::StateVector;
use crate::error::TraceError;
use crate::relays::TripEvent;

/// |Δω̂| below which the frequency counts as settled (pu).
pub const SETTLING_BAND: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    /// Plant state at `t`.
    pub x: StateVector,
    /// Estimate at `t`.
    pub x_hat: StateVector,
    pub dp_c_legit: f64,
    pub dp_c_attacked: f64,
    /// Control applied over `[t, t + dt)`.
    pub dp_c_star: f64,
    pub dp_l: f64,
    pub h_omega: f64,
    pub h_nu: f64,
    pub scc_modified: bool,
    pub alarm: bool,
    pub relay_states: String,
    pub trip_events: Vec<TripEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub max_abs_d_omega_hat: f64,
    pub max_abs_omega_dot_hat: f64,
    pub trip_events: Vec<TripEvent>,
    /// Total time the SCC modified the control (s).
    pub scc_active_time: f64,
    /// `[start, end)` of each contiguous run of modified steps.
    pub scc_activation_intervals: Vec<(f64, f64)>,
    pub alarm_count: usize,
    /// First time after which |Δω̂| stays below [`SETTLING_BAND`]; `None` if the
    /// last record is outside the band.
    pub settling_time: Option<f64>,
}

impl RunSummary {
    /// Recomputes the summary from a complete trace.
    pub fn from_trace(trace: &[TraceRecord], dt: f64) -> Self {
        let max_abs =
            |f: fn(&TraceRecord) -> f64| trace.iter().map(f).map(f64::abs).fold(0.0, f64::max);

        let mut intervals: Vec<(f64, f64)> = Vec::new();
        for r in trace.iter().filter(|r| r.scc_modified) {
            match intervals.last_mut() {
                Some(last) if (r.t - last.1).abs() < 0.5 * dt => last.1 = r.t + dt,
                _ => intervals.push((r.t, r.t + dt)),
            }
        }

        let settling_time = match trace
            .iter()
            .rposition(|r| r.x.d_omega_hat.abs() >= SETTLING_BAND)
        {
            None => trace.first().map(|r| r.t),
            Some(i) => trace.get(i + 1).map(|r| r.t),
        };

        Self {
            max_abs_d_omega_hat: max_abs(|r| r.x.d_omega_hat),
            max_abs_omega_dot_hat: max_abs(|r| r.x.omega_dot_hat),
            trip_events: trace
                .iter()
                .flat_map(|r| r.trip_events.iter().copied())
                .collect(),
            scc_active_time: trace.iter().filter(|r| r.scc_modified).count() as f64 * dt,
            scc_activation_intervals: intervals,
            alarm_count: trace.iter().filter(|r| r.alarm).count(),
            settling_time,
        }
    }

    pub fn tripped(&self) -> bool {
        !self.trip_events.is_empty()
    }
}

/// Column names, in order.
pub const TRACE_HEADER: [&str; 21] = [
    "t",
    "dp_g",
    "dp_m",
    "d_omega",
    "d_omega_hat",
    "omega_dot_hat",
    "est_dp_g",
    "est_dp_m",
    "est_d_omega",
    "est_d_omega_hat",
    "est_omega_dot_hat",
    "dp_c_legit",
    "dp_c_attacked",
    "dp_c_star",
    "dp_l",
    "h_omega",
    "h_nu",
    "scc_modified",
    "alarm",
    "relay_states",
    "trip_events",
];

/// Scientific notation with 9 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.8e}")
}

fn format_events(events: &[TripEvent]) -> String {
    events
        .iter()
        .map(|e| format!("{}@{}", e.element, format_float(e.t)))
        .collect::<Vec<_>>()
        .join(";")
}

fn record_fields(r: &TraceRecord) -> Vec<String> {
    let mut out = Vec::with_capacity(TRACE_HEADER.len());
    out.push(format_float(r.t));
    out.extend(r.x.to_vector().iter().map(|&v| format_float(v)));
    out.extend(r.x_hat.to_vector().iter().map(|&v| format_float(v)));
    for v in [
        r.dp_c_legit,
        r.dp_c_attacked,
        r.dp_c_star,
        r.dp_l,
        r.h_omega,
        r.h_nu,
    ] {
        out.push(format_float(v));
    }
    out.push(u8::from(r.scc_modified).to_string());
    out.push(u8::from(r.alarm).to_string());
    out.push(r.relay_states.clone());
    out.push(format_events(&r.trip_events));
    out
}

pub fn write_trace_to<W: Write>(trace: &[TraceRecord], writer: W) -> Result<(), TraceError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(TRACE_HEADER)?;
    for r in trace {
        w.write_record(record_fields(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(trace: &[TraceRecord], path: impl AsRef<Path>) -> Result<(), TraceError> {
    let file = std::fs::File::create(path)?;
    write_trace_to(trace, std::io::BufWriter::new(file))
}

/// The numeric columns of a trace file, as read back for plotting.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub d_omega_hat: f64,
    pub omega_dot_hat: f64,
    pub dp_c_legit: f64,
    pub dp_c_attacked: f64,
    pub dp_c_star: f64,
    pub dp_l: f64,
    pub dp_m: f64,
    pub scc_modified: u8,
    pub trip_events: String,
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRow>, TraceError> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<Result<Vec<TraceRow>, _>>()?;
    Ok(rows)
}
