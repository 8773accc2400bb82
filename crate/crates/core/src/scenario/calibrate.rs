//! Attack calibration: find the smallest injection amplitude that trips a
//! relay without the SCC, then derive a strong (tripping) and a weak
//! (sub-threshold) variant.
//!
//! Sinusoidal attacks are first retuned to the least-damped mode of the plant.
//! The amplitude search doubles until a trip occurs inside the window, then
//! bisects down to the requested tolerance.

use serde::Serialize;

use crate::attacks::{resonant_frequency, AttackKind, AttackSpec};
use crate::dynamics::build_continuous_model;
use crate::error::CalibrationError;

use super::config::{OnTrip, ScenarioConfig};
use super::run::run;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    /// Simulated time in which the uncontrolled attack must trip (s).
    pub window: f64,
    /// Bisection stops when the bracket is narrower than this (pu).
    pub tolerance: f64,
    pub strong_factor: f64,
    pub weak_factor: f64,
    pub max_amplitude: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            window: 30.0,
            tolerance: 1e-3,
            strong_factor: 1.5,
            weak_factor: 0.25,
            max_amplitude: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub attack: AttackSpec,
    /// Smallest amplitude found to trip within the window.
    pub trip_amplitude: f64,
    pub strong_amplitude: f64,
    /// Time of the first trip for the strong attack without SCC.
    pub strong_trip_time: Option<f64>,
    pub weak_amplitude: f64,
    /// Trips of the weak attack with the SCC enabled over the full duration.
    pub weak_trips: usize,
    /// Steps the SCC modified the weak attack.
    pub weak_modified_steps: usize,
    pub runs: usize,
}

struct Search<'a> {
    base: &'a ScenarioConfig,
    window: f64,
    runs: usize,
}

impl Search<'_> {
    /// First trip time of the uncontrolled attack at `amplitude`.
    fn trip_time(&mut self, amplitude: f64) -> Result<Option<f64>, CalibrationError> {
        let mut cfg = self.base.clone();
        cfg.attack.amplitude = amplitude;
        cfg.scc.enabled = false;
        cfg.on_trip = OnTrip::Halt;
        cfg.duration = self.window;
        self.runs += 1;
        let out = run(&cfg)?;
        Ok(out.summary.trip_events.first().map(|e| e.t))
    }
}

pub fn calibrate_attack(
    base: &ScenarioConfig,
    opts: &CalibrationOptions,
) -> Result<CalibrationReport, CalibrationError> {
    if base.attack.kind == AttackKind::None {
        return Err(CalibrationError::NoAttack);
    }
    let mut base = base.clone();
    if base.attack.kind == AttackKind::Sinusoid {
        let model = build_continuous_model(&base.params)?;
        base.attack.frequency = resonant_frequency(&model)?;
    }

    let mut search = Search {
        base: &base,
        window: opts.window,
        runs: 0,
    };

    let mut lo = 0.0;
    let mut hi = 0.05_f64.min(opts.max_amplitude);
    while search.trip_time(hi)?.is_none() {
        if hi >= opts.max_amplitude {
            return Err(CalibrationError::NeverTrips {
                window: opts.window,
                max_amplitude: opts.max_amplitude,
            });
        }
        lo = hi;
        hi = (hi * 2.0).min(opts.max_amplitude);
    }
    while hi - lo > opts.tolerance {
        let mid = 0.5 * (lo + hi);
        if search.trip_time(mid)?.is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let strong_amplitude = hi * opts.strong_factor;
    let strong_trip_time = search.trip_time(strong_amplitude)?;
    let weak_amplitude = hi * opts.weak_factor;
    let mut runs = search.runs;

    let mut weak = base.clone();
    weak.attack.amplitude = weak_amplitude;
    weak.scc.enabled = true;
    weak.on_trip = OnTrip::Continue;
    let weak_out = run(&weak)?;
    runs += 1;

    Ok(CalibrationReport {
        attack: base.attack,
        trip_amplitude: hi,
        strong_amplitude,
        strong_trip_time,
        weak_amplitude,
        weak_trips: weak_out.summary.trip_events.len(),
        weak_modified_steps: weak_out.trace.iter().filter(|r| r.scc_modified).count(),
        runs,
    })
}
