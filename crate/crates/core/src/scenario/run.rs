//! Closed-loop simulation.
//!
//! Each step at `t = n·dt`:
//! 1. the local integral controller produces ΔP_c from the measured Δω̂;
//! 2. the attack corrupts it;
//! 3. the Kalman filter folds in the measurement `(Δω̂, ω̂̇)`;
//! 4. the SCC filters the corrupted signal using the estimate (or the plant
//!    state when configured);
//! 5. the relays evaluate the sensor states;
//! 6. the step is recorded;
//! 7. the plant advances one RK4 step under `(ΔP_c*, ΔP_L)`.

use nalgebra::SVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::attacks::attack_signal;
use crate::dynamics::{
    build_continuous_model, discretize, local_controller_step, step_continuous, InputVector,
    StateVector,
};
use crate::error::RunError;
use crate::estimator::{kf_step, kf_update, EstimatorState};
use crate::relays::RelayBank;
use crate::scc::{eval_barriers, filter_control, scc_step, AffineConstraint, MODIFY_TOL};

use super::config::{OnTrip, ScenarioConfig};
use super::trace::{RunSummary, TraceRecord, SETTLING_BAND};

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    pub summary: RunSummary,
}

/// Online version of [`RunSummary::from_trace`].
struct SummaryBuilder {
    dt: f64,
    summary: RunSummary,
    modified_steps: usize,
    prev_modified: bool,
}

impl SummaryBuilder {
    fn new(dt: f64) -> Self {
        Self {
            dt,
            summary: RunSummary {
                max_abs_d_omega_hat: 0.0,
                max_abs_omega_dot_hat: 0.0,
                trip_events: Vec::new(),
                scc_active_time: 0.0,
                scc_activation_intervals: Vec::new(),
                alarm_count: 0,
                settling_time: None,
            },
            modified_steps: 0,
            prev_modified: false,
        }
    }

    fn push(&mut self, r: &TraceRecord) {
        let s = &mut self.summary;
        s.max_abs_d_omega_hat = s.max_abs_d_omega_hat.max(r.x.d_omega_hat.abs());
        s.max_abs_omega_dot_hat = s.max_abs_omega_dot_hat.max(r.x.omega_dot_hat.abs());
        s.trip_events.extend(r.trip_events.iter().copied());
        if r.alarm {
            s.alarm_count += 1;
        }
        if r.scc_modified {
            self.modified_steps += 1;
            match s.scc_activation_intervals.last_mut() {
                Some(last) if self.prev_modified => last.1 = r.t + self.dt,
                _ => s.scc_activation_intervals.push((r.t, r.t + self.dt)),
            }
        }
        self.prev_modified = r.scc_modified;
        if r.x.d_omega_hat.abs() >= SETTLING_BAND {
            s.settling_time = None;
        } else if s.settling_time.is_none() {
            s.settling_time = Some(r.t);
        }
    }

    fn finish(mut self) -> RunSummary {
        self.summary.scc_active_time = self.modified_steps as f64 * self.dt;
        self.summary
    }
}

/// Runs a validated scenario.
pub fn run(config: &ScenarioConfig) -> Result<RunOutput, RunError> {
    config.validate()?;
    let dt = config.dt;
    let model = build_continuous_model(&config.params)?;
    let scc_cfg = config.scc.config();
    let dm_scc = discretize(&model, scc_cfg.t_s)?;
    let dm_filter = discretize(&model, dt)?;
    let kalman = config.estimator.kalman_config(dt);
    kalman.validate()?;

    let noise_std = config.estimator.measurement_noise_std;
    let noise =
        noise_std.map(|s| Normal::new(0.0, s).expect("noise std validated as finite and >= 0"));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let steps = config.steps();
    let mut trace = Vec::with_capacity(steps);
    let mut summary = SummaryBuilder::new(dt);

    let mut x = config.initial_state;
    let mut est = EstimatorState::new(&kalman);
    let mut integrator = 0.0;
    let mut relays = RelayBank::new();
    let mut u_prev = InputVector::default();

    for n in 0..steps {
        let t = n as f64 * dt;
        let dp_l = config.disturbance.load_at(t);

        let mut z = SVector::<f64, 2>::new(x.d_omega_hat, x.omega_dot_hat);
        for (zi, (dist, std)) in z.iter_mut().zip(noise.iter().zip(noise_std)) {
            if std > 0.0 {
                *zi += dist.sample(&mut rng);
            }
        }

        let (dp_c_legit, next_integrator) =
            local_controller_step(&config.params, z[0], integrator, dt);
        integrator = next_integrator;
        let dp_c_attacked = attack_signal(&config.attack, t, dp_c_legit);

        est = if n == 0 {
            kf_update(&est, &kalman, &z)?
        } else {
            kf_step(&est, &kalman, &dm_filter, &u_prev, &z)?
        };
        let x_scc = if config.estimator.use_true_state {
            x
        } else {
            est.x_hat
        };

        let (filter, barriers) = if config.scc.enabled {
            let out = scc_step(
                &dm_scc,
                &model,
                &config.limits,
                &scc_cfg,
                &x_scc,
                dp_c_attacked,
                dp_l,
            );
            (out.filter, out.barriers)
        } else {
            let u = InputVector::new(dp_c_attacked, scc_cfg.effective_load(dp_l));
            let barriers = eval_barriers(&dm_scc, &config.limits, &x_scc, &u, &scc_cfg);
            let vacuous = AffineConstraint {
                slope: 0.0,
                intercept: -1.0,
            };
            (filter_control(dp_c_attacked, &[vacuous; 2]), barriers)
        };
        debug_assert_eq!(
            filter.modified,
            (filter.dp_c_star - dp_c_attacked).abs() > MODIFY_TOL
        );

        let trip_events = relays.step(&config.relay, 1.0 + x.d_omega_hat, x.omega_dot_hat, dt, t);
        let tripped = !trip_events.is_empty();

        let record = TraceRecord {
            t,
            x,
            x_hat: est.x_hat,
            dp_c_legit,
            dp_c_attacked,
            dp_c_star: filter.dp_c_star,
            dp_l,
            h_omega: barriers.omega.h,
            h_nu: barriers.nu.h,
            scc_modified: filter.modified,
            alarm: filter.alarm,
            relay_states: relays.code(),
            trip_events,
        };
        summary.push(&record);
        trace.push(record);

        if tripped && config.on_trip == OnTrip::Halt {
            break;
        }

        let u = InputVector::new(filter.dp_c_star, dp_l);
        let next: StateVector = step_continuous(&model, &x, &u, dt)?;
        if !next.is_finite() {
            return Err(RunError::NonFinite {
                index: n + 1,
                t: (n + 1) as f64 * dt,
            });
        }
        x = next;
        u_prev = u;
    }

    Ok(RunOutput {
        summary: summary.finish(),
        trace,
    })
}
