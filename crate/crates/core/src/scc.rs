//! Safety-critical controller: barrier functions on the `T_s`-ahead frequency
//! and ROCOF predictions, their log-barriers, and the scalar QP that minimally
//! modifies the governor control signal.
//!
//! For each measured quantity `p` with bound `L` the barrier is `h = L − p²`
//! evaluated on the prediction `C (A_d x + B_d u)`, with log-barrier
//! `B = −log(h / (1 + h))`. The safety constraint is
//!
//! ```text
//! Ḃ − α / B ≤ 0,   Ḃ = −(∂h/∂x) (A x + B u) / (h + h²),   ∂h/∂x = −2 p C A_d
//! ```
//!
//! which is affine in the scalar decision `u = ΔP_c`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    predict_measurements, ContinuousModel, DiscreteModel, InputVector, Row5, StateVector,
};
use crate::error::ModelError;

/// Threshold on `|ΔP_c* − ΔP_c|` above which the signal counts as modified.
pub const MODIFY_TOL: f64 = 1e-12;

/// Protection bounds the controller keeps the measurements inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SafetyLimits {
    /// Over-frequency threshold (absolute pu).
    pub f_over: f64,
    /// Under-frequency threshold (absolute pu).
    pub f_under: f64,
    /// ROCOF bound (pu/s).
    pub rocof_limit: f64,
}

impl Default for SafetyLimits {
    fn default() -> Self {
        Self {
            f_over: 1.03,
            f_under: 0.942,
            rocof_limit: 0.05,
        }
    }
}

impl SafetyLimits {
    pub fn new(f_over: f64, f_under: f64, rocof_limit: f64) -> Result<Self, ModelError> {
        let limits = Self {
            f_over,
            f_under,
            rocof_limit,
        };
        limits.validate()?;
        Ok(limits)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.f_over.is_finite() && self.f_over > 1.0) {
            return Err(ModelError::InvalidParameter {
                field: "f_over",
                reason: format!("must exceed 1 pu, got {}", self.f_over),
            });
        }
        if !(self.f_under.is_finite() && self.f_under < 1.0 && self.f_under > 0.0) {
            return Err(ModelError::InvalidParameter {
                field: "f_under",
                reason: format!("must lie in (0, 1) pu, got {}", self.f_under),
            });
        }
        if !(self.rocof_limit.is_finite() && self.rocof_limit > 0.0) {
            return Err(ModelError::InvalidParameter {
                field: "rocof_limit",
                reason: format!("must be > 0, got {}", self.rocof_limit),
            });
        }
        Ok(())
    }

    /// Symmetric bound on the frequency deviation: `min(F̄ − 1, 1 − F_low)`.
    pub fn f_dev(&self) -> f64 {
        (self.f_over - 1.0).min(1.0 - self.f_under)
    }
}

/// How the load change enters the look-ahead prediction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadInputMode {
    /// Use the measured ΔP_L.
    #[default]
    Measured,
    /// Assume ΔP_L = 0.
    Zero,
}

/// Which bound `L` appears in `h = L − p²`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierForm {
    /// `L` is the squared threshold, so `h ≥ 0 ⇔ |p| ≤ threshold`.
    #[default]
    SquaredBound,
    /// `L` is the threshold itself, so `h ≥ 0 ⇔ |p| ≤ √threshold`.
    RawBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SccConfig {
    /// Barrier aggressiveness α; smaller is more conservative.
    pub alpha: f64,
    /// Look-ahead horizon T_s (s).
    pub t_s: f64,
    /// Minimum `h` used inside the logarithm.
    pub h_floor: f64,
    #[serde(default)]
    pub load_input_mode: LoadInputMode,
    #[serde(default)]
    pub barrier_form: BarrierForm,
}

impl Default for SccConfig {
    fn default() -> Self {
        Self {
            alpha: 20.0,
            t_s: 0.25,
            h_floor: 1e-6,
            load_input_mode: LoadInputMode::Measured,
            barrier_form: BarrierForm::SquaredBound,
        }
    }
}

impl SccConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(ModelError::InvalidParameter {
                field: "alpha",
                reason: format!("must be > 0, got {}", self.alpha),
            });
        }
        if !(self.t_s.is_finite() && self.t_s > 0.0) {
            return Err(ModelError::InvalidParameter {
                field: "t_s",
                reason: format!("must be > 0, got {}", self.t_s),
            });
        }
        if !(self.h_floor > 0.0 && self.h_floor <= 1e-3) {
            return Err(ModelError::InvalidParameter {
                field: "h_floor",
                reason: format!("must lie in (0, 1e-3], got {}", self.h_floor),
            });
        }
        Ok(())
    }

    /// ΔP_L as seen by the prediction.
    pub fn effective_load(&self, dp_l: f64) -> f64 {
        match self.load_input_mode {
            LoadInputMode::Measured => dp_l,
            LoadInputMode::Zero => 0.0,
        }
    }

    fn bound(&self, threshold: f64) -> f64 {
        match self.barrier_form {
            BarrierForm::SquaredBound => threshold * threshold,
            BarrierForm::RawBound => threshold,
        }
    }
}

/// `−log(h / (1 + h))`.
pub fn log_barrier(h: f64) -> f64 {
    -(h / (1.0 + h)).ln()
}

/// One barrier evaluated at a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barrier {
    /// Predicted measurement `T_s` ahead.
    pub prediction: f64,
    /// Raw barrier value `L − p²`.
    pub h: f64,
    /// `max(h, h_floor)`, the value used by the log-barrier and its derivative.
    pub h_eval: f64,
    /// Log-barrier `B`.
    pub b: f64,
    /// `∂h/∂x = −2 p C A_d`.
    pub grad: Row5,
    /// `h ≤ h_floor`.
    pub floored: bool,
}

impl Barrier {
    fn evaluate(bound: f64, prediction: f64, selector_times_ad: Row5, h_floor: f64) -> Self {
        let h = bound - prediction * prediction;
        let floored = h <= h_floor;
        let h_eval = h.max(h_floor);
        Self {
            prediction,
            h,
            h_eval,
            b: log_barrier(h_eval),
            grad: selector_times_ad * (-2.0 * prediction),
            floored,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierEvaluation {
    pub omega: Barrier,
    pub nu: Barrier,
}

pub fn eval_barriers(
    dm: &DiscreteModel,
    limits: &SafetyLimits,
    x: &StateVector,
    u: &InputVector,
    cfg: &SccConfig,
) -> BarrierEvaluation {
    let (pred_omega, pred_nu) = predict_measurements(dm, x, u);
    BarrierEvaluation {
        omega: Barrier::evaluate(
            cfg.bound(limits.f_dev()),
            pred_omega,
            dm.c_omega() * dm.a_d(),
            cfg.h_floor,
        ),
        nu: Barrier::evaluate(
            cfg.bound(limits.rocof_limit),
            pred_nu,
            dm.c_nu() * dm.a_d(),
            cfg.h_floor,
        ),
    }
}

/// `slope · u + intercept ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineConstraint {
    pub slope: f64,
    pub intercept: f64,
}

impl AffineConstraint {
    pub fn value(&self, u: f64) -> f64 {
        self.slope * u + self.intercept
    }
}

/// Rewrites `Ḃ − α/B ≤ 0` for both barriers as affine constraints in ΔP_c.
///
/// A floored barrier drops the `α/B` relaxation, so the constraint becomes
/// `Ḃ ≤ 0`: once the prediction sits on the boundary it may not move further out.
pub fn constraint_coefficients(
    model: &ContinuousModel,
    ev: &BarrierEvaluation,
    x: &StateVector,
    dp_l: f64,
    cfg: &SccConfig,
) -> [AffineConstraint; 2] {
    let x = x.to_vector();
    let drift = model.a() * x + model.b_load() * cfg.effective_load(dp_l);
    let b_c = model.b_control();
    let build = |barrier: &Barrier| {
        let scale = -1.0 / (barrier.h_eval + barrier.h_eval * barrier.h_eval);
        let relax = if barrier.floored {
            0.0
        } else {
            cfg.alpha / barrier.b
        };
        AffineConstraint {
            slope: scale * barrier.grad.dot(&b_c.transpose()),
            intercept: scale * barrier.grad.dot(&drift.transpose()) - relax,
        }
    };
    [build(&ev.omega), build(&ev.nu)]
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActiveConstraint {
    #[default]
    None,
    Frequency,
    Rocof,
    Both,
}

impl ActiveConstraint {
    fn from_flags(frequency: bool, rocof: bool) -> Self {
        match (frequency, rocof) {
            (false, false) => Self::None,
            (true, false) => Self::Frequency,
            (false, true) => Self::Rocof,
            (true, true) => Self::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterResult {
    /// Filtered control ΔP_c*.
    pub dp_c_star: f64,
    pub modified: bool,
    pub alarm: bool,
    pub feasible: bool,
    pub active_constraint: ActiveConstraint,
    /// Admissible `[lower, upper]` in ΔP_c; crossed when infeasible.
    pub admissible_interval: (f64, f64),
}

/// Closed-form solution of `min ½(u − ref)²` subject to the two constraints
/// (frequency first, ROCOF second).
///
/// Each constraint is a half-line in `u`. When the half-lines do not overlap
/// the result is the midpoint of the crossed bounds, which minimises the
/// larger distance to either half-line. A zero-slope constraint with positive
/// intercept cannot be influenced by `u`; it marks the result infeasible and
/// is otherwise ignored.
pub fn filter_control(dp_c_ref: f64, constraints: &[AffineConstraint; 2]) -> FilterResult {
    let mut lower = (f64::NEG_INFINITY, usize::MAX);
    let mut upper = (f64::INFINITY, usize::MAX);
    let mut feasible = true;

    for (i, c) in constraints.iter().enumerate() {
        if c.slope == 0.0 {
            if c.intercept > 0.0 {
                feasible = false;
            }
            continue;
        }
        let bound = -c.intercept / c.slope;
        if c.slope > 0.0 {
            if bound < upper.0 {
                upper = (bound, i);
            }
        } else if bound > lower.0 {
            lower = (bound, i);
        }
    }

    let (dp_c_star, active) = if lower.0 > upper.0 {
        feasible = false;
        (0.5 * (lower.0 + upper.0), ActiveConstraint::Both)
    } else if dp_c_ref > upper.0 {
        (
            upper.0,
            ActiveConstraint::from_flags(upper.1 == 0, upper.1 == 1),
        )
    } else if dp_c_ref < lower.0 {
        (
            lower.0,
            ActiveConstraint::from_flags(lower.1 == 0, lower.1 == 1),
        )
    } else {
        (dp_c_ref, ActiveConstraint::None)
    };

    let modified = (dp_c_star - dp_c_ref).abs() > MODIFY_TOL;
    FilterResult {
        dp_c_star,
        modified,
        alarm: modified,
        feasible,
        active_constraint: active,
        admissible_interval: (lower.0, upper.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SccOutput {
    pub filter: FilterResult,
    pub barriers: BarrierEvaluation,
    pub constraints: [AffineConstraint; 2],
}

/// Barrier evaluation with the incoming reference, then the constrained QP.
pub fn scc_step(
    dm: &DiscreteModel,
    model: &ContinuousModel,
    limits: &SafetyLimits,
    cfg: &SccConfig,
    x_est: &StateVector,
    dp_c_ref: f64,
    dp_l: f64,
) -> SccOutput {
    let u = InputVector::new(dp_c_ref, cfg.effective_load(dp_l));
    let barriers = eval_barriers(dm, limits, x_est, &u, cfg);
    let constraints = constraint_coefficients(model, &barriers, x_est, dp_l, cfg);
    SccOutput {
        filter: filter_control(dp_c_ref, &constraints),
        barriers,
        constraints,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_continuous_model, discretize, SystemParams};

    fn setup() -> (ContinuousModel, DiscreteModel) {
        let m = build_continuous_model(&SystemParams::default()).unwrap();
        let dm = discretize(&m, 0.25).unwrap();
        (m, dm)
    }

    fn raw_cfg() -> SccConfig {
        SccConfig {
            barrier_form: BarrierForm::RawBound,
            ..SccConfig::default()
        }
    }

    #[test]
    fn f_dev_is_tighter_side() {
        let l = SafetyLimits::default();
        assert!((l.f_dev() - 0.03).abs() < 1e-15);
        let l = SafetyLimits::new(1.05, 0.98, 0.05).unwrap();
        assert!((l.f_dev() - 0.02).abs() < 1e-15);
        assert!(SafetyLimits::new(0.99, 0.9, 0.05).is_err());
        assert!(SafetyLimits::new(1.03, 0.9, 0.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SccConfig::default().validate().is_ok());
        let bad = SccConfig {
            h_floor: 1e-2,
            ..SccConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SccConfig {
            alpha: 0.0,
            ..SccConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn origin_evaluation_raw_bound() {
        let (_, dm) = setup();
        let ev = eval_barriers(
            &dm,
            &SafetyLimits::default(),
            &StateVector::default(),
            &InputVector::default(),
            &raw_cfg(),
        );
        assert!((ev.omega.h - 0.03).abs() < 1e-15);
        assert!((ev.nu.h - 0.05).abs() < 1e-15);
        assert!((ev.omega.b - 3.536_116_699).abs() < 1e-8);
        assert!((ev.omega.b + (0.03f64 / 1.03).ln()).abs() < 1e-15);
        assert!(ev.omega.grad.iter().all(|&g| g == 0.0));
        assert!(ev.nu.grad.iter().all(|&g| g == 0.0));
        assert!(!ev.omega.floored && !ev.nu.floored);
    }

    #[test]
    fn origin_evaluation_squared_bound() {
        let (_, dm) = setup();
        let ev = eval_barriers(
            &dm,
            &SafetyLimits::default(),
            &StateVector::default(),
            &InputVector::default(),
            &SccConfig::default(),
        );
        assert!((ev.omega.h - 9e-4).abs() < 1e-15);
        assert!((ev.nu.h - 2.5e-3).abs() < 1e-15);
    }

    #[test]
    fn log_barrier_at_one() {
        assert!((log_barrier(1.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(log_barrier(1e-6) > 0.0);
        assert!(log_barrier(1e6) > 0.0);
    }

    #[test]
    fn flooring_flags_and_clamps() {
        let (_, dm) = setup();
        let x = StateVector {
            d_omega_hat: 0.5,
            ..StateVector::default()
        };
        let ev = eval_barriers(
            &dm,
            &SafetyLimits::default(),
            &x,
            &InputVector::default(),
            &SccConfig::default(),
        );
        assert!(ev.omega.floored);
        assert!(ev.omega.h < 0.0);
        assert_eq!(ev.omega.h_eval, 1e-6);
        assert!((ev.omega.b - log_barrier(1e-6)).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_constraint_is_vacuous() {
        let (m, dm) = setup();
        let cfg = raw_cfg();
        let x = StateVector::default();
        let ev = eval_barriers(
            &dm,
            &SafetyLimits::default(),
            &x,
            &InputVector::default(),
            &cfg,
        );
        let cons = constraint_coefficients(&m, &ev, &x, 0.0, &cfg);
        for (c, bar) in cons.iter().zip([ev.omega, ev.nu]) {
            assert_eq!(c.slope, 0.0);
            assert!((c.intercept + cfg.alpha / bar.b).abs() < 1e-15);
            assert!(c.intercept < 0.0);
        }
    }

    #[test]
    fn doubling_alpha_shifts_intercept_only() {
        let (m, dm) = setup();
        let x = StateVector {
            dp_g: 0.1,
            dp_m: 0.05,
            d_omega: 0.01,
            d_omega_hat: 0.008,
            omega_dot_hat: -0.01,
        };
        let cfg = SccConfig::default();
        let cfg2 = SccConfig {
            alpha: 2.0 * cfg.alpha,
            ..cfg
        };
        let u = InputVector::new(0.2, 0.0);
        let ev = eval_barriers(&dm, &SafetyLimits::default(), &x, &u, &cfg);
        let c1 = constraint_coefficients(&m, &ev, &x, 0.0, &cfg);
        let c2 = constraint_coefficients(&m, &ev, &x, 0.0, &cfg2);
        for (i, bar) in [ev.omega, ev.nu].iter().enumerate() {
            assert_eq!(c1[i].slope, c2[i].slope);
            let shift = c2[i].intercept - c1[i].intercept;
            assert!((shift + cfg.alpha / bar.b).abs() < 1e-12);
        }
    }

    #[test]
    fn filter_passthrough_inside() {
        let cons = [
            AffineConstraint {
                slope: 1.0,
                intercept: -0.2,
            },
            AffineConstraint {
                slope: -1.0,
                intercept: -0.5,
            },
        ];
        let r = filter_control(0.1, &cons);
        assert_eq!(r.dp_c_star, 0.1);
        assert!(!r.modified && !r.alarm && r.feasible);
        assert_eq!(r.active_constraint, ActiveConstraint::None);
    }

    #[test]
    fn filter_clamps_to_upper() {
        let cons = [
            AffineConstraint {
                slope: 1.0,
                intercept: -0.2,
            },
            AffineConstraint {
                slope: -1.0,
                intercept: -0.5,
            },
        ];
        let r = filter_control(0.4, &cons);
        assert_eq!(r.admissible_interval, (-0.5, 0.2));
        assert_eq!(r.dp_c_star, 0.2);
        assert!(r.modified && r.alarm && r.feasible);
        assert_eq!(r.active_constraint, ActiveConstraint::Frequency);

        let r = filter_control(-0.9, &cons);
        assert_eq!(r.dp_c_star, -0.5);
        assert_eq!(r.active_constraint, ActiveConstraint::Rocof);
    }

    #[test]
    fn filter_infeasible_midpoint() {
        let cons = [
            AffineConstraint {
                slope: 2.0,
                intercept: 0.2,
            },
            AffineConstraint {
                slope: -1.0,
                intercept: 0.3,
            },
        ];
        // u ≤ −0.1 and u ≥ 0.3
        let r = filter_control(0.0, &cons);
        assert!(!r.feasible && r.alarm && r.modified);
        assert!((r.dp_c_star - 0.1).abs() < 1e-15);
        assert_eq!(r.active_constraint, ActiveConstraint::Both);
    }

    #[test]
    fn filter_unsatisfiable_flat_constraint() {
        let cons = [
            AffineConstraint {
                slope: 0.0,
                intercept: 1.0,
            },
            AffineConstraint {
                slope: 1.0,
                intercept: -1.0,
            },
        ];
        let r = filter_control(0.5, &cons);
        assert!(!r.feasible);
        assert_eq!(r.dp_c_star, 0.5);
        assert!(!r.modified);
    }

    #[test]
    fn quiescent_scc_is_identity() {
        let (m, dm) = setup();
        let out = scc_step(
            &dm,
            &m,
            &SafetyLimits::default(),
            &SccConfig::default(),
            &StateVector::default(),
            0.0,
            0.0,
        );
        assert_eq!(out.filter.dp_c_star, 0.0);
        assert!(!out.filter.modified);
    }
}
