//! Single-area load-frequency control plant: state-space model, zero-order-hold
//! discretization, look-ahead measurement prediction, RK4 integration and the
//! local integral controller.
//!
//! State ordering is `[ΔP_g, ΔP_m, Δω, Δω̂, ω̂̇]`, input ordering `[ΔP_c, ΔP_L]`.

use nalgebra::{RowSVector, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::linalg;

pub type Mat5 = SMatrix<f64, 5, 5>;
pub type Mat52 = SMatrix<f64, 5, 2>;
pub type Vec5 = SVector<f64, 5>;
pub type Row5 = RowSVector<f64, 5>;

/// Row selecting the measured frequency deviation Δω̂.
pub const C_OMEGA: [f64; 5] = [0.0, 0.0, 0.0, 1.0, 0.0];
/// Row selecting the measured ROCOF ω̂̇.
pub const C_NU: [f64; 5] = [0.0, 0.0, 0.0, 0.0, 1.0];

/// Condition numbers above this are treated as a singular state matrix.
const MAX_CONDITION: f64 = 1e12;

/// Largest step accepted by [`step_continuous`].
pub const MAX_STEP: f64 = 0.01;

/// Physical constants of the aggregated generator, governor, turbine and sensors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Governor time constant (s).
    pub tau_g: f64,
    /// Turbine time constant (s).
    pub tau_t: f64,
    /// Frequency sensor time constant (s).
    pub tau_omega: f64,
    /// ROCOF sensor time constant (s).
    pub tau_nu: f64,
    /// Inertia constant M (pu·s).
    pub inertia_m: f64,
    /// Load damping D (pu).
    pub damping_d: f64,
    /// Governor droop R (pu).
    pub droop_r: f64,
    /// Integral gain of the local controller (pu/s).
    pub gain_k: f64,
    /// Frequency reference deviation set by the control centre (pu).
    pub omega_ref: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            tau_g: 0.2,
            tau_t: 0.5,
            tau_omega: 0.1,
            tau_nu: 0.2,
            inertia_m: 10.0,
            damping_d: 0.8,
            droop_r: 0.05,
            gain_k: 1.0,
            omega_ref: 0.0,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("tau_g", self.tau_g),
            ("tau_t", self.tau_t),
            ("tau_omega", self.tau_omega),
            ("tau_nu", self.tau_nu),
            ("inertia_m", self.inertia_m),
            ("droop_r", self.droop_r),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidParameter {
                    field,
                    reason: format!("must be finite and > 0, got {value}"),
                });
            }
        }
        let finite = [
            ("damping_d", self.damping_d),
            ("gain_k", self.gain_k),
            ("omega_ref", self.omega_ref),
        ];
        for (field, value) in finite {
            if !value.is_finite() {
                return Err(ModelError::InvalidParameter {
                    field,
                    reason: format!("must be finite, got {value}"),
                });
            }
        }
        if self.damping_d < 0.0 {
            return Err(ModelError::InvalidParameter {
                field: "damping_d",
                reason: format!("must be >= 0, got {}", self.damping_d),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateVector {
    /// Governor output ΔP_g.
    pub dp_g: f64,
    /// Mechanical power ΔP_m.
    pub dp_m: f64,
    /// True frequency deviation Δω.
    pub d_omega: f64,
    /// Measured frequency deviation Δω̂.
    pub d_omega_hat: f64,
    /// Measured ROCOF ω̂̇.
    pub omega_dot_hat: f64,
}

impl StateVector {
    pub fn from_vector(v: &Vec5) -> Self {
        Self {
            dp_g: v[0],
            dp_m: v[1],
            d_omega: v[2],
            d_omega_hat: v[3],
            omega_dot_hat: v[4],
        }
    }

    pub fn to_vector(&self) -> Vec5 {
        Vec5::new(
            self.dp_g,
            self.dp_m,
            self.d_omega,
            self.d_omega_hat,
            self.omega_dot_hat,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InputVector {
    /// Governor-droop control signal ΔP_c.
    pub dp_c: f64,
    /// Load change ΔP_L.
    pub dp_l: f64,
}

impl InputVector {
    pub fn new(dp_c: f64, dp_l: f64) -> Self {
        Self { dp_c, dp_l }
    }

    pub fn to_vector(&self) -> SVector<f64, 2> {
        SVector::<f64, 2>::new(self.dp_c, self.dp_l)
    }
}

/// Continuous-time `ẋ = A x + B u`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousModel {
    a: Mat5,
    b: Mat52,
}

impl ContinuousModel {
    /// Wraps arbitrary matrices without the invertibility check. Intended for
    /// synthetic models; plant models come from [`build_continuous_model`].
    pub fn from_matrices(a: Mat5, b: Mat52) -> Self {
        Self { a, b }
    }

    pub fn a(&self) -> &Mat5 {
        &self.a
    }

    pub fn b(&self) -> &Mat52 {
        &self.b
    }

    /// Column of `B` multiplying ΔP_c.
    pub fn b_control(&self) -> Vec5 {
        self.b.column(0).into_owned()
    }

    /// Column of `B` multiplying ΔP_L.
    pub fn b_load(&self) -> Vec5 {
        self.b.column(1).into_owned()
    }

    pub fn derivative(&self, x: &Vec5, u: &SVector<f64, 2>) -> Vec5 {
        self.a * x + self.b * u
    }
}

/// Builds `A` and `B` for the single-area plant.
///
/// The governor row carries `−1/(R τ_G)` on Δω: speed droop opposes the
/// frequency deviation. With a positive entry the plant has a real unstable
/// pole for every physical parameter set.
pub fn build_continuous_model(params: &SystemParams) -> Result<ContinuousModel, ModelError> {
    params.validate()?;
    let SystemParams {
        tau_g,
        tau_t,
        tau_omega,
        tau_nu,
        inertia_m: m,
        damping_d: d,
        droop_r: r,
        ..
    } = *params;

    #[rustfmt::skip]
    let a = Mat5::new(
        -1.0 / tau_g,        0.0,                 -1.0 / (r * tau_g),     0.0,               0.0,
        1.0 / tau_t,         -1.0 / tau_t,        0.0,                    0.0,               0.0,
        0.0,                 1.0 / m,             -d / m,                 0.0,               0.0,
        0.0,                 0.0,                 1.0 / tau_omega,        -1.0 / tau_omega,  0.0,
        0.0,                 1.0 / (m * tau_nu),  -d / (m * tau_nu),      0.0,               -1.0 / tau_nu,
    );
    #[rustfmt::skip]
    let b = Mat52::new(
        1.0 / tau_g, 0.0,
        0.0,         0.0,
        0.0,         -1.0 / m,
        0.0,         0.0,
        0.0,         -1.0 / (m * tau_nu),
    );

    let condition = linalg::condition_number(&a);
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(ModelError::SingularModel { condition });
    }
    Ok(ContinuousModel { a, b })
}

/// Zero-order-hold discretization over a horizon `t_s`, plus the measurement
/// selector rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModel {
    a_d: Mat5,
    b_d: Mat52,
    t_s: f64,
}

impl DiscreteModel {
    pub fn a_d(&self) -> &Mat5 {
        &self.a_d
    }

    pub fn b_d(&self) -> &Mat52 {
        &self.b_d
    }

    pub fn t_s(&self) -> f64 {
        self.t_s
    }

    pub fn c_omega(&self) -> Row5 {
        Row5::from_row_slice(&C_OMEGA)
    }

    pub fn c_nu(&self) -> Row5 {
        Row5::from_row_slice(&C_NU)
    }

    /// `A_d x + B_d u`.
    pub fn propagate(&self, x: &Vec5, u: &SVector<f64, 2>) -> Vec5 {
        self.a_d * x + self.b_d * u
    }
}

/// How [`discretize_with`] treats a zero horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroHorizon {
    /// `t_s = 0` yields `A_d = I`, `B_d = 0`.
    Accept,
    Reject,
}

/// Discretizes with `t_s > 0`; see [`discretize_with`].
pub fn discretize(model: &ContinuousModel, t_s: f64) -> Result<DiscreteModel, ModelError> {
    discretize_with(model, t_s, ZeroHorizon::Reject)
}

/// `A_d = exp(A t_s)`; `B_d` is the upper-right block of
/// `exp([[A, B], [0, 0]] t_s)`. When `A` is invertible, `B_d` is cross-checked
/// against `A⁻¹ (A_d − I) B`.
pub fn discretize_with(
    model: &ContinuousModel,
    t_s: f64,
    zero: ZeroHorizon,
) -> Result<DiscreteModel, ModelError> {
    if !t_s.is_finite() || t_s < 0.0 || (t_s == 0.0 && zero == ZeroHorizon::Reject) {
        return Err(ModelError::NonPositiveHorizon(t_s));
    }
    if t_s == 0.0 {
        return Ok(DiscreteModel {
            a_d: Mat5::identity(),
            b_d: Mat52::zeros(),
            t_s,
        });
    }

    let a_d = linalg::expm(&(model.a * t_s)).ok_or(ModelError::NonFiniteExponential)?;

    let mut aug = SMatrix::<f64, 7, 7>::zeros();
    aug.fixed_view_mut::<5, 5>(0, 0).copy_from(&(model.a * t_s));
    aug.fixed_view_mut::<5, 2>(0, 5).copy_from(&(model.b * t_s));
    let aug_exp = linalg::expm(&aug).ok_or(ModelError::NonFiniteExponential)?;
    let b_d: Mat52 = aug_exp.fixed_view::<5, 2>(0, 5).into_owned();

    if let Some(a_inv) = model.a.try_inverse() {
        if linalg::condition_number(&model.a) <= MAX_CONDITION {
            let b_d_inv = a_inv * (a_d - Mat5::identity()) * model.b;
            let diff = (b_d_inv - b_d).norm();
            if diff > 1e-8 * b_d.norm().max(1.0) {
                return Err(ModelError::DiscretizationMismatch(diff));
            }
        }
    }

    Ok(DiscreteModel { a_d, b_d, t_s })
}

/// `[Δω̂, ω̂̇]` at `t + T_s` with `u` held: `C (A_d x + B_d u)`.
pub fn predict_measurements(dm: &DiscreteModel, x: &StateVector, u: &InputVector) -> (f64, f64) {
    let next = dm.propagate(&x.to_vector(), &u.to_vector());
    (next[3], next[4])
}

/// One classical RK4 step of `ẋ = A x + B u` with `u` held over `dt`.
pub fn step_continuous(
    model: &ContinuousModel,
    x: &StateVector,
    u: &InputVector,
    dt: f64,
) -> Result<StateVector, ModelError> {
    if !(dt > 0.0 && dt <= MAX_STEP) {
        return Err(ModelError::StepOutOfRange(dt));
    }
    let u = u.to_vector();
    let x = x.to_vector();
    let f = |x: &Vec5| model.derivative(x, &u);
    let k1 = f(&x);
    let k2 = f(&(x + k1 * (dt / 2.0)));
    let k3 = f(&(x + k2 * (dt / 2.0)));
    let k4 = f(&(x + k3 * dt));
    let next = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    Ok(StateVector::from_vector(&next))
}

/// Forward-Euler update of `d(ΔP_c)/dt = k (Δω_ref − Δω̂)`.
///
/// Returns `(ΔP_c reference, new integrator state)`; they coincide because the
/// controller is a pure integrator.
pub fn local_controller_step(
    params: &SystemParams,
    d_omega_hat: f64,
    integrator_state: f64,
    dt: f64,
) -> (f64, f64) {
    let next = integrator_state + dt * params.gain_k * (params.omega_ref - d_omega_hat);
    (next, next)
}
