//! Linear Kalman filter reconstructing the plant state from the measured
//! frequency deviation and ROCOF.

use nalgebra::{DMatrix, SMatrix, SVector};

use crate::dynamics::{
    ContinuousModel, DiscreteModel, InputVector, Mat5, StateVector, C_NU, C_OMEGA,
};
use crate::error::EstimatorError;
use crate::linalg;

pub type Mat2 = SMatrix<f64, 2, 2>;
pub type Mat25 = SMatrix<f64, 2, 5>;
pub type Vec2 = SVector<f64, 2>;

/// Measurement matrix `[C_ω; C_ν]`.
pub fn measurement_matrix() -> Mat25 {
    let mut c = Mat25::zeros();
    for j in 0..5 {
        c[(0, j)] = C_OMEGA[j];
        c[(1, j)] = C_NU[j];
    }
    c
}

/// Rank of `[C; CA; CA²; CA³; CA⁴]` with tolerance `1e-8 σ_max`.
pub fn observability_rank(model: &ContinuousModel) -> usize {
    observability_rank_with(model.a(), &measurement_matrix())
}

pub fn observability_rank_with(a: &Mat5, c: &Mat25) -> usize {
    let mut obs = DMatrix::<f64>::zeros(10, 5);
    let mut block = *c;
    for k in 0..5 {
        obs.view_mut((2 * k, 0), (2, 5)).copy_from(&block);
        block *= a;
    }
    linalg::numerical_rank(&obs, 1e-8)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanConfig {
    pub process_noise_cov: Mat5,
    pub measurement_noise_cov: Mat2,
    pub initial_state: StateVector,
    pub initial_cov: Mat5,
    /// Filter step (s); the filter's own discretization uses this horizon.
    pub dt: f64,
}

impl KalmanConfig {
    /// Diagonal noise and prior covariances.
    pub fn diagonal(q: [f64; 5], r: [f64; 2], p0: [f64; 5], x0: StateVector, dt: f64) -> Self {
        Self {
            process_noise_cov: Mat5::from_diagonal(&SVector::from(q)),
            measurement_noise_cov: Mat2::from_diagonal(&Vec2::from(r)),
            initial_state: x0,
            initial_cov: Mat5::from_diagonal(&SVector::from(p0)),
            dt,
        }
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        check_cov(&self.process_noise_cov, "process_noise_cov", false)?;
        check_cov(&self.measurement_noise_cov, "measurement_noise_cov", true)?;
        check_cov(&self.initial_cov, "initial_cov", true)?;
        Ok(())
    }
}

fn check_cov<const N: usize>(
    m: &SMatrix<f64, N, N>,
    field: &'static str,
    strict: bool,
) -> Result<(), EstimatorError> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(EstimatorError::InvalidCovariance {
            field,
            property: "finite",
        });
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    if (m - m.transpose()).amax() > 1e-12 * scale {
        return Err(EstimatorError::InvalidCovariance {
            field,
            property: "symmetric",
        });
    }
    let min_eig = linalg::min_symmetric_eigenvalue(m);
    if strict && min_eig <= 0.0 {
        return Err(EstimatorError::InvalidCovariance {
            field,
            property: "positive definite",
        });
    }
    if min_eig < -1e-12 * scale {
        return Err(EstimatorError::InvalidCovariance {
            field,
            property: "positive semidefinite",
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    pub x_hat: StateVector,
    pub p: Mat5,
    /// Number of measurement updates applied.
    pub steps: u64,
}

impl EstimatorState {
    pub fn new(cfg: &KalmanConfig) -> Self {
        Self {
            x_hat: cfg.initial_state,
            p: cfg.initial_cov,
            steps: 0,
        }
    }
}

/// Time update: `x⁻ = A_d x̂ + B_d u`, `P⁻ = A_d P A_dᵀ + Q`.
pub fn kf_predict(
    est: &EstimatorState,
    cfg: &KalmanConfig,
    dm_filter: &DiscreteModel,
    u: &InputVector,
) -> EstimatorState {
    let a = dm_filter.a_d();
    let x = dm_filter.propagate(&est.x_hat.to_vector(), &u.to_vector());
    let p = a * est.p * a.transpose() + cfg.process_noise_cov;
    EstimatorState {
        x_hat: StateVector::from_vector(&x),
        p: symmetrize(&p),
        steps: est.steps,
    }
}

/// Measurement update with the Joseph-form covariance.
pub fn kf_update(
    est: &EstimatorState,
    cfg: &KalmanConfig,
    z: &Vec2,
) -> Result<EstimatorState, EstimatorError> {
    let h = measurement_matrix();
    let x = est.x_hat.to_vector();
    let innovation = z - h * x;
    let s = h * est.p * h.transpose() + cfg.measurement_noise_cov;
    let s_inv = s
        .try_inverse()
        .filter(|inv| inv.iter().all(|v| v.is_finite()))
        .ok_or(EstimatorError::SingularInnovation { step: est.steps })?;
    let gain = est.p * h.transpose() * s_inv;
    let x_new = x + gain * innovation;
    let i_kh = Mat5::identity() - gain * h;
    let p_new =
        i_kh * est.p * i_kh.transpose() + gain * cfg.measurement_noise_cov * gain.transpose();
    Ok(EstimatorState {
        x_hat: StateVector::from_vector(&x_new),
        p: symmetrize(&p_new),
        steps: est.steps + 1,
    })
}

/// Predict with the input applied over the last interval, then update with `z`.
pub fn kf_step(
    est: &EstimatorState,
    cfg: &KalmanConfig,
    dm_filter: &DiscreteModel,
    u: &InputVector,
    z: &Vec2,
) -> Result<EstimatorState, EstimatorError> {
    kf_update(&kf_predict(est, cfg, dm_filter, u), cfg, z)
}

fn symmetrize(p: &Mat5) -> Mat5 {
    (p + p.transpose()) * 0.5
}
