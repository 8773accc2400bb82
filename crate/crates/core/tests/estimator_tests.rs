use lfc_scc::dynamics::{build_continuous_model, StateVector, SystemParams};
use lfc_scc::estimator::observability_rank;
use lfc_scc::linalg::min_symmetric_eigenvalue;
use lfc_scc::scenario::{run, ScenarioConfig};
use lfc_scc::{
    attacks::{AttackKind, AttackSpec},
    dynamics::Vec5,
};

/// Plant disturbed away from its initial state while the filter starts at
/// the origin; noiseless measurements.
fn wrong_init_scenario(duration: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(duration);
    cfg.scc.enabled = false;
    cfg.initial_state = StateVector::from_vector(&Vec5::new(0.02, -0.01, 0.01, 0.008, -0.005));
    cfg.estimator.initial_state = StateVector::default();
    cfg.attack = AttackSpec {
        kind: AttackKind::Sinusoid,
        amplitude: 0.05,
        frequency: 0.3,
        ..AttackSpec::none()
    };
    cfg
}

#[test]
fn canonical_rank_is_full() {
    let m = build_continuous_model(&SystemParams::default()).unwrap();
    assert_eq!(observability_rank(&m), 5);
}

#[test]
fn noiseless_filter_converges_from_wrong_initialization() {
    let out = run(&wrong_init_scenario(10.0)).unwrap();
    let initial = (out.trace[0].x.to_vector() - out.trace[0].x_hat.to_vector()).amax();
    assert!(initial > 1e-3);
    let worst_after_5s = out
        .trace
        .iter()
        .filter(|r| r.t >= 5.0)
        .map(|r| (r.x.to_vector() - r.x_hat.to_vector()).amax())
        .fold(0.0, f64::max);
    assert!(worst_after_5s < 1e-4, "error after 5 s: {worst_after_5s:e}");
}

#[test]
fn covariance_stays_positive_semidefinite() {
    use lfc_scc::dynamics::{discretize, InputVector};
    use lfc_scc::estimator::{kf_step, EstimatorState};
    use nalgebra::Vector2;

    let m = build_continuous_model(&SystemParams::default()).unwrap();
    let dt = 1e-3;
    let dm = discretize(&m, dt).unwrap();
    let cfg = ScenarioConfig::new(1.0).estimator.kalman_config(dt);
    let mut est = EstimatorState::new(&cfg);
    let mut x = Vec5::new(0.01, 0.0, 0.0, 0.0, 0.0);
    let u = InputVector::new(0.0, 0.02);
    for n in 0..60_000 {
        x = dm.propagate(&x, &u.to_vector());
        let z = Vector2::new(x[3], x[4]);
        est = kf_step(&est, &cfg, &dm, &u, &z).unwrap();
        if n % 1000 == 0 {
            assert!((est.p - est.p.transpose()).amax() == 0.0);
            assert!(min_symmetric_eigenvalue(&est.p) >= -1e-15);
        }
    }
    assert!((est.x_hat.to_vector() - x).amax() < 1e-6);
}
