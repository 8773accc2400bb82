//! Independent oracles shared by the integration tests. Nothing here calls the
//! library's discretization, integrator or filter.

#![allow(dead_code)]

use std::path::PathBuf;

use lfc_scc::dynamics::{Mat5, Mat52, Vec5};
use lfc_scc::scenario::{load_config, ScenarioConfig};
use nalgebra::SVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SHIPPED: [&str; 6] = [
    "rocof_attack_noscc",
    "rocof_attack_scc3",
    "rocof_attack_scc20",
    "weak_attack",
    "of_bias_attack",
    "load_step",
];

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(format!("{name}.toml"))
}

pub fn shipped(name: &str) -> ScenarioConfig {
    load_config(config_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_state(rng: &mut ChaCha8Rng, scale: f64) -> Vec5 {
    Vec5::from_fn(|_, _| rng.random_range(-scale..scale))
}

/// Exact manual model construction from the parameter table, used to check
/// the library's matrices entry by entry.
pub fn reference_matrices(p: &lfc_scc::dynamics::SystemParams) -> (Mat5, Mat52) {
    let mut a = Mat5::zeros();
    a[(0, 0)] = -1.0 / p.tau_g;
    a[(0, 2)] = -1.0 / (p.droop_r * p.tau_g);
    a[(1, 0)] = 1.0 / p.tau_t;
    a[(1, 1)] = -1.0 / p.tau_t;
    a[(2, 1)] = 1.0 / p.inertia_m;
    a[(2, 2)] = -p.damping_d / p.inertia_m;
    a[(3, 2)] = 1.0 / p.tau_omega;
    a[(3, 3)] = -1.0 / p.tau_omega;
    a[(4, 1)] = 1.0 / (p.inertia_m * p.tau_nu);
    a[(4, 2)] = -p.damping_d / (p.inertia_m * p.tau_nu);
    a[(4, 4)] = -1.0 / p.tau_nu;
    let mut b = Mat52::zeros();
    b[(0, 0)] = 1.0 / p.tau_g;
    b[(2, 1)] = -1.0 / p.inertia_m;
    b[(4, 1)] = -1.0 / (p.inertia_m * p.tau_nu);
    (a, b)
}

/// Fine-step RK4 on `Φ' = AΦ, Γ' = AΓ + B` from `(I, 0)` over `[0, t]`.
pub fn fine_step_discretization(a: &Mat5, b: &Mat52, t: f64, h: f64) -> (Mat5, Mat52) {
    let n = (t / h).round() as usize;
    let h = t / n as f64;
    let mut phi = Mat5::identity();
    let mut gamma = Mat52::zeros();
    for _ in 0..n {
        let k1 = a * phi;
        let k2 = a * (phi + k1 * (h / 2.0));
        let k3 = a * (phi + k2 * (h / 2.0));
        let k4 = a * (phi + k3 * h);
        phi += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);

        let g1 = a * gamma + b;
        let g2 = a * (gamma + g1 * (h / 2.0)) + b;
        let g3 = a * (gamma + g2 * (h / 2.0)) + b;
        let g4 = a * (gamma + g3 * h) + b;
        gamma += (g1 + g2 * 2.0 + g3 * 2.0 + g4) * (h / 6.0);
    }
    (phi, gamma)
}

/// Truncated Taylor series of `exp(A t)` with repeated halving/squaring so the
/// series argument stays small.
pub fn taylor_expm(a: &Mat5, t: f64) -> Mat5 {
    let mut squarings = 0;
    let mut m = a * t;
    while m.norm() > 0.1 {
        m /= 2.0;
        squarings += 1;
    }
    let mut sum = Mat5::identity();
    let mut term = Mat5::identity();
    for k in 1..=30 {
        term = term * m / k as f64;
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// Integrates `ẋ = Ax + Bu` with `u` held, fine-step RK4.
pub fn held_input_response(
    a: &Mat5,
    b: &Mat52,
    x0: &Vec5,
    u: &SVector<f64, 2>,
    t: f64,
    h: f64,
) -> Vec5 {
    let n = (t / h).round() as usize;
    let h = t / n as f64;
    let f = |x: &Vec5| a * x + b * u;
    let mut x = *x0;
    for _ in 0..n {
        let k1 = f(&x);
        let k2 = f(&(x + k1 * (h / 2.0)));
        let k3 = f(&(x + k2 * (h / 2.0)));
        let k4 = f(&(x + k3 * h));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    x
}

/// Minimizer of `|u − ref|` over the grid points with the smallest constraint
/// violation, where violation is the largest distance (in `u`) to any
/// violated half-line `slope·u + intercept ≤ 0`. Violations within half a
/// grid step of the least one count as equal, so the result is accurate to
/// `step / 2`.
pub fn grid_filter(
    reference: f64,
    constraints: &[(f64, f64); 2],
    lo: f64,
    hi: f64,
    step: f64,
) -> f64 {
    let n = ((hi - lo) / step).round() as usize;
    let violation = |u: f64| {
        constraints
            .iter()
            .map(|&(s, c)| {
                if s == 0.0 {
                    0.0
                } else {
                    ((s * u + c) / s.abs()).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    };
    let grid = || (0..=n).map(|i| lo + i as f64 * step);
    let least = grid().map(violation).fold(f64::INFINITY, f64::min);
    grid()
        .filter(|&u| violation(u) <= least + 0.5 * step)
        .min_by(|a, b| (a - reference).abs().total_cmp(&(b - reference).abs()))
        .expect("grid is non-empty")
}
