use mcgl::cahn_hilliard::*;
use mcgl::phase_plane::Model;
use mcgl::potential::PotentialSpec;
use mcgl::stationary::{energy_of_profile, reconstruct_profile_at, solve_simple, SolveOptions};
use proptest::prelude::*;
use std::f64::consts::PI;

fn config(n: usize, eps: f64, t_end: f64) -> SimConfig {
    SimConfig::new(n, eps, PotentialSpec::symmetric_quartic(), t_end)
}

fn smooth_state(n: usize, amps: &[f64]) -> Vec<f64> {
    cell_centres(n)
        .iter()
        .map(|&x| 2.0 + amps.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * x + k as f64).sin()).sum::<f64>())
        .collect()
}

/// `(E[u + sφ] - E[u - sφ])/(2s)`.
fn directional_derivative(cfg: &SimConfig, u: &[f64], phi: &[f64], s: f64) -> f64 {
    let shifted = |c: f64| -> Vec<f64> { u.iter().zip(phi).map(|(a, b)| a + c * b).collect() };
    (discrete_energy(cfg, &shifted(s)) - discrete_energy(cfg, &shifted(-s))) / (2.0 * s)
}

#[test]
fn linear_regime_matches_the_laplacian() {
    let (n, eps, a, c) = (128, 0.1, 1e-4, 1.7);
    let cfg = config(n, eps, 1.0);
    let dx = cfg.dx();
    let xs = cell_centres(n);
    let u: Vec<f64> = xs.iter().map(|x| c + a * (PI * (x + 1.0)).cos()).collect();
    let mu = chemical_potential(&cfg, &u);
    for i in 1..n - 1 {
        let lap = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dx * dx);
        let linear = cfg.potential.df(c) + cfg.potential.d2f(c) * (u[i] - c) - eps * eps * lap;
        assert!((mu[i] - linear).abs() < 1e-7, "cell {i}: {} vs {linear}", mu[i]);
    }
}

#[test]
fn maxwell_profile_energy_matches_the_stationary_quadrature() {
    let m = Model::new(PotentialSpec::symmetric_quartic()).unwrap();
    let s = solve_simple(&m, 0.1, 2.0, &SolveOptions::default()).unwrap();
    let cfg = config(400, 0.1, 1.0);
    let p = reconstruct_profile_at(&s, cell_centres(400)).unwrap();
    let e = discrete_energy(&cfg, &p.us);
    assert!((e - energy_of_profile(&m.potential, 0.1, &p)).abs() < 1e-6);
    let state = SimState::new(&cfg, p.us.clone()).unwrap();
    let d = diagnostics(&state);
    assert_eq!(d.energy, e);
    assert!((d.mass - 4.0).abs() < 1e-6);
}

#[test]
fn equilibrium_residual_shrinks_at_second_order() {
    let m = Model::new(PotentialSpec::symmetric_quartic()).unwrap();
    let s = solve_simple(&m, 0.1, 2.0, &SolveOptions::default()).unwrap();
    let residual = |n: usize| {
        let cfg = config(n, 0.1, 1.0);
        let p = reconstruct_profile_at(&s, cell_centres(n)).unwrap();
        let mu = chemical_potential(&cfg, &p.us);
        let dx = cfg.dx();
        let mut flux = vec![0.0; n + 1];
        for f in 1..n {
            flux[f] = (mu[f] - mu[f - 1]) / dx;
        }
        (0..n).map(|i| ((flux[i + 1] - flux[i]) / dx).abs()).fold(0.0, f64::max)
    };
    let (r200, r400, r800) = (residual(200), residual(400), residual(800));
    assert!(r400 < 0.3 * r200 && r800 < 0.3 * r400, "{r200} {r400} {r800}");
}

#[test]
fn maxwell_profile_is_an_equilibrium() {
    let m = Model::new(PotentialSpec::symmetric_quartic()).unwrap();
    let s = solve_simple(&m, 0.1, 2.0, &SolveOptions::default()).unwrap();
    let n = 100;
    let p = reconstruct_profile_at(&s, cell_centres(n)).unwrap();
    let mut cfg = config(n, 0.1, 10.0);
    cfg.sample_interval = 1.0;
    let out = run(&cfg, p.us.clone()).unwrap();
    let l2 = (cfg.dx() * out.u.iter().zip(&p.us).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).sqrt();
    assert!(l2 <= 1e-3, "{l2}");
    assert_eq!(out.energy_trace.len(), 11);
}

#[test]
fn spinodal_perturbation_grows_while_energy_falls() {
    let n = 64;
    let xs = cell_centres(n);
    let u: Vec<f64> = xs.iter().map(|x| 2.0 + 1e-3 * (PI * x).cos()).collect();
    let mut cfg = config(n, 0.1, 0.5);
    cfg.sample_interval = 0.05;
    let out = run(&cfg, u.clone()).unwrap();
    let amp = |v: &[f64]| v.iter().map(|a| (a - 2.0).abs()).fold(0.0, f64::max);
    assert!(amp(&out.u) > 2.0 * amp(&u));
    for w in out.energy_trace.windows(2) {
        assert!(w[1].energy <= w[0].energy + 1e-12 * w[0].energy.abs());
    }
    assert!(out.max_rel_increase <= ENERGY_SLACK);
}

#[test]
fn variable_mobility_conserves_mass() {
    let n = 48;
    let mut cfg = config(n, 0.15, 0.02);
    cfg.mobility = Mobility::function(|u| 0.5 + 0.25 * u);
    let u = smooth_state(n, &[0.4, -0.2, 0.1]);
    let out = run(&cfg, u).unwrap();
    assert!(((mass(out.dx, &out.u) - out.mass0) / out.mass0).abs() < 1e-12);
    assert!(out.energy < out.energy_trace[0].energy);
}

#[test]
fn stiffness_is_reported() {
    let n = 32;
    let mut cfg = config(n, 0.1, 1.0);
    cfg.mobility = Mobility::function(|u| if u > 2.0 { 1e30 } else { 1.0 });
    let u = smooth_state(n, &[0.5]);
    assert!(matches!(run(&cfg, u), Err(SimError::Stiffness { .. })));
}

#[test]
fn invalid_setups_are_rejected() {
    let cfg = config(32, 0.1, 1.0);
    assert!(SimState::new(&cfg, vec![2.0; 31]).is_err());
    let mut bad = config(32, 0.1, 1.0);
    bad.safety = 1.5;
    assert!(SimState::new(&bad, vec![2.0; 32]).is_err());
    let mut neg = config(32, 0.1, 1.0);
    neg.mobility = Mobility::Constant(-1.0);
    assert!(matches!(run(&neg, smooth_state(32, &[0.1])), Err(SimError::InvalidConfig(_))));
}

proptest! {
    #[test]
    fn mu_is_the_discrete_energy_gradient(
        amps in prop::collection::vec(-0.8f64..0.8, 1..5),
        pert in prop::collection::vec(-1.0f64..1.0, 4),
        eps in 0.05f64..0.3,
    ) {
        let n = 64;
        let cfg = config(n, eps, 1.0);
        let u = smooth_state(n, &amps);
        let phi: Vec<f64> = cell_centres(n)
            .iter()
            .map(|&x| pert.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * PI * (x + 1.0) / 2.0).cos()).sum())
            .collect();
        let mu = chemical_potential(&cfg, &u);
        let exact: f64 = cfg.dx() * mu.iter().zip(&phi).map(|(m, p)| m * p).sum::<f64>();
        let fd = directional_derivative(&cfg, &u, &phi, 1e-5);
        prop_assert!((exact - fd).abs() <= 1e-5 * exact.abs().max(1e-3), "{} vs {}", exact, fd);
    }

    #[test]
    fn one_step_conserves_mass_and_dissipates(amps in prop::collection::vec(-0.8f64..0.8, 1..5), eps in 0.05f64..0.3) {
        let n = 40;
        let cfg = config(n, eps, 1.0);
        let state = SimState::new(&cfg, smooth_state(n, &amps)).unwrap();
        let next = step(&cfg, &state).unwrap();
        let (m0, m1) = (mass(state.dx, &state.u), mass(next.dx, &next.u));
        prop_assert!((m1 - m0).abs() <= 1e-14 * m0.abs());
        prop_assert!(next.energy <= state.energy + ENERGY_SLACK * state.energy.abs());
        prop_assert!(next.t > 0.0 && next.steps == 1);
    }

    #[test]
    fn constant_states_are_fixed(c in 0.5f64..3.5) {
        let cfg = config(24, 0.1, 1.0);
        let state = SimState::new(&cfg, vec![c; 24]).unwrap();
        let next = step(&cfg, &state).unwrap();
        prop_assert_eq!(&next.u, &state.u);
        prop_assert!((diagnostics(&state).energy - 2.0 * cfg.potential.f(c)).abs() < 1e-13);
        prop_assert!((diagnostics(&state).mass - 2.0 * c).abs() < 1e-13);
    }
}
