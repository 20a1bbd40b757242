use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spme_core::bounds::{comparison_closed_form, comparison_ode_solve, contraction_bound, BoundParams};
use spme_core::model::{estimate_eta_sigma, Phi, Psi};
use spme_core::solver::{simulate, GalerkinState, GalerkinSystem, InitialCondition, Scheme, SimConfig};
use spme_core::{NoiseProfile, NoiseSpec, NonlinearitySpec, OperatorSpec, SpectralField, StreamKey};
use spme_oracles as oracle;

#[test]
fn eta_matches_bruteforce() {
    for coeff in [1.0, 2.0] {
        let spec = NonlinearitySpec::new(3.0, Psi::OddPower { coeff }, Phi::Zero).unwrap();
        let (eta, _) = estimate_eta_sigma(&spec, 10.0, 400).unwrap();
        let scan = oracle::eta_bruteforce(|s| coeff * s * s * s, 3.0, 0.0, 10.0, 401);
        assert!((eta - scan.eta).abs() < 1e-3 * coeff, "{eta} vs {}", scan.eta);
    }
    let spec = NonlinearitySpec::cubic();
    let (eta, _) = estimate_eta_sigma(&spec, 10.0, 400).unwrap();
    assert!(oracle::case("eta_cubic").accepts(eta));
}

#[test]
fn cubic_drift_matches_oracle_cases() {
    let sys = GalerkinSystem::new(Arc::new(OperatorSpec::dirichlet(8, 64).unwrap()), NonlinearitySpec::cubic());
    let b = sys.drift(&GalerkinState::new(SpectralField::unit(8, 1, 1.0))).unwrap();
    assert!(oracle::case("cubic_drift_b1").accepts(b[0]));
    assert!(oracle::case("cubic_drift_b3").accepts(b[2]));
    let b1 = -PI * PI * 4.0 * oracle::sine_product_integral(&[(1, 4)]);
    assert!((b[0] - b1).abs() < 1e-7);
}

#[test]
fn pseudo_spectral_drift_matches_direct_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 12;
    let models = [
        NonlinearitySpec::cubic(),
        NonlinearitySpec::new(3.0, Psi::LinearPlusOddPower { alpha: 0.5, coeff: 2.0 }, Phi::ScaledIdentity { beta: 0.3 }).unwrap(),
        NonlinearitySpec::new(5.0, Psi::OddPower { coeff: 1.0 }, Phi::Zero).unwrap(),
    ];
    for model in models {
        let grid = (2.0 * (model.r() + 1.0) * n as f64) as usize;
        let sys = GalerkinSystem::new(Arc::new(OperatorSpec::dirichlet(n, grid).unwrap()), model);
        for _ in 0..5 {
            let a: Vec<f64> = (0..n).map(|k| rng.random_range(-1.0..1.0) / (k + 1) as f64).collect();
            let b = sys.drift(&GalerkinState::new(SpectralField(a.clone()))).unwrap();
            let d = oracle::drift_direct(&a, |s| model.psi(s), |s| model.phi(s), grid);
            for (x, y) in b.iter().zip(&d) {
                assert!((x - y).abs() < 1e-10 * (1.0 + y.abs()), "{x} vs {y}");
            }
        }
    }
}

#[test]
fn noise_trace_extrapolation() {
    let op = OperatorSpec::dirichlet(64, 512).unwrap();
    let spec = NoiseSpec::new(NoiseProfile::DiagonalPower { c: 1.0, a: 1.0 }, 0).unwrap();
    let trace = spec.trace(&op);
    assert!(oracle::case("trace_inverse_i").accepts(trace.extrapolated));
    assert!((trace.extrapolated - oracle::diagonal_trace(1.0, 1.0, 100_000)).abs() < 1e-12);
}

#[test]
fn comparison_ode_matches_closed_form() {
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
    for (c2, h0) in [(1.0, 1.0), (0.5, 4.0), (3.0, 0.2)] {
        let h = comparison_ode_solve(0.0, c2, 3.0, h0, &grid).unwrap();
        for (t, v) in grid.iter().zip(&h) {
            let exact = oracle::comparison_exact(c2, 3.0, h0, *t);
            assert!(((v - exact) / exact).abs() < 1e-6);
            assert!((comparison_closed_form(c2, 3.0, h0, *t) - exact).abs() < 1e-14);
        }
    }
    let h = comparison_ode_solve(0.0, 1.0, 3.0, 1.0, &[1.0]).unwrap();
    assert!(oracle::case("comparison_h1").accepts(h[0]));
}

#[test]
fn contraction_bound_matches_oracle() {
    let p = BoundParams {
        r: 3.0,
        eta: 0.25,
        theta: 0.0,
        sigma: 0.0,
        delta: 0.0,
        lambda_1: PI * PI,
        c: 1.0,
    };
    assert!(oracle::case("contraction_r3").accepts(contraction_bound(1.0, 0.1, &p).unwrap()));
    for (z0, t) in [(0.3, 0.01), (2.0, 1.0), (10.0, 5.0)] {
        let b = contraction_bound(z0, t, &p).unwrap();
        assert!((b - oracle::contraction_exact(z0, t, 3.0, 0.25, PI * PI)).abs() < 1e-14);
    }
}

#[test]
fn explicit_linear_step_matches_oracle() {
    let linear = NonlinearitySpec::new(3.0, Psi::Linear { alpha: 1.0 }, Phi::Zero).unwrap();
    let sys = GalerkinSystem::new(Arc::new(OperatorSpec::dirichlet(8, 64).unwrap()), linear);
    let next = sys
        .step(&GalerkinState::new(SpectralField::unit(8, 1, 1.0)), 1e-3, &[0.0; 8], Scheme::ExplicitEm)
        .unwrap();
    assert!(oracle::case("explicit_linear_step").accepts(next.coeffs[0]));
}

fn ou_config(noise: NoiseSpec, t_end: f64) -> SimConfig {
    let linear = NonlinearitySpec::new(3.0, Psi::Linear { alpha: 1.0 }, Phi::Zero).unwrap();
    let mut c = SimConfig::new(linear, noise, t_end).unwrap().with_resolution(4, 32).unwrap();
    c.scheme = Scheme::ExplicitEm;
    c.dt = 1e-5;
    c.gate_override = true;
    c.record_every = 1000;
    c
}

#[test]
fn ou_mean_decays_exactly() {
    let mut c = ou_config(NoiseSpec::zero(), 0.1);
    c.initial = InitialCondition::Coeffs(vec![1.0, 1.0, 0.0, 1.0]);
    c.record_modes = 4;
    let rec = simulate(&c, StreamKey::new(0, 0)).unwrap();
    let last = rec.modes.last().unwrap();
    for k in [0usize, 1, 3] {
        let lambda = ((k + 1) as f64 * PI).powi(2);
        let ou = oracle::ou_statistics(lambda, 0.0, 0.1, 2, 0);
        assert!((last[k] - ou.mean_factor).abs() < 1e-3, "mode {}: {} vs {}", k + 1, last[k], ou.mean_factor);
    }
}

#[test]
fn ou_stationary_variance() {
    let q = [1.0, 0.5, 0.25, 0.125];
    let noise = NoiseSpec::new(NoiseProfile::ExplicitDiagonal(q.to_vec()), 9).unwrap();
    let mut c = ou_config(noise, 0.5);
    c.dt = 1e-4;
    c.initial = InitialCondition::Zero;
    c.record_every = 5000;
    c.record_modes = 4;
    let n_traj = 1000;
    let finals: Vec<Vec<f64>> = (0..n_traj)
        .map(|j| simulate(&c, StreamKey::new(9, j)).unwrap().modes.last().unwrap().clone())
        .collect();
    for k in 0..4 {
        let lambda = ((k + 1) as f64 * PI).powi(2);
        let exact = oracle::ou_statistics(lambda, q[k], 0.5, 2, 0).variance;
        let xs: Vec<f64> = finals.iter().map(|f| f[k]).collect();
        let m = xs.iter().sum::<f64>() / n_traj as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n_traj - 1) as f64;
        let se = exact * (2.0 / (n_traj - 1) as f64).sqrt();
        assert!((v - exact).abs() < 4.0 * se, "mode {}: {v} vs {exact}", k + 1);
    }
}

#[test]
fn refinement_changes_deterministic_run_by_under_one_percent() {
    let mut c = SimConfig::new(NonlinearitySpec::cubic(), NoiseSpec::zero(), 1.0).unwrap();
    c.record_every = 1000;
    let coarse = simulate(&c, StreamKey::new(0, 0)).unwrap();
    let fine = simulate(&c.clone().with_resolution(128, 1024).unwrap(), StreamKey::new(0, 0)).unwrap();
    assert_eq!(coarse.times, fine.times);
    for (a, b) in coarse.h_norms.iter().zip(&fine.h_norms) {
        assert!(((a - b) / b).abs() < 0.01, "{a} vs {b}");
    }
}

#[test]
fn deterministic_dissipation_at_every_record() {
    let mut c = SimConfig::new(NonlinearitySpec::cubic(), NoiseSpec::zero(), 0.5).unwrap();
    c.record_every = 1;
    c.initial = InitialCondition::RandomBand { seed: 4, modes: 16, h_norm: 1.0 };
    let rec = simulate(&c, StreamKey::new(0, 0)).unwrap();
    for w in rec.h_norms.windows(2) {
        assert!(w[1] <= w[0] + 1e-9);
    }
}
