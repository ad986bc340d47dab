//! The harmonic oscillator as a negative example for the torus machinery.

mod common;

use std::f64::consts::PI;

use larckit::models::make_harmonic_oscillator;
use larckit::report::random_unit_vectors;
use larckit::torus::{recurrence_time, torus_approx, NeighborhoodSpec, SearchOptions, TorusElement};
use larckit::Error;

use common::torus_residual;

#[test]
fn flow_recurs_with_period_4pi() {
    let s = make_harmonic_oscillator(4).unwrap();
    let vectors = random_unit_vectors(s.dim(), 3, 0);
    let nbhd = NeighborhoodSpec::new(s.reconstruct().herm_exp(0.0).unwrap(), vectors, 1e-9).unwrap();
    let r = recurrence_time(&s, 0.0, &nbhd, &SearchOptions::default()).unwrap();
    let periods = r.t_plus / (4.0 * PI);
    assert!(r.t_plus > 0.0);
    assert!((periods - periods.round()).abs() < 1e-9, "t_plus = {}", r.t_plus);
    assert!(r.achieved < 1e-9);
}

#[test]
fn off_orbit_target_has_positive_floor() {
    let s = make_harmonic_oscillator(2).unwrap();
    // phases (2k+1) s mod 1 cannot be (0, 1/2, 0)
    let lambda = [0.0, 0.5, 0.0];
    let xhat: Vec<f64> = s.eigenvalues().iter().map(|x| x / (2.0 * PI)).collect();
    let steps = 200_000;
    let floor = (0..steps)
        .map(|k| torus_residual(&xhat, &lambda, 4.0 * PI * k as f64 / steps as f64))
        .fold(f64::INFINITY, f64::min);
    assert!(floor > 0.1, "grid floor {floor}");

    let opts = SearchOptions {
        initial_horizon: Some(100.0),
        max_windows: 20_000,
        enforce_independence: false,
    };
    let target = TorusElement::new(lambda.to_vec());
    match torus_approx(&s, &target, 1e-2, 3, &opts) {
        Err(Error::HorizonExhausted { best }) => {
            assert!(best.max_residual >= floor - 1e-4, "best {} below floor {floor}", best.max_residual);
            assert!(best.max_residual > best.delta);
        }
        other => panic!("expected exhaustion, got {other:?}"),
    }
    let strict = torus_approx(&s, &target, 1e-2, 3, &SearchOptions::default());
    assert!(matches!(strict, Err(Error::IndependenceViolated { .. })));
}
