//! Cross-module checks through the public API only. Each one uses a
//! degenerate medium where the layered answer must collapse to the
//! homogeneous one.

use layerheat::obm::{density_profile, solve_interface, total_mass, MovingInterface, ObmProblem};
use layerheat::oit::{oit_inverse, SampledImage, Support, TwoLayerMedium};
use layerheat::spectrum::{find_eigenvalues, LayerGrid};
use layerheat::stefan::{run, StefanConfig, StefanOptions};
use layerheat::volterra::{solve_second_kind, FnSystem, Rule, TimeGrid};

#[test]
fn splitting_a_homogeneous_strip_leaves_the_spectrum_unchanged() {
    let whole = find_eigenvalues(&LayerGrid::new(vec![0.0, 2.0], vec![0.9]).unwrap(), 12).unwrap();
    let split = find_eigenvalues(&LayerGrid::new(vec![0.0, 0.7, 1.3, 2.0], vec![0.9; 3]).unwrap(), 12).unwrap();
    for (a, b) in whole.iter().zip(&split) {
        assert!((a.lambda - b.lambda).abs() <= 1e-10 * a.lambda, "{} vs {}", a.lambda, b.lambda);
    }
}

#[test]
fn transform_round_trip_on_a_matched_medium() {
    let medium = TwoLayerMedium::new(0.3, 1.1, 1.1).unwrap();
    let bump = |x: f64| {
        let u = x / 0.8;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        }
    };
    let image = SampledImage::forward(bump, Support { lo: -0.8, hi: 0.8 }, &medium, 300.0, 300, 1e-12).unwrap();
    for x in [-0.5, 0.0, 0.3, 0.6] {
        let v = oit_inverse(&image, &medium, x, 1e-6).unwrap();
        assert!((v.value - bump(x)).abs() < 1e-3, "x = {x}: {} vs {}", v.value, bump(x));
    }
}

#[test]
fn interface_motion_is_invisible_without_contrast() {
    let grid = TimeGrid::uniform(0.5, 50).unwrap();
    let xs: Vec<f64> = (0..=8).map(|k| -1.0 + 0.25 * k as f64).collect();
    let mut profiles = Vec::new();
    for iface in [MovingInterface::constant(0.0, 0.5).unwrap(), MovingInterface::linear(-0.2, 0.6, 0.5).unwrap()] {
        let problem = ObmProblem::new(1.3, 1.3, iface, 0.4).unwrap();
        let trace = solve_interface(&problem, &grid).unwrap();
        assert!((total_mass(&problem, &trace, 0.5, 1e-10).unwrap() - 1.0).abs() < 1e-6);
        profiles.push(density_profile(&problem, &trace, 0.5, &xs).unwrap());
    }
    for (a, b) in profiles[0].iter().zip(&profiles[1]) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn volterra_solution_of_the_exponential_problem() {
    let sys = FnSystem { dim: 1, forcing: |_: f64, o: &mut [f64]| o[0] = 1.0, kernel: |_: f64, _: f64, o: &mut [f64]| o[0] = 1.0 };
    let sol = solve_second_kind(&sys, &TimeGrid::uniform(1.0, 100).unwrap(), Rule::Simpson).unwrap();
    let err = sol.times.iter().zip(&sol.values).map(|(t, v)| (v[0] - t.exp()).abs()).fold(0.0, f64::max);
    assert!(err < 1e-8, "{err}");
}

#[test]
fn freezing_front_advances_monotonically() {
    let cfg = StefanConfig::reference();
    let state = run(&cfg, &StefanOptions { terms: 30, horizon: 50.0, ..Default::default() }).unwrap();
    assert!(state.steps.windows(2).all(|w| w[1].y > w[0].y));
    assert!(state.steps.iter().all(|s| s.residual.abs() < 1e-6));
}
