//! The acceptance criteria as callable checks, shared by the `validate`
//! subcommand and the integration tests. Every part records the measured
//! quantity next to its threshold so a failure says by how much it missed.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use layerheat::mixed::{find_det_zeros, sift, three_layer_zeros, MixedMedium};
use layerheat::multilayer::{interface_volterra, snapshot, MovingLayerGrid, StripProblem};
use layerheat::obm::{density_profile, free_density, laplace_route, solve_interface, total_mass, MovingInterface, ObmProblem};
use layerheat::oit::{heat_kernel_eta, heat_kernel_p, kernels_by_quadrature, oit_inverse, SampledImage, Support, TwoLayerMedium};
use layerheat::spectrum::{eigenbasis, find_eigenvalues, inner_product_quadrature, lambda_approx, FirstOrder, LayerGrid};
use layerheat::stefan::{front_fluxes, run, run_on, temperature, StefanConfig, StefanOptions};
use layerheat::volterra::{solve_second_kind, FnSystem, Rule, TimeGrid};

use crate::error::{HarnessError, HarnessResult};
use crate::fd::{fd_solve, FdConfig, Rod};

/// One measured property and whether it met its threshold.
#[derive(Debug, Clone)]
pub struct Part {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

impl Part {
    fn new(label: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Part { label: label.into(), passed, detail: detail.into() }
    }

    /// `value ≤ limit`, reported as `name = value (limit)`.
    fn at_most(label: impl Into<String>, name: &str, value: f64, limit: f64) -> Self {
        Part::new(label, value <= limit, format!("{name} = {value:.3e} (limit {limit:.0e})"))
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: &'static str,
    pub title: &'static str,
    pub parts: Vec<Part>,
    pub seconds: f64,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        !self.parts.is_empty() && self.parts.iter().all(|p| p.passed)
    }

    /// One summary line followed by one indented line per part.
    pub fn report(&self) -> String {
        let mut s = format!("criterion {:>2} {} {} ({:.2} s)", self.id, verdict(self.passed()), self.title, self.seconds);
        for p in &self.parts {
            s.push_str(&format!("\n    {} {}: {}", verdict(p.passed), p.label, p.detail));
        }
        s
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

pub struct Check {
    pub id: &'static str,
    pub title: &'static str,
    pub run: fn() -> HarnessResult<Vec<Part>>,
}

pub const CHECKS: &[Check] = &[
    Check { id: "1", title: "two-layer eigenvalue approximations", run: eigenvalue_approximations },
    Check { id: "2", title: "freezing slab reference run", run: freezing_slab },
    Check { id: "3", title: "closed-form kernels against frequency quadrature", run: kernels_against_quadrature },
    Check { id: "4", title: "constant-interface density against finite differences", run: density_against_fd },
    Check { id: "5", title: "constant-interface kernel identities", run: constant_interface_identities },
    Check { id: "6", title: "three-layer determinant zeros", run: three_layer_determinant_zeros },
    Check { id: "7", title: "discrete eigenbasis orthogonality", run: eigenbasis_orthogonality },
    Check { id: "8", title: "flat-medium reductions", run: flat_reductions },
    Check { id: "9", title: "Volterra solver convergence", run: volterra_convergence },
    Check { id: "10", title: "linear interface: time stepping against Laplace route", run: linear_interface_routes },
    Check { id: "11", title: "branch-cut sifting", run: branch_cut_sifting },
];

pub fn ids() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.id).collect()
}

/// Runs one check; a solver error becomes a failing part.
pub fn run_check(check: &Check) -> Outcome {
    let start = Instant::now();
    let parts = match (check.run)() {
        Ok(parts) => parts,
        Err(e) => vec![Part::new("solver", false, e.to_string())],
    };
    Outcome { id: check.id, title: check.title, parts, seconds: start.elapsed().as_secs_f64() }
}

pub fn by_id(id: &str) -> Option<&'static Check> {
    CHECKS.iter().find(|c| c.id == id)
}

fn numeric(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Numeric(e.to_string())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn eigenvalue_approximations() -> HarnessResult<Vec<Part>> {
    let start = Instant::now();
    let (s1, s2, l1, l2) = (7.0, 0.7, 1.2, 1.0);
    let grid = LayerGrid::new(vec![0.0, l1, l1 + l2], vec![s1, s2])?;
    let roots = find_eigenvalues(&grid, 30)?;
    let mut err0 = Vec::with_capacity(30);
    let mut err1 = Vec::with_capacity(30);
    for (i, r) in roots.iter().enumerate() {
        let rel = |v: f64| (v - r.lambda).abs() / r.lambda;
        err0.push(rel(lambda_approx(s1, s2, l1, l2, i + 1, 0, FirstOrder::Displayed)?));
        err1.push(rel(lambda_approx(s1, s2, l1, l2, i + 1, 1, FirstOrder::Displayed)?));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let lo = err0[..5].iter().copied().fold(f64::INFINITY, f64::min);
    let hi = err0[..5].iter().copied().fold(0.0, f64::max);
    let worst = err1.iter().copied().fold(0.0, f64::max);
    // Where the zero-order formula is exact both errors are rounding noise,
    // so the comparison allows a few ulps.
    let worse: Vec<usize> = (0..30).filter(|&i| err1[i] > err0[i] + 4.0 * f64::EPSILON).map(|i| i + 1).collect();
    Ok(vec![
        Part::new("zero-order error, indices 1-5, in [3%, 15%]", lo >= 0.03 && hi <= 0.15, format!("range [{:.2}%, {:.2}%]", 100.0 * lo, 100.0 * hi)),
        Part::new("first-order worst error over 1-30 ≤ 2%", worst <= 0.02, format!("{:.3}%", 100.0 * worst)),
        Part::new("first order no worse than zero order", worse.is_empty(), format!("indices where it is worse: {worse:?}")),
        Part::at_most("runtime < 1 s", "seconds", elapsed, 1.0),
    ])
}

fn freezing_slab() -> HarnessResult<Vec<Part>> {
    let cfg = StefanConfig::reference();
    let opts = StefanOptions::default();
    let coarse = run(&cfg, &opts)?;
    let steps = &coarse.steps;

    let increasing = steps.windows(2).all(|w| w[1].y > w[0].y);
    let starts = steps[0].y == cfg.y_minus && steps[0].tau == 0.0;

    let mut residual_first = 0.0;
    let mut residual_rest: f64 = 0.0;
    let mut jump: f64 = 0.0;
    for (i, st) in steps.iter().enumerate().skip(1) {
        let r = (temperature(&coarse, st.tau, st.y)? - cfg.t_m).abs().max(st.residual);
        if i == 1 {
            residual_first = r;
        } else {
            residual_rest = residual_rest.max(r);
        }
        let (left, right) = front_fluxes(&coarse, st.tau)?;
        let target = cfg.rho_latent * st.y_prime;
        jump = jump.max(((left - right) - target).abs() / target.abs());
    }
    let slowest = steps.iter().skip(1).map(|s| s.wall_seconds).fold(0.0, f64::max);

    let fine = run_on(&cfg, 2 * opts.terms, &opts.grid()?)?;
    let (mut gap, mut gap_tau) = (0.0, 0.0);
    for (a, b) in steps.iter().zip(&fine.steps) {
        let d = (a.y - b.y).abs() / b.y.abs();
        if d > gap {
            gap = d;
            gap_tau = a.tau;
        }
    }
    let last = coarse.last();
    Ok(vec![
        Part::new(
            "(a) front strictly increasing from the ice wall",
            increasing && starts,
            format!("y(0) = {} mm, y({:.0} s) = {:.4} mm over {} steps", steps[0].y, last.tau, last.y, steps.len() - 1),
        ),
        Part::new(
            "(b) interface residual < 1e-3 K (first step 1e-2 K)",
            residual_first < 1e-2 && residual_rest < 1e-3,
            format!("first step {residual_first:.2e} K, later steps max {residual_rest:.2e} K"),
        ),
        Part::new(
            "(c) 50 and 100 term fronts agree to 1e-4 relative",
            gap <= 1e-4,
            format!("max relative difference {gap:.3e} at tau = {gap_tau:.2} s"),
        ),
        Part::at_most("(d) gradient jump matches latent release to 1%", "max relative mismatch", jump, 1e-2),
        Part::at_most("(e) wall time per step ≤ 1 s", "slowest step seconds", slowest, 1.0),
    ])
}

fn kernels_against_quadrature() -> HarnessResult<Vec<Part>> {
    let medium = TwoLayerMedium::new(0.3, 1.0, 2.0)?;
    let zs = [-1.2, -0.4, 0.1, 0.7, 1.5];
    let zetas = [-0.9, -0.2, 0.25, 0.6, 1.3];
    let lags = [0.05, 0.4, 2.0];
    let s = 0.2;
    let mut worst: f64 = 0.0;
    let mut imag: f64 = 0.0;
    for &z in &zs {
        for &zeta in &zetas {
            for &lag in &lags {
                let tau = s + lag;
                let (p, e, im) = kernels_by_quadrature(z, tau, zeta, s, &medium)?;
                worst = worst.max(p.max_diff(&heat_kernel_p(z, tau, zeta, s, &medium)?));
                worst = worst.max(e.max_diff(&heat_kernel_eta(z, tau, zeta, s, &medium)?));
                imag = imag.max(im);
            }
        }
    }
    Ok(vec![
        Part::at_most("closed form vs quadrature on 5×5×3 points", "max entry difference", worst, 1e-8),
        Part::at_most("quadrature imaginary residue", "max |Im|", imag, 1e-8),
    ])
}

fn density_against_fd() -> HarnessResult<Vec<Part>> {
    let (sm, sp, x0) = (1.0, 2.0, 0.5);
    let problem = ObmProblem::new(sm, sp, MovingInterface::constant(0.0, 1.0)?, x0)?;
    let trace = solve_interface(&problem, &TimeGrid::uniform(1.0, 40)?)?;
    let times = [0.1, 0.5, 1.0];

    // The oracle starts from the free Gaussian at a time when the source has
    // not yet felt the interface (weight below 1e-6 there).
    let t0 = 1e-3;
    let rod = Rod { bounds: vec![-20.0, 0.0, 20.0], sigma: vec![sm, sp], left: 0.0, right: 0.0 };
    let fd = FdConfig { cells: 4000, dt: 1e-4, ..Default::default() };
    let sol = fd_solve(&fd, &rod, |x| free_density(sp, x0, t0, x), t0, &times).map_err(numeric)?;

    let xs: Vec<f64> = (0..=200).map(|k| -4.0 + 10.0 * k as f64 / 200.0).collect();
    let mut parts = Vec::new();
    for (k, &tau) in times.iter().enumerate() {
        let g = density_profile(&problem, &trace, tau, &xs)?;
        let oracle: Vec<f64> = xs.iter().map(|&x| sol.value(k, x)).collect();
        parts.push(Part::at_most(format!("density at tau = {tau}"), "max abs difference", max_abs_diff(&g, &oracle), 1e-3));
    }
    for &tau in &times {
        let mass = total_mass(&problem, &trace, tau, 1e-10)?;
        parts.push(Part::at_most(format!("mass at tau = {tau}"), "|mass - 1|", (mass - 1.0).abs(), 1e-4));
    }
    Ok(parts)
}

fn constant_interface_identities() -> HarnessResult<Vec<Part>> {
    let mut flux: f64 = 0.0;
    let mut eta: f64 = 0.0;
    for (sm, sp) in [(1.0, 2.0), (0.3, 5.0), (4.0, 0.7), (1.0, 1.0)] {
        let m = TwoLayerMedium::new(0.0, sm, sp)?;
        for (tau, s) in [(1e-3, 0.0), (0.1, 0.0), (1.0, 0.0), (10.0, 0.0), (0.7, 0.3), (5.0, 2.5)] {
            let p = heat_kernel_p(0.0, tau, 0.0, s, &m)?;
            // the 1e-14 bound is relative once the kernel exceeds one
            flux = flux.max((p.a11 - p.a21).abs() / p.a11.abs().max(1.0));
            flux = flux.max((p.a12 - p.a22).abs() / p.a12.abs().max(1.0));
            let e = heat_kernel_eta(0.0, tau, 0.0, s, &m)?;
            eta = eta.max(e.max_diff(&layerheat::smallmat::Mat2::ZERO));
        }
    }
    Ok(vec![
        Part::at_most("<[1, -1], P(0, tau | 0, s)> = 0", "max deviation", flux, 1e-14),
        Part::at_most("eta(0, tau | 0, s) = 0", "max entry", eta, 1e-14),
    ])
}

fn three_layer_determinant_zeros() -> HarnessResult<Vec<Part>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut parts = Vec::new();
    for _ in 0..4 {
        let (sm, s1, sp) = (rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0));
        let l1: f64 = rng.gen_range(0.3..2.0);
        let m = MixedMedium::three_layer(sm, s1, sp, 0.0, l1)?;
        let closed = three_layer_zeros(&m, 10)?;
        let re = closed.iter().map(|z| z.k.re).fold(0.0, f64::min);
        let im_max = 10.5 * PI * s1 / l1;
        let found = find_det_zeros(&m, 2.0 * re, -1e-3, im_max)?;
        let mut worst: f64 = 0.0;
        for z in &closed {
            let scale = z.lambda.norm().max(1.0);
            let d = found.iter().map(|f| (f * f - z.lambda).norm() / scale).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
        let label = format!("sigma = ({sm:.3}, {s1:.3}, {sp:.3}), l1 = {l1:.3}");
        parts.push(Part::new(
            label,
            worst <= 1e-8 && found.len() == closed.len() && !closed.is_empty(),
            format!("{} closed-form, {} numeric, max relative lambda gap {worst:.2e} (limit 1e-8)", closed.len(), found.len()),
        ));
    }
    Ok(parts)
}

fn random_grid(rng: &mut ChaCha8Rng, layers: usize) -> HarnessResult<LayerGrid> {
    let mut y = vec![rng.gen_range(-1.0..0.0)];
    for _ in 0..layers {
        let last = *y.last().expect("nonempty");
        y.push(last + rng.gen_range(0.3..1.5));
    }
    let sigma = (0..layers).map(|_| rng.gen_range(0.3..3.0)).collect();
    Ok(LayerGrid::new(y, sigma)?)
}

fn eigenbasis_orthogonality() -> HarnessResult<Vec<Part>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut grids = 0;
    for g in 0..20 {
        let grid = random_grid(&mut rng, 2 + g % 2)?;
        let basis = eigenbasis(&grid, 12)?;
        for m in 0..basis.len() {
            for n in m + 1..basis.len() {
                let ip = inner_product_quadrature(&basis[m], &basis[n], &grid);
                worst = worst.max(ip.abs() / (basis[m].norm * basis[n].norm).sqrt());
            }
        }
        grids += 1;
    }
    Ok(vec![Part::at_most(format!("{grids} random two- and three-layer grids, 12 modes"), "max normalized inner product", worst, 1e-8)])
}

/// Classical solution on `[0, 1]` for `u(0, x) = x(1 - x)`.
fn parabola_series(sigma: f64, tau: f64, x: f64) -> f64 {
    (1..4000)
        .step_by(2)
        .map(|n| {
            let k = n as f64 * PI;
            8.0 / k.powi(3) * (-k * k * sigma * sigma * tau).exp() * (k * x).sin()
        })
        .sum()
}

fn flat_reductions() -> HarnessResult<Vec<Part>> {
    let mut strip: f64 = 0.0;
    for (y, sigma) in [(vec![0.0, 1.0], vec![0.8]), (vec![0.0, 0.35, 1.0], vec![0.8, 0.8]), (vec![0.0, 0.2, 0.55, 1.0], vec![0.8; 3])] {
        let grid = LayerGrid::new(y, sigma)?;
        let problem = StripProblem::new(MovingLayerGrid::fixed(&grid, 1.0)?, |x| x * (1.0 - x));
        let traces = interface_volterra(&problem, 60, &TimeGrid::uniform(0.05, 5)?)?;
        let snap = snapshot(&problem, &traces, 60, 0.05)?;
        for k in 0..=40 {
            let x = k as f64 / 40.0;
            strip = strip.max((snap.eval(x).value - parabola_series(0.8, 0.05, x)).abs());
        }
    }

    let medium = TwoLayerMedium::new(0.2, 1.1, 1.1)?;
    let (a, b) = (-1.0, 1.8);
    let f = move |x: f64| if x <= a || x >= b { 0.0 } else { ((x - a) * (b - x)).powi(6) };
    let image = SampledImage::forward(f, Support { lo: a, hi: b }, &medium, 400.0, 400, 1e-13)?;
    let points = 56;
    let h = (b - a) / points as f64;
    let mut err2 = 0.0;
    for k in 0..=points {
        let x = a + h * k as f64;
        err2 += (oit_inverse(&image, &medium, x, 1e-6)?.value - f(x)).powi(2);
    }
    Ok(vec![
        Part::at_most("static flat strips vs sine series (1, 2, 3 layers)", "max abs difference", strip, 1e-8),
        Part::at_most("flat two-layer transform round trip", "L2 error", (err2 * h).sqrt(), 1e-6),
    ])
}

fn volterra_convergence() -> HarnessResult<Vec<Part>> {
    // K = τs with u = cos τ
    let manufactured = FnSystem {
        dim: 1,
        forcing: |t: f64, o: &mut [f64]| o[0] = t.cos() - t * (t * t.sin() + t.cos() - 1.0),
        kernel: |t: f64, s: f64, o: &mut [f64]| o[0] = t * s,
    };
    let mut errs = Vec::new();
    for m in [20, 40, 80] {
        let sol = solve_second_kind(&manufactured, &TimeGrid::uniform(1.0, m)?, Rule::Simpson)?;
        errs.push(sol.times.iter().zip(&sol.values).map(|(t, v)| (v[0] - t.cos()).abs()).fold(0.0, f64::max));
    }
    let orders = [(errs[0] / errs[1]).log2(), (errs[1] / errs[2]).log2()];

    let exponential = FnSystem { dim: 1, forcing: |_: f64, o: &mut [f64]| o[0] = 1.0, kernel: |_: f64, _: f64, o: &mut [f64]| o[0] = 1.0 };
    let sol = solve_second_kind(&exponential, &TimeGrid::uniform(1.0, 200)?, Rule::Simpson)?;
    let exp_err = sol.times.iter().zip(&sol.values).map(|(t, v)| (v[0] - t.exp()).abs()).fold(0.0, f64::max);
    Ok(vec![
        Part::new(
            "Simpson observed order ≥ 3.5 (M = 20, 40, 80)",
            orders.iter().all(|&o| o >= 3.5),
            format!("errors {:.2e}, {:.2e}, {:.2e}; orders {:.2}, {:.2}", errs[0], errs[1], errs[2], orders[0], orders[1]),
        ),
        Part::at_most("exponential solution at M = 200", "max error", exp_err, 1e-6),
    ])
}

fn linear_interface_routes() -> HarnessResult<Vec<Part>> {
    let grid = TimeGrid::geometric(1e-4, 5e-3, 1.05, 1.0)?;
    let lap = laplace_route(1.0, 2.0, 0.0, 0.1, 0.5, &grid)?;
    let problem = ObmProblem::new(1.0, 2.0, MovingInterface::linear(0.0, 0.1, 1.0)?, 0.5)?;
    let ts = solve_interface(&problem, &grid)?;
    Ok(vec![
        Part::at_most("interface density trace", "max difference", max_abs_diff(&lap.phi, &ts.phi), 1e-4),
        Part::at_most("interface flux trace", "max difference", max_abs_diff(&lap.flux, &ts.flux), 1e-4),
    ])
}

fn bump(centre: f64, half_width: f64) -> impl Fn(f64) -> f64 + Sync {
    move |x: f64| {
        let u = (x - centre) / half_width;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        }
    }
}

fn branch_cut_sifting() -> HarnessResult<Vec<Part>> {
    let medium = MixedMedium::three_layer(0.8, 1.5, 0.6, -0.3, 0.4)?;
    let mut parts = Vec::new();
    for (centre, half_width) in [(0.1, 0.9), (0.0, 0.7)] {
        // cutoff 120 for the wider bump, scaled with the inverse width
        let omega_max = 108.0 / half_width;
        let g = bump(centre, half_width);
        let mut worst: f64 = 0.0;
        for x0 in [-0.6, -0.45, -0.2, 0.05, 0.3, 0.55, 0.8] {
            let v = sift(&medium, &g, (-0.8, 1.0), x0, omega_max)?;
            worst = worst.max((v - g(x0)).abs());
        }
        parts.push(Part::at_most(format!("bump centred at {centre}, half-width {half_width}, cutoff {omega_max:.0}"), "max error", worst, 1e-3));
    }
    Ok(parts)
}
