//! Transition density of diffusion across one moving interface `y(τ)`
//! separating coefficients `σ_-` (left) and `σ_+` (right).
//!
//! The density is the two-media heat kernel from the source plus two
//! interface layers whose strengths are the interface value `φ` and the
//! combination `ψ = Φ + y′φ`. Those solve a 2×2 Volterra system; for a
//! linear interface the system is of convolution type and can also be solved
//! through Laplace images.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{require, Error, Result};
use crate::oit::{heat_kernel_eta, heat_kernel_eta_dz, heat_kernel_p, heat_kernel_p_dz, TwoLayerMedium};
use crate::quad::adaptive;
use crate::smallmat::Mat2;
use crate::volterra::laplace::laplace_convolution_solve;
use crate::volterra::{solve_second_kind, Rule, TimeGrid, VolterraSystem};

const SQRT_PI: f64 = 1.772_453_850_905_516;

type Curve = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Interface trajectory `y(τ)` with its derivative, valid on `[0, T]`.
#[derive(Clone)]
pub struct MovingInterface {
    y: Curve,
    y_prime: Curve,
    horizon: f64,
}

impl fmt::Debug for MovingInterface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MovingInterface").field("y(0)", &(self.y)(0.0)).field("horizon", &self.horizon).finish()
    }
}

impl MovingInterface {
    /// Builds the interface after spot-checking `y_prime` against central
    /// differences of `y` at 17 points.
    pub fn new(
        y: impl Fn(f64) -> f64 + Send + Sync + 'static,
        y_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        horizon: f64,
    ) -> Result<Self> {
        require(horizon > 0.0 && horizon.is_finite(), || format!("horizon must be positive, got {horizon}"))?;
        let h = 1e-5 * horizon;
        for k in 0..=16 {
            let tau = (h + (horizon - 2.0 * h) * k as f64 / 16.0).clamp(h, horizon - h);
            let (ym, yc, yp) = (y(tau - h), y(tau), y(tau + h));
            require(ym.is_finite() && yc.is_finite() && yp.is_finite(), || format!("y is not finite near τ = {tau}"))?;
            let fd = (yp - ym) / (2.0 * h);
            let d = y_prime(tau);
            require((fd - d).abs() <= 1e-4 * fd.abs().max(d.abs()) + 1e-9, || {
                format!("y′({tau}) = {d} disagrees with the difference quotient {fd}")
            })?;
        }
        Ok(MovingInterface { y: Arc::new(y), y_prime: Arc::new(y_prime), horizon })
    }

    pub fn constant(y: f64, horizon: f64) -> Result<Self> {
        Self::new(move |_| y, |_| 0.0, horizon)
    }

    /// `y(τ) = a + bτ`.
    pub fn linear(a: f64, b: f64, horizon: f64) -> Result<Self> {
        Self::new(move |t| a + b * t, move |_| b, horizon)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn y(&self, tau: f64) -> f64 {
        (self.y)(tau)
    }

    pub fn y_prime(&self, tau: f64) -> f64 {
        (self.y_prime)(tau)
    }

    fn check(&self, tau: f64) -> Result<()> {
        if !(0.0..=self.horizon * (1.0 + 1e-12)).contains(&tau) {
            return Err(Error::Horizon { tau, horizon: self.horizon });
        }
        Ok(())
    }
}

/// A point source at `x0` in the two-media problem with a moving interface.
#[derive(Debug, Clone)]
pub struct ObmProblem {
    pub sigma_minus: f64,
    pub sigma_plus: f64,
    pub interface: MovingInterface,
    pub x0: f64,
}

impl ObmProblem {
    pub fn new(sigma_minus: f64, sigma_plus: f64, interface: MovingInterface, x0: f64) -> Result<Self> {
        TwoLayerMedium::new(0.0, sigma_minus, sigma_plus)?;
        let y0 = interface.y(0.0);
        require(x0.is_finite() && x0 != y0, || format!("source {x0} must lie off the initial interface {y0}"))?;
        Ok(ObmProblem { sigma_minus, sigma_plus, interface, x0 })
    }

    /// The two-media kernels only depend on the coefficients, so the medium
    /// is anchored at 0 and offsets are measured from `y(τ)`.
    fn medium(&self) -> TwoLayerMedium {
        TwoLayerMedium { y: 0.0, sigma_minus: self.sigma_minus, sigma_plus: self.sigma_plus }
    }

    fn source_row(&self) -> usize {
        if self.x0 < self.interface.y(0.0) {
            0
        } else {
            1
        }
    }

    fn sigma_weights(&self) -> [f64; 2] {
        [self.sigma_minus, -self.sigma_plus]
    }
}

/// Interface samples: value `φ`, common flux `Φ = σ²u_x`, and `ψ = Φ + y′φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub times: Vec<f64>,
    pub phi: Vec<f64>,
    pub flux: Vec<f64>,
    pub psi: Vec<f64>,
}

impl BoundaryTrace {
    fn from_parts(times: Vec<f64>, phi: Vec<f64>, psi: Vec<f64>, interface: &MovingInterface) -> Result<Self> {
        let flux: Vec<f64> = times.iter().zip(phi.iter().zip(&psi)).map(|(&t, (&f, &p))| p - interface.y_prime(t) * f).collect();
        if let Some(k) = (0..times.len()).find(|&k| !(phi[k].is_finite() && psi[k].is_finite())) {
            return Err(Error::Overflow(format!("interface trace is not finite at τ = {}", times[k])));
        }
        Ok(BoundaryTrace { times, phi, flux, psi })
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("nonempty trace")
    }

    /// Linear interpolation of `(φ, ψ)`.
    pub fn at(&self, tau: f64) -> Result<(f64, f64)> {
        let t = &self.times;
        if !(0.0..=self.horizon()).contains(&tau) {
            return Err(Error::Horizon { tau, horizon: self.horizon() });
        }
        let j = t.partition_point(|&x| x <= tau).clamp(1, t.len() - 1);
        let w = (tau - t[j - 1]) / (t[j] - t[j - 1]);
        Ok(((1.0 - w) * self.phi[j - 1] + w * self.phi[j], (1.0 - w) * self.psi[j - 1] + w * self.psi[j]))
    }
}

/// Interface kernels at the left limit, each multiplied by `√t`:
/// `[K_ψ, K_φ, C_ψ, C_φ]`, with `ζ = y(s) - y(τ)` and `t = τ - s`. At
/// `t = 0` the analytic limits for slope `v = y′(τ)` are returned.
pub fn interface_kernels(sigma_minus: f64, sigma_plus: f64, zeta: f64, t: f64, v: f64) -> [f64; 4] {
    let (sm, sp) = (sigma_minus, sigma_plus);
    let contrast = (sm - sp) / (sm + sp);
    let kappa = 2.0 / (sm + sp);
    let delta = 1.0 / (sm * sm) - 1.0 / (sp * sp);
    let lead = (1.0 - contrast) / (4.0 * SQRT_PI * sm);
    if t <= 0.0 {
        return [0.0, 0.0, -lead * v * delta, 0.75 * lead * v * v * delta];
    }
    let am = zeta * zeta / (4.0 * sm * sm * t);
    let ap = zeta * zeta / (4.0 * sp * sp * t);
    let (em, ep) = ((-am).exp(), (-ap).exp());
    // e^{-α_-} - e^{-α_+} without cancellation
    let diff = ep * (ap - am).exp_m1();
    let k_psi = kappa / (2.0 * SQRT_PI) * diff;
    let k_phi = kappa * zeta * diff / (4.0 * SQRT_PI * t);
    let c_psi = lead * zeta / t * (em / (sm * sm) - ep / (sp * sp));
    let c_phi = lead / t * ((2.0 * am - 1.0) * diff + 2.0 * (am - ap) * ep);
    [k_psi, k_phi, c_psi, c_phi]
}

struct InterfaceSystem<'a> {
    problem: &'a ObmProblem,
    medium: TwoLayerMedium,
}

impl InterfaceSystem<'_> {
    /// Source contributions `(A, B)`: value and x-derivative at `y(τ)-0`.
    fn source(&self, tau: f64) -> (f64, f64) {
        if tau <= 0.0 {
            return (0.0, 0.0);
        }
        let pr = self.problem;
        let zeta = pr.x0 - pr.interface.y(tau);
        let r = pr.source_row();
        let p = heat_kernel_p(0.0, tau, zeta, 0.0, &self.medium).expect("τ > 0");
        let pd = heat_kernel_p_dz(0.0, tau, zeta, 0.0, &self.medium).expect("τ > 0");
        (row(&p, r)[0], row(&pd, r)[0])
    }
}

fn row(m: &Mat2, r: usize) -> [f64; 2] {
    if r == 0 {
        [m.a11, m.a12]
    } else {
        [m.a21, m.a22]
    }
}

impl VolterraSystem for InterfaceSystem<'_> {
    fn dim(&self) -> usize {
        2
    }

    fn forcing(&self, tau: f64, out: &mut [f64]) {
        let (a, b) = self.source(tau);
        let s2 = self.problem.sigma_minus.powi(2);
        out[0] = a;
        out[1] = s2 * b + self.problem.interface.y_prime(tau) * a;
    }

    fn kernel(&self, tau: f64, s: f64, out: &mut [f64]) {
        let pr = self.problem;
        let v = pr.interface.y_prime(tau);
        let zeta = pr.interface.y(s) - pr.interface.y(tau);
        let [k_psi, k_phi, c_psi, c_phi] = interface_kernels(pr.sigma_minus, pr.sigma_plus, zeta, tau - s, v);
        let s2 = pr.sigma_minus.powi(2);
        out[0] = k_phi;
        out[1] = k_psi;
        out[2] = v * k_phi + s2 * c_phi;
        out[3] = v * k_psi + s2 * c_psi;
    }
}

/// Solves the interface system for `(φ, ψ)` on `grid` with product-trapezoid
/// weights on the `(τ-s)^{-1/2}` factor.
pub fn solve_interface(problem: &ObmProblem, grid: &TimeGrid) -> Result<BoundaryTrace> {
    problem.interface.check(grid.horizon())?;
    let sys = InterfaceSystem { problem, medium: problem.medium() };
    let sol = solve_second_kind(&sys, grid, Rule::ProductTrapezoid)?;
    BoundaryTrace::from_parts(sol.times.clone(), sol.component(0), sol.component(1), &problem.interface)
}

/// Which one-sided limit to take when `x` sits on the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Density `u(τ, x)`; on the interface the left limit is returned.
pub fn green_function(problem: &ObmProblem, trace: &BoundaryTrace, tau: f64, x: f64) -> Result<f64> {
    let z = x - problem.interface.y(tau);
    let side = if z <= 0.0 { Side::Left } else { Side::Right };
    assemble(problem, trace, tau, z, side, false)
}

/// `u_x(τ, x)`, with an explicit side for points on the interface.
pub fn green_gradient(problem: &ObmProblem, trace: &BoundaryTrace, tau: f64, x: f64, side: Side) -> Result<f64> {
    let z = x - problem.interface.y(tau);
    assemble(problem, trace, tau, z, side, true)
}

/// The density over many points, in parallel.
pub fn density_profile(problem: &ObmProblem, trace: &BoundaryTrace, tau: f64, xs: &[f64]) -> Result<Vec<f64>> {
    xs.par_iter().map(|&x| green_function(problem, trace, tau, x)).collect()
}

fn assemble(problem: &ObmProblem, trace: &BoundaryTrace, tau: f64, z: f64, side: Side, dz: bool) -> Result<f64> {
    require(tau > 0.0, || format!("density needs τ > 0, got {tau}"))?;
    problem.interface.check(tau)?;
    if tau > trace.horizon() * (1.0 + 1e-12) {
        return Err(Error::Horizon { tau, horizon: trace.horizon() });
    }
    let medium = problem.medium();
    let col = match side {
        Side::Left => 0,
        Side::Right => 1,
    };
    let pick = |m: Mat2, r: usize| row(&m, r)[col];
    let p_fn = if dz { heat_kernel_p_dz } else { heat_kernel_p };
    let eta_fn = if dz { heat_kernel_eta_dz } else { heat_kernel_eta };
    let y_tau = problem.interface.y(tau);

    let source = pick(p_fn(z, tau, problem.x0 - y_tau, 0.0, &medium)?, problem.source_row());

    let w = problem.sigma_weights();
    let integrand = |s: f64| -> f64 {
        let zeta = problem.interface.y(s) - y_tau;
        let (phi, psi) = trace.at(s).expect("s inside the trace");
        let p = p_fn(z, tau, zeta, s, &medium).expect("s < τ");
        let eta = eta_fn(z, tau, zeta, s, &medium).expect("s < τ");
        psi * (pick(p, 0) - pick(p, 1)) - phi * (w[0] * pick(eta, 0) + w[1] * pick(eta, 1))
    };

    // panels follow the trace grid; s = τ - r² removes the √ singularity
    let mut breaks: Vec<f64> = trace.times.iter().copied().filter(|&s| s < tau).collect();
    breaks.push(tau);
    let scale = integrand_scale(problem, tau);
    let panels: Vec<Result<f64>> = breaks
        .windows(2)
        .map(|ab| {
            let (ra, rb) = ((tau - ab[1]).max(0.0).sqrt(), (tau - ab[0]).sqrt());
            adaptive(ra, rb, 1e-11 * scale, |r| if r <= 0.0 { 0.0 } else { 2.0 * r * integrand(tau - r * r) }).map(|(v, _)| v)
        })
        .collect();
    let mut total = source;
    for p in panels {
        total += p?;
    }
    Ok(total)
}

fn integrand_scale(problem: &ObmProblem, tau: f64) -> f64 {
    let s = problem.sigma_minus.min(problem.sigma_plus);
    (1.0 / (s * (tau.sqrt()).max(1e-3))).max(1.0)
}

/// `∫ u(τ, x) dx` by adaptive quadrature over a window wide enough for the
/// Gaussian tails, split at the source and the interface.
pub fn total_mass(problem: &ObmProblem, trace: &BoundaryTrace, tau: f64, tol: f64) -> Result<f64> {
    let smax = problem.sigma_minus.max(problem.sigma_plus);
    let reach = 2.0 * smax * tau.sqrt() * 9.0;
    let y_tau = problem.interface.y(tau);
    let mut pts = [problem.x0, y_tau, problem.interface.y(0.0)];
    pts.sort_by(f64::total_cmp);
    let lo = pts[0] - reach;
    let hi = pts[2] + reach;
    let mut cuts = vec![lo];
    cuts.extend(pts.iter().copied().filter(|&p| p > lo && p < hi));
    cuts.push(hi);
    cuts.dedup();
    let mut total = 0.0;
    for ab in cuts.windows(2) {
        // evaluate at interior points only so interface limits never matter
        total += adaptive(ab[0], ab[1], tol, |x| green_function(problem, trace, tau, x).unwrap_or(f64::NAN))?.0;
    }
    require(total.is_finite(), || format!("density not evaluable at τ = {tau}"))?;
    Ok(total)
}

/// Free Gaussian density of uniform diffusion coefficient `σ`.
pub fn free_density(sigma: f64, x0: f64, tau: f64, x: f64) -> f64 {
    let d = x - x0;
    (-d * d / (4.0 * sigma * sigma * tau)).exp() / (2.0 * sigma * (std::f64::consts::PI * tau).sqrt())
}

/// Laplace images of the interface kernels for `y = a + bτ`, in the same
/// order as [`interface_kernels`] (without the `√t` factor).
pub fn kernel_images(sigma_minus: f64, sigma_plus: f64, b: f64, p: Complex64) -> [Complex64; 4] {
    let (sm, sp) = (sigma_minus, sigma_plus);
    let contrast = (sm - sp) / (sm + sp);
    let kappa = 2.0 / (sm + sp);
    let (cm, cp) = (b * b / (4.0 * sm * sm), b * b / (4.0 * sp * sp));
    let (rm, rp) = ((p + cm).sqrt(), (p + cp).sqrt());
    let (im, ip) = (1.0 / rm, 1.0 / rp);
    let k_psi = 0.5 * kappa * (im - ip);
    let k_phi = -0.25 * kappa * b * (im - ip);
    let lead = (1.0 - contrast) / (4.0 * sm);
    let c_psi = -lead * b * (im / (sm * sm) - ip / (sp * sp));
    let c_phi = lead * (2.0 * cm * im - 2.0 * cp * ip + 2.0 * (rm - rp));
    [k_psi, k_phi, c_psi, c_phi]
}

/// Laplace images `(Â, B̂)` of the source value and x-derivative at
/// `y(τ)-0` for `y = a + bτ`.
pub fn source_images(problem_sigmas: (f64, f64), a: f64, b: f64, x0: f64, p: Complex64) -> (Complex64, Complex64) {
    let (sm, sp) = problem_sigmas;
    let contrast = (sm - sp) / (sm + sp);
    let kappa = 2.0 / (sm + sp);
    let d = x0 - a;
    let ss = if d < 0.0 { sm } else { sp };
    let c = b * b / (4.0 * ss * ss);
    let root = (p + c).sqrt();
    let common = (d * b / (2.0 * ss * ss)).exp() * (-root * d.abs() / ss).exp();
    let g0 = 0.5 * common / root;
    let g1 = common * (-0.5 * d.signum() + b / (4.0 * ss * root));
    (kappa * g0, -(1.0 - contrast) / (sm * ss) * g1)
}

/// Interface trace for `y = a + bτ` through Laplace images of the
/// convolution system, inverted numerically at the grid nodes.
pub fn laplace_route(sigma_minus: f64, sigma_plus: f64, a: f64, b: f64, x0: f64, grid: &TimeGrid) -> Result<BoundaryTrace> {
    let interface = MovingInterface::linear(a, b, grid.horizon())?;
    let problem = ObmProblem::new(sigma_minus, sigma_plus, interface, x0)?;
    let s2 = sigma_minus * sigma_minus;
    let kernel_hat = |p: Complex64, out: &mut [Complex64]| -> Result<()> {
        let [k_psi, k_phi, c_psi, c_phi] = kernel_images(sigma_minus, sigma_plus, b, p);
        out[0] = k_phi;
        out[1] = k_psi;
        out[2] = k_phi * b + c_phi * s2;
        out[3] = k_psi * b + c_psi * s2;
        Ok(())
    };
    let forcing_hat = |p: Complex64, out: &mut [Complex64]| -> Result<()> {
        let (ah, bh) = source_images((sigma_minus, sigma_plus), a, b, x0, p);
        out[0] = ah;
        out[1] = bh * s2 + ah * b;
        Ok(())
    };
    let (sol, _) = laplace_convolution_solve(2, kernel_hat, forcing_hat, grid.nodes(), &[0.0, 0.0], 1e-6)?;
    BoundaryTrace::from_parts(sol.times.clone(), sol.component(0), sol.component(1), &problem.interface)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::exp_sinh;
    use proptest::prelude::*;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn interface_checks_derivative() {
        assert!(MovingInterface::new(|t| t * t, |t| 2.0 * t, 1.0).is_ok());
        assert!(MovingInterface::new(|t| t * t, |t| t, 1.0).is_err());
        let i = MovingInterface::linear(0.0, 0.1, 1.0).unwrap();
        assert!(i.check(1.5).is_err());
        let c = MovingInterface::constant(0.0, 1.0).unwrap();
        assert!(ObmProblem::new(1.0, 2.0, c, 0.0).is_err());
    }

    #[test]
    fn kernels_match_generic_two_media_kernels() {
        let medium = TwoLayerMedium::new(0.0, 1.0, 2.0).unwrap();
        let (sm, sp) = (1.0, 2.0);
        for &(zeta, t) in &[(-0.03, 0.2), (0.4, 0.7), (-1.1, 0.05), (0.0, 0.3)] {
            let k = interface_kernels(sm, sp, zeta, t, 0.0);
            let p = heat_kernel_p(0.0, t, zeta, 0.0, &medium).unwrap();
            let eta = heat_kernel_eta(0.0, t, zeta, 0.0, &medium).unwrap();
            let pd = heat_kernel_p_dz(0.0, t, zeta, 0.0, &medium).unwrap();
            let ed = heat_kernel_eta_dz(0.0, t, zeta, 0.0, &medium).unwrap();
            let rt = t.sqrt();
            let want = [
                rt * (p.a11 - p.a21),
                -rt * (sm * eta.a11 - sp * eta.a21),
                rt * (pd.a11 - pd.a21),
                -rt * (sm * ed.a11 - sp * ed.a21),
            ];
            for c in 0..4 {
                assert!((k[c] - want[c]).abs() < 1e-12 * (1.0 + want[c].abs()), "{zeta} {t} {c}: {} vs {}", k[c], want[c]);
            }
        }
    }

    #[test]
    fn kernel_limits_are_continuous() {
        let v = 0.37;
        let lim = interface_kernels(1.0, 2.0, 0.0, 0.0, v);
        let t = 1e-7;
        let near = interface_kernels(1.0, 2.0, -v * t, t, v);
        for c in 0..4 {
            assert!((lim[c] - near[c]).abs() < 1e-5, "{c}: {} vs {}", lim[c], near[c]);
        }
    }

    #[test]
    fn images_match_quadrature() {
        let (sm, sp, b, a, x0) = (1.0, 2.0, 0.3, 0.1, 0.6);
        for &p in &[0.7, 3.0] {
            let img = kernel_images(sm, sp, b, Complex64::new(p, 0.0));
            for c in 0..4 {
                let q = exp_sinh(1e-12, |t| {
                    let k = interface_kernels(sm, sp, -b * t, t, b);
                    (-p * t).exp() * k[c] / t.sqrt()
                })
                .unwrap();
                assert!((img[c].re - q).abs() < 1e-8, "{p} {c}: {} vs {q}", img[c].re);
            }
            let medium = TwoLayerMedium::new(0.0, sm, sp).unwrap();
            let (ah, bh) = source_images((sm, sp), a, b, x0, Complex64::new(p, 0.0));
            let qa = exp_sinh(1e-12, |t| (-p * t).exp() * heat_kernel_p(0.0, t, x0 - a - b * t, 0.0, &medium).unwrap().a21)
                .unwrap();
            let qb = exp_sinh(1e-12, |t| (-p * t).exp() * heat_kernel_p_dz(0.0, t, x0 - a - b * t, 0.0, &medium).unwrap().a21)
                .unwrap();
            assert!((ah.re - qa).abs() < 1e-9 && (bh.re - qb).abs() < 1e-9, "{ah} {qa} {bh} {qb}");
        }
    }

    #[test]
    fn uniform_medium_gives_free_density() {
        let sigma = 1.3;
        let iface = MovingInterface::new(|t| 0.2 * (3.0 * t).sin(), |t| 0.6 * (3.0 * t).cos(), 1.0).unwrap();
        let pr = ObmProblem::new(sigma, sigma, iface, 0.5).unwrap();
        let grid = TimeGrid::uniform(1.0, 50).unwrap();
        let trace = solve_interface(&pr, &grid).unwrap();
        for (k, &t) in trace.times.iter().enumerate().skip(1) {
            let want = free_density(sigma, 0.5, t, pr.interface.y(t));
            assert!((trace.phi[k] - want).abs() < 1e-12);
        }
        for &x in &[-2.0, -0.3, 0.0, 0.2, 0.5, 1.7] {
            let g = green_function(&pr, &trace, 0.8, x).unwrap();
            assert!((g - free_density(sigma, 0.5, 0.8, x)).abs() < 1e-6, "{x}");
        }
    }

    #[test]
    fn constant_boundary_is_explicit_and_conserves_mass() {
        let iface = MovingInterface::constant(0.0, 1.0).unwrap();
        let pr = ObmProblem::new(1.0, 2.0, iface, 0.5).unwrap();
        let grid = TimeGrid::uniform(1.0, 40).unwrap();
        let trace = solve_interface(&pr, &grid).unwrap();
        let medium = pr.medium();
        for (k, &t) in trace.times.iter().enumerate().skip(1) {
            let p = heat_kernel_p(0.0, t, 0.5, 0.0, &medium).unwrap();
            assert!((trace.phi[k] - p.a21).abs() < 1e-14);
        }
        for &tau in &[1e-4, 0.1, 0.5, 1.0] {
            let m = total_mass(&pr, &trace, tau, 1e-10).unwrap();
            let tol = if tau < 1e-3 { 1e-3 } else { 1e-6 };
            assert!((m - 1.0).abs() < tol, "{tau}: {m}");
        }
    }

    #[test]
    fn moving_boundary_matches_interface_conditions() {
        let iface = MovingInterface::new(|t| 0.1 * t + 0.05 * (2.0 * t).sin(), |t| 0.1 + 0.1 * (2.0 * t).cos(), 1.0).unwrap();
        let pr = ObmProblem::new(1.0, 2.0, iface, 0.5).unwrap();
        let grid = TimeGrid::uniform(1.0, 200).unwrap();
        let trace = solve_interface(&pr, &grid).unwrap();
        let tau = 1.0;
        let y = pr.interface.y(tau);
        // assembled left limit reproduces the trace, and both limits agree
        let left = green_function(&pr, &trace, tau, y).unwrap();
        let right = assemble(&pr, &trace, tau, 0.0, Side::Right, false).unwrap();
        let phi = *trace.phi.last().unwrap();
        assert!((left - phi).abs() < 1e-4 && (right - left).abs() < 1e-4, "{left} {right} {phi}");
        let fl = green_gradient(&pr, &trace, tau, y, Side::Left).unwrap();
        let fr = green_gradient(&pr, &trace, tau, y, Side::Right).unwrap();
        let (ql, qr) = (fl, 4.0 * fr);
        assert!((ql - qr).abs() < 1e-3 * ql.abs().max(1e-2), "{ql} {qr}");
        let flux = *trace.flux.last().unwrap();
        assert!((ql - flux).abs() < 1e-3 * ql.abs().max(1e-2), "{ql} {flux}");
        let m = total_mass(&pr, &trace, tau, 1e-9).unwrap();
        assert!((m - 1.0).abs() < 1e-4, "{m}");
        let profile = density_profile(&pr, &trace, tau, &[-3.0, -1.0, 0.0, 0.3, 1.0, 4.0]).unwrap();
        assert!(profile.iter().all(|&g| g >= -1e-6));
    }

    #[test]
    fn laplace_route_reduces_to_explicit_case() {
        let grid = TimeGrid::uniform(1.0, 20).unwrap();
        let lap = laplace_route(1.0, 2.0, 0.0, 0.0, 0.5, &grid).unwrap();
        let medium = TwoLayerMedium::new(0.0, 1.0, 2.0).unwrap();
        for (k, &t) in lap.times.iter().enumerate().skip(1) {
            let p = heat_kernel_p(0.0, t, 0.5, 0.0, &medium).unwrap();
            let pd = heat_kernel_p_dz(0.0, t, 0.5, 0.0, &medium).unwrap();
            assert!((lap.phi[k] - p.a21).abs() < 1e-6, "{t}");
            assert!((lap.flux[k] - pd.a21).abs() < 1e-6, "{t}");
        }
        let same = laplace_route(1.5, 1.5, 0.0, 0.2, -0.4, &grid).unwrap();
        for (k, &t) in same.times.iter().enumerate().skip(1) {
            assert!((same.phi[k] - free_density(1.5, -0.4, t, 0.2 * t)).abs() < 1e-6);
        }
    }

    #[test]
    fn laplace_and_time_stepping_agree() {
        // graded start: the flux switches on like e^{-c/τ}
        let grid = TimeGrid::geometric(1e-4, 5e-3, 1.05, 1.0).unwrap();
        let lap = laplace_route(1.0, 2.0, 0.0, 0.1, 0.5, &grid).unwrap();
        let pr = ObmProblem::new(1.0, 2.0, MovingInterface::linear(0.0, 0.1, 1.0).unwrap(), 0.5).unwrap();
        let ts = solve_interface(&pr, &grid).unwrap();
        let dphi = max_diff(&lap.phi, &ts.phi);
        let dflux = max_diff(&lap.flux, &ts.flux);
        assert!(dphi < 1e-4 && dflux < 1e-4, "{dphi:e} {dflux:e}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn constant_boundary_density_is_positive(x in -3.0f64..3.0, tau in 0.05f64..1.0) {
            let pr = ObmProblem::new(1.0, 2.0, MovingInterface::constant(0.0, 1.0).unwrap(), 0.5).unwrap();
            let trace = solve_interface(&pr, &TimeGrid::uniform(1.0, 10).unwrap()).unwrap();
            prop_assert!(green_function(&pr, &trace, tau, x).unwrap() >= 0.0);
        }
    }
}
