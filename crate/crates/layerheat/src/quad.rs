//! Quadrature helpers: composite Gauss-Legendre panels, adaptive
//! Gauss-Legendre bisection, and double-exponential rules for endpoint
//! singularities and half-infinite ranges.

use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: reals and complex numbers.
pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GlRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GlRule {
    pub fn new(degree: usize) -> Self {
        let degree = std::num::NonZeroUsize::new(degree.max(1)).expect("nonzero");
        let rule = GaussLegendre::new(degree);
        let (nodes, weights) = rule.as_node_weight_pairs().iter().copied().unzip();
        GlRule { nodes, weights }
    }

    /// Cached 20-point rule used by the panel integrators.
    pub fn gl20() -> &'static GlRule {
        static RULE: OnceLock<GlRule> = OnceLock::new();
        RULE.get_or_init(|| GlRule::new(20))
    }

    pub fn gl10() -> &'static GlRule {
        static RULE: OnceLock<GlRule> = OnceLock::new();
        RULE.get_or_init(|| GlRule::new(10))
    }

    pub fn integrate<T: Scalar>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * (w * half);
        }
        acc
    }

    /// Mapped nodes and weights for the interval [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, w * half))
    }
}

/// Composite 20-point Gauss-Legendre rule over `panels` equal panels.
pub fn gl_panels<T: Scalar>(a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> T) -> T {
    let rule = GlRule::gl20();
    let h = (b - a) / panels as f64;
    let mut acc = T::zero();
    for p in 0..panels {
        let lo = a + h * p as f64;
        acc = acc + rule.integrate(lo, lo + h, &mut f);
    }
    acc
}

/// Adaptive bisection with a 10-point rule checked against two half-panel
/// 10-point rules; returns the integral and the summed error estimate.
pub fn adaptive<T: Scalar>(a: f64, b: f64, tol: f64, f: impl Fn(f64) -> T) -> Result<(T, f64)> {
    let rule = GlRule::gl10();
    let mut stack = vec![(a, b, rule.integrate(a, b, &f), 0usize)];
    let mut total = T::zero();
    let mut err = 0.0;
    let width = (b - a).abs().max(f64::MIN_POSITIVE);
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &f);
        let right = rule.integrate(mid, hi, &f);
        let refined = left + right;
        let e = (refined - whole).magnitude();
        let local_tol = tol * ((hi - lo).abs() / width).max(1e-3);
        if e <= local_tol || depth >= 40 {
            if depth >= 40 && e > local_tol {
                return Err(Error::Quadrature(format!("adaptive rule stalled on [{lo}, {hi}], error {e:e}")));
            }
            total = total + refined;
            err += e;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok((total, err))
}

/// Tanh-sinh rule on [a, b]; `f` receives `(x, distance to a, distance to b)`
/// so integrands with endpoint singularities can be evaluated without
/// cancellation.
pub fn tanh_sinh(a: f64, b: f64, tol: f64, f: impl Fn(f64, f64, f64) -> f64) -> Result<f64> {
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> f64 {
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let cu = u.cosh();
        // distance from the nearer endpoint, computed without cancellation
        let d = half * (-u.abs()).exp() / cu;
        let w = half * std::f64::consts::FRAC_PI_2 * t.cosh() / (cu * cu);
        if w == 0.0 || d == 0.0 || !w.is_finite() {
            return 0.0;
        }
        if t >= 0.0 {
            w * f(b - d, 2.0 * half - d, d)
        } else {
            w * f(a + d, d, 2.0 * half - d)
        }
    };
    double_exponential(eval, tol, 4.0)
}

/// Exp-sinh rule for ∫_0^∞ f(t) dt, suited to integrable singularities at 0
/// and exponential decay at infinity.
pub fn exp_sinh(tol: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let eval = |t: f64| -> f64 {
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let x = u.exp();
        if x == 0.0 || !x.is_finite() {
            return 0.0;
        }
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() * x;
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            w * v
        }
    };
    double_exponential(eval, tol, 4.5)
}

/// Complex variant of [`exp_sinh`].
pub fn exp_sinh_complex(tol: f64, f: impl Fn(f64) -> Complex64) -> Result<Complex64> {
    let re = exp_sinh(tol, |x| f(x).re)?;
    let im = exp_sinh(tol, |x| f(x).im)?;
    Ok(Complex64::new(re, im))
}

fn double_exponential(g: impl Fn(f64) -> f64, tol: f64, t_max: f64) -> Result<f64> {
    let mut h = 0.5;
    let mut sum = g(0.0);
    let n0 = (t_max / h).ceil() as i64;
    for k in 1..=n0 {
        let t = k as f64 * h;
        sum += g(t) + g(-t);
    }
    let mut prev = sum * h;
    for _level in 0..10 {
        h *= 0.5;
        let n = (t_max / h).ceil() as i64;
        let mut k = 1;
        while k <= n {
            let t = k as f64 * h;
            sum += g(t) + g(-t);
            k += 2;
        }
        let cur = sum * h;
        if (cur - prev).abs() <= tol * cur.abs().max(1e-300) || (cur - prev).abs() < 1e-300 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!("double-exponential rule did not reach tolerance {tol:e}, last estimate {prev:e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_panels_polynomial_and_trig() {
        let v: f64 = gl_panels(0.0, 1.0, 1, |x| x.powi(7));
        assert!((v - 0.125).abs() < 1e-15);
        let s: f64 = gl_panels(0.0, std::f64::consts::PI, 4, f64::sin);
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_peaked() {
        let (v, _) = adaptive(-1.0, 1.0, 1e-12, |x: f64| 1.0 / (1e-4 + x * x)).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        // ∫_0^1 1/sqrt(1-x) dx = 2
        let v = tanh_sinh(0.0, 1.0, 1e-13, |_, _, db| 1.0 / db.sqrt()).unwrap();
        assert!((v - 2.0).abs() < 1e-11, "{v}");
        let w = tanh_sinh(0.0, 1.0, 1e-13, |_, da, _| da.ln()).unwrap();
        assert!((w + 1.0).abs() < 1e-11, "{w}");
    }

    #[test]
    fn exp_sinh_laplace_pairs() {
        // ∫ e^{-pt} t^{-1/2} = sqrt(pi/p)
        let p = 2.5f64;
        let v = exp_sinh(1e-13, |t| (-p * t).exp() / t.sqrt()).unwrap();
        assert!((v - (std::f64::consts::PI / p).sqrt()).abs() < 1e-11);
        // ∫ e^{-pt} e^{-c/t}/sqrt(t) = sqrt(pi/p) e^{-2 sqrt(cp)}
        let c = 0.3f64;
        let v = exp_sinh(1e-13, |t| (-p * t - c / t).exp() / t.sqrt()).unwrap();
        let exact = (std::f64::consts::PI / p).sqrt() * (-2.0 * (c * p).sqrt()).exp();
        assert!((v - exact).abs() < 1e-12);
    }
}
