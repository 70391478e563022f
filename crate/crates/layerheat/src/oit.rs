//! Continuous-spectrum transform for two half-lines joined at `y`, and the
//! closed-form heat kernels obtained by integrating its forward/backward
//! matrices against `e^{-ω² t}`.
//!
//! Kernel arguments follow `(z, τ | ζ, s)`: `z` is the observation offset
//! from the interface, `ζ` the source offset. Rows are indexed by the side of
//! the source, columns by the side of the observation point.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{require, Error, Result};
use crate::quad::{adaptive, gl_panels};
use crate::smallmat::Mat2;

pub type CMat2 = Matrix2<Complex64>;

/// Two media with diffusion coefficients `σ_∓` on either side of `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLayerMedium {
    pub y: f64,
    pub sigma_minus: f64,
    pub sigma_plus: f64,
}

impl TwoLayerMedium {
    pub fn new(y: f64, sigma_minus: f64, sigma_plus: f64) -> Result<Self> {
        require(y.is_finite(), || "interface must be finite".into())?;
        require(sigma_minus > 0.0 && sigma_plus > 0.0 && sigma_minus.is_finite() && sigma_plus.is_finite(), || {
            format!("diffusion coefficients must be positive, got {sigma_minus}, {sigma_plus}")
        })?;
        Ok(TwoLayerMedium { y, sigma_minus, sigma_plus })
    }

    /// `Σ = (σ_- - σ_+)/(σ_- + σ_+)`.
    pub fn contrast(&self) -> f64 {
        (self.sigma_minus - self.sigma_plus) / (self.sigma_minus + self.sigma_plus)
    }

    pub fn sigma_at(&self, x: f64) -> f64 {
        if x < self.y {
            self.sigma_minus
        } else {
            self.sigma_plus
        }
    }

    /// Indicator vector `[x < y, x > y]`; the interface point itself counts
    /// as the left side.
    pub fn indicator(&self, x: f64) -> [f64; 2] {
        if x <= self.y {
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        }
    }
}

fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// `diag(e^{iωz/σ_-}, e^{iωz/σ_+})`.
pub fn forward_matrix(z: f64, medium: &TwoLayerMedium, omega: f64) -> CMat2 {
    let zero = Complex64::new(0.0, 0.0);
    CMat2::new(cis(omega * z / medium.sigma_minus), zero, zero, cis(omega * z / medium.sigma_plus))
}

/// The synthesis matrix paired with [`forward_matrix`].
pub fn backward_matrix(z: f64, medium: &TwoLayerMedium, omega: f64) -> CMat2 {
    let (sm, sp) = (medium.sigma_minus, medium.sigma_plus);
    let c = medium.contrast();
    let em = cis(-omega * z / sm);
    let ep = cis(-omega * z / sp);
    CMat2::new(
        (em + cis(omega * z / sm) * c) / sm,
        ep * ((1.0 + c) / sm),
        em * ((1.0 - c) / sp),
        (ep - cis(omega * z / sp) * c) / sp,
    )
}

/// Truncation bounds for functions handed to [`oit_forward`]; the integrand
/// is taken as zero outside `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lo: f64,
    pub hi: f64,
}

/// Two-component image `(f̄_-(ω), f̄_+(ω))` at each requested frequency.
pub fn oit_forward(
    f: impl Fn(f64) -> f64 + Sync,
    support: Support,
    medium: &TwoLayerMedium,
    omegas: &[f64],
    tol: f64,
) -> Result<Vec<[Complex64; 2]>> {
    require(support.lo < support.hi, || "support must be a nonempty interval".into())?;
    let y = medium.y;
    omegas
        .par_iter()
        .map(|&w| {
            let side = |a: f64, b: f64, sigma: f64| -> Result<Complex64> {
                if b <= a {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                adaptive(a, b, tol, |x| cis(w * (x - y) / sigma) * f(x))
                    .map(|(v, _)| v)
                    .map_err(|e| Error::Quadrature(format!("forward transform at ω = {w}: {e}")))
            };
            Ok([
                side(support.lo, y.min(support.hi), medium.sigma_minus)?,
                side(y.max(support.lo), support.hi, medium.sigma_plus)?,
            ])
        })
        .collect()
}

/// Inverse value with the change observed when the frequency cutoff is
/// reduced to 80 %.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseValue {
    pub value: f64,
    pub truncation: f64,
}

/// An image sampled on Gauss-Legendre nodes of `[-Ω, Ω]` and of the
/// reduced range `[-0.8Ω, 0.8Ω]` used for the truncation estimate.
#[derive(Debug, Clone)]
pub struct SampledImage {
    pub omega_max: f64,
    full: Vec<(f64, f64, [Complex64; 2])>,
    inner: Vec<(f64, f64, [Complex64; 2])>,
}

fn panel_nodes(omega_max: f64, panels: usize) -> Vec<(f64, f64)> {
    let rule = crate::quad::GlRule::gl20();
    let h = 2.0 * omega_max / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let lo = -omega_max + h * p as f64;
            rule.mapped(lo, lo + h).collect::<Vec<_>>()
        })
        .collect()
}

impl SampledImage {
    /// Samples an image function given in closed form.
    pub fn from_fn(image: impl Fn(f64) -> [Complex64; 2] + Sync, omega_max: f64, panels: usize) -> Result<Self> {
        require(omega_max > 0.0 && panels >= 1, || "frequency cutoff and panel count must be positive".into())?;
        let sample = |nodes: Vec<(f64, f64)>| nodes.into_par_iter().map(|(w, wt)| (w, wt, image(w))).collect();
        let inner_panels = ((panels as f64 * 0.8).round() as usize).max(1);
        Ok(SampledImage { omega_max, full: sample(panel_nodes(omega_max, panels)), inner: sample(panel_nodes(0.8 * omega_max, inner_panels)) })
    }

    /// Forward transform of `f` sampled on the inversion nodes.
    pub fn forward(
        f: impl Fn(f64) -> f64 + Sync,
        support: Support,
        medium: &TwoLayerMedium,
        omega_max: f64,
        panels: usize,
        tol: f64,
    ) -> Result<Self> {
        require(omega_max > 0.0 && panels >= 1, || "frequency cutoff and panel count must be positive".into())?;
        let inner_panels = ((panels as f64 * 0.8).round() as usize).max(1);
        let sample = |nodes: Vec<(f64, f64)>| -> Result<Vec<(f64, f64, [Complex64; 2])>> {
            let omegas: Vec<f64> = nodes.iter().map(|n| n.0).collect();
            let img = oit_forward(&f, support, medium, &omegas, tol)?;
            Ok(nodes.into_iter().zip(img).map(|((w, wt), v)| (w, wt, v)).collect())
        };
        Ok(SampledImage { omega_max, full: sample(panel_nodes(omega_max, panels))?, inner: sample(panel_nodes(0.8 * omega_max, inner_panels))? })
    }
}

/// `(1/2π) ∫ f̄(ω)ᵀ B_{x-y}(ω) 𝟙_x dω` over `[-Ω, Ω]`; fails if the
/// truncation estimate exceeds `tol`.
pub fn oit_inverse(image: &SampledImage, medium: &TwoLayerMedium, x: f64, tol: f64) -> Result<InverseValue> {
    let ind = medium.indicator(x);
    let sum = |nodes: &[(f64, f64, [Complex64; 2])]| -> f64 {
        nodes
            .iter()
            .map(|(w, wt, fb)| {
                let b = backward_matrix(x - medium.y, medium, *w);
                let col = [b[(0, 0)] * ind[0] + b[(0, 1)] * ind[1], b[(1, 0)] * ind[0] + b[(1, 1)] * ind[1]];
                wt * (fb[0] * col[0] + fb[1] * col[1]).re
            })
            .sum()
    };
    let inv = 0.5 * std::f64::consts::FRAC_1_PI;
    let full = sum(&image.full);
    let value = inv * full;
    let truncation = inv * (full - sum(&image.inner)).abs();
    if truncation > tol {
        return Err(Error::Quadrature(format!("inverse transform at x = {x}: truncation estimate {truncation:e} above {tol:e}")));
    }
    Ok(InverseValue { value, truncation })
}

/// One Gaussian term `c/σ_row · g_k(p)` of a kernel entry, with phase
/// `p = pz z + pζ ζ`.
struct Term {
    row: usize,
    col: usize,
    c: f64,
    pz: f64,
    pzeta: f64,
}

fn terms(medium: &TwoLayerMedium) -> [Term; 6] {
    let (sm, sp) = (1.0 / medium.sigma_minus, 1.0 / medium.sigma_plus);
    let c = medium.contrast();
    [
        Term { row: 0, col: 0, c: 1.0, pz: -sm, pzeta: sm },
        Term { row: 0, col: 0, c, pz: sm, pzeta: sm },
        Term { row: 0, col: 1, c: 1.0 + c, pz: -sp, pzeta: sm },
        Term { row: 1, col: 0, c: 1.0 - c, pz: -sm, pzeta: sp },
        Term { row: 1, col: 1, c: 1.0, pz: -sp, pzeta: sp },
        Term { row: 1, col: 1, c: -c, pz: sp, pzeta: sp },
    ]
}

/// `k`-th derivative in `p` of `e^{-p²/(4t)}/(2√(πt))`, for `k ≤ 3`.
pub(crate) fn gauss_derivative(p: f64, t: f64, k: usize) -> f64 {
    let g0 = (-p * p / (4.0 * t)).exp() / (2.0 * (std::f64::consts::PI * t).sqrt());
    match k {
        0 => g0,
        1 => -p / (2.0 * t) * g0,
        2 => (p * p / (4.0 * t * t) - 1.0 / (2.0 * t)) * g0,
        3 => (3.0 * p / (4.0 * t * t) - p * p * p / (8.0 * t * t * t)) * g0,
        _ => unreachable!("derivative order above 3"),
    }
}

fn assemble(medium: &TwoLayerMedium, z: f64, zeta: f64, t: f64, order: usize, dz: usize) -> Mat2 {
    let mut m = [[0.0; 2]; 2];
    let sig = [medium.sigma_minus, medium.sigma_plus];
    for term in terms(medium) {
        let p = term.pz * z + term.pzeta * zeta;
        m[term.row][term.col] += term.c / sig[term.row] * term.pz.powi(dz as i32) * gauss_derivative(p, t, order + dz);
    }
    Mat2::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

fn check_times(tau: f64, s: f64) -> Result<f64> {
    require(tau > s && (tau - s).is_finite(), || format!("kernel needs τ > s, got τ = {tau}, s = {s}"))?;
    Ok(tau - s)
}

/// Heat kernel `P(z, τ | ζ, s)` of the two-media problem.
pub fn heat_kernel_p(z: f64, tau: f64, zeta: f64, s: f64, medium: &TwoLayerMedium) -> Result<Mat2> {
    Ok(assemble(medium, z, zeta, check_times(tau, s)?, 0, 0))
}

/// Companion kernel `η(z, τ | ζ, s)`, the `iω`-weighted integral.
pub fn heat_kernel_eta(z: f64, tau: f64, zeta: f64, s: f64, medium: &TwoLayerMedium) -> Result<Mat2> {
    Ok(assemble(medium, z, zeta, check_times(tau, s)?, 1, 0))
}

/// `∂P/∂z`, analytic.
pub fn heat_kernel_p_dz(z: f64, tau: f64, zeta: f64, s: f64, medium: &TwoLayerMedium) -> Result<Mat2> {
    Ok(assemble(medium, z, zeta, check_times(tau, s)?, 0, 1))
}

/// `∂η/∂z`, analytic.
pub fn heat_kernel_eta_dz(z: f64, tau: f64, zeta: f64, s: f64, medium: &TwoLayerMedium) -> Result<Mat2> {
    Ok(assemble(medium, z, zeta, check_times(tau, s)?, 1, 1))
}

/// Both kernels at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub p: Mat2,
    pub eta: Mat2,
    pub z: f64,
    pub tau: f64,
    pub zeta: f64,
    pub s: f64,
}

pub fn kernel_sample(z: f64, tau: f64, zeta: f64, s: f64, medium: &TwoLayerMedium) -> Result<KernelSample> {
    Ok(KernelSample {
        p: heat_kernel_p(z, tau, zeta, s, medium)?,
        eta: heat_kernel_eta(z, tau, zeta, s, medium)?,
        z,
        tau,
        zeta,
        s,
    })
}

/// Kernels by direct ω-quadrature of `e^{-ω² t} F_ζ B_z` (and its
/// `iω`-weighted version). Returns `(P, η, largest imaginary part)`.
pub fn kernels_by_quadrature(z: f64, tau: f64, zeta: f64, s: f64, medium: &TwoLayerMedium) -> Result<(Mat2, Mat2, f64)> {
    let t = check_times(tau, s)?;
    let omega_max = (40.0 / t).sqrt();
    let freq = omega_max * (z.abs() + zeta.abs()) / medium.sigma_minus.min(medium.sigma_plus);
    let panels = (freq / std::f64::consts::PI).ceil() as usize + 16;
    let entry = |r: usize, c: usize, weighted: bool| -> Complex64 {
        gl_panels(-omega_max, omega_max, panels, |w| {
            let m = forward_matrix(zeta, medium, w) * backward_matrix(z, medium, w);
            let v = m[(r, c)] * (-w * w * t).exp();
            if weighted {
                v * Complex64::new(0.0, w)
            } else {
                v
            }
        }) * (0.5 * std::f64::consts::FRAC_1_PI)
    };
    let mut p = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut e = p;
    for r in 0..2 {
        for c in 0..2 {
            p[r][c] = entry(r, c, false);
            e[r][c] = entry(r, c, true);
        }
    }
    let imag = p.iter().chain(e.iter()).flatten().map(|v| v.im.abs()).fold(0.0, f64::max);
    Ok((
        Mat2::new(p[0][0].re, p[0][1].re, p[1][0].re, p[1][1].re),
        Mat2::new(e[0][0].re, e[0][1].re, e[1][0].re, e[1][1].re),
        imag,
    ))
}
