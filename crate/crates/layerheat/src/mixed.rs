//! Resolvent of the layered operator on the whole line when both outer
//! media conduct, and the resulting representation of the delta function.
//!
//! With `k = √λ` (principal branch) each layer carries a homogeneous part
//! stored as its local state `[u; u′/λ̃_i]` at the layer's left end, plus the
//! free-space particular term `e^{-λ̃_i|x-x0|}/(2kσ_i)`. The states are chained
//! by `𝓢_{s_i}𝓗_{λ̃_i l_i}`; source jumps enter through a vector per
//! interface. Products are kept as (bounded matrix, log scale) pairs.
//!
//! All formulas are analytic in `k`, so the same code evaluates the
//! continuation onto the second sheet (`Re k < 0`) where the zeros of the
//! determinant live.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{require, Error, Result};
use crate::oit::CMat2;
use crate::quad::GlRule;

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// Boundaries `y_0 < … < y_N` and coefficients `σ_0 … σ_{N+1}`, with
/// `σ_0 = σ_-` and `σ_{N+1} = σ_+` on the outer half-lines.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedMedium {
    y: Vec<f64>,
    sigma: Vec<f64>,
}

impl MixedMedium {
    pub fn new(y: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        require(!y.is_empty(), || "need at least one boundary".into())?;
        require(sigma.len() == y.len() + 1, || format!("need {} coefficients, got {}", y.len() + 1, sigma.len()))?;
        require(y.iter().all(|v| v.is_finite()) && y.windows(2).all(|w| w[0] < w[1]), || {
            "boundaries must be finite and strictly increasing".into()
        })?;
        require(sigma.iter().all(|&s| s > 0.0 && s.is_finite()), || "coefficients must be positive".into())?;
        Ok(MixedMedium { y, sigma })
    }

    /// One interior layer `[y0, y1]` between two half-lines.
    pub fn three_layer(sigma_minus: f64, sigma_1: f64, sigma_plus: f64, y0: f64, y1: f64) -> Result<Self> {
        Self::new(vec![y0, y1], vec![sigma_minus, sigma_1, sigma_plus])
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Number of interior layers `N`.
    pub fn interior_layers(&self) -> usize {
        self.y.len() - 1
    }

    /// `l_i = y_i - y_{i-1}` for `1 ≤ i ≤ N`, and `l_0 = 0`.
    pub fn len(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.y[i] - self.y[i - 1]
        }
    }

    /// `s_i = σ_i/σ_{i+1}`.
    pub fn s(&self, i: usize) -> f64 {
        self.sigma[i] / self.sigma[i + 1]
    }

    /// Layer index `0..=N+1`; a boundary point belongs to the layer on its left.
    pub fn layer_of(&self, x: f64) -> usize {
        self.y.partition_point(|&b| b < x)
    }
}

/// Principal square root, rejecting the cut `λ ≤ 0`.
pub fn principal_root(lambda: C) -> Result<C> {
    require(lambda.is_finite(), || "λ must be finite".into())?;
    require(!(lambda.im == 0.0 && lambda.re <= 0.0), || format!("λ = {lambda} lies on the branch cut"))?;
    Ok(lambda.sqrt())
}

/// `e(z, a, b) = e^{-|z|k/a}/(2kb)`.
fn e_fn(z: f64, a: f64, b: f64, k: C) -> C {
    (-k * (z.abs() / a)).exp() / (k * (2.0 * b))
}

/// Source-jump matrix at a boundary with `α` on the left and `β` on the
/// right, `z = x0 - y_k`. Column 0 applies when `x0 < y_k`, column 1 when
/// `x0 > y_k`.
pub fn g_matrix(sigma_a: f64, sigma_b: f64, z: f64, lambda: C) -> Result<CMat2> {
    let k = principal_root(lambda)?;
    Ok(g_matrix_k(sigma_a, sigma_b, z, k))
}

fn g_matrix_k(a: f64, b: f64, z: f64, k: C) -> CMat2 {
    let top = e_fn(z, a, a, k) - e_fn(z, b, b, k);
    let bottom = e_fn(z, a, b, k) - e_fn(z, b, b, k);
    CMat2::new(top, top, -bottom, bottom)
}

fn jump(a: f64, b: f64, z: f64, k: C) -> [C; 2] {
    let g = g_matrix_k(a, b, z, k);
    match z.partial_cmp(&0.0) {
        Some(std::cmp::Ordering::Less) => [g[(0, 0)], g[(1, 0)]],
        Some(std::cmp::Ordering::Greater) => [g[(0, 1)], g[(1, 1)]],
        _ => [g[(0, 0)], C::new(0.0, 0.0)],
    }
}

/// `z·e^{log}` without forming `e^{log}` on its own, so a tiny mantissa and
/// a huge scale combine instead of giving `0·∞`.
fn rescale(z: C, log: f64) -> C {
    let r = z.norm();
    if r == 0.0 {
        return C::new(0.0, 0.0);
    }
    if !r.is_finite() {
        return z * log.exp().min(f64::MAX);
    }
    (z / r) * (r.ln() + log).exp()
}

/// `𝓗_θ e^{-|Re θ|}` and `|Re θ|`.
fn hyper_scaled(theta: C) -> (CMat2, f64) {
    let r = theta.re.abs();
    let ep = (theta - r).exp();
    let em = (-theta - r).exp();
    let c = 0.5 * (ep + em);
    let s = 0.5 * (ep - em);
    (CMat2::new(c, s, s, c), r)
}

/// Scaled factor `𝓢_{s_j}𝓗_{λ̃_j l_j}` and its log scale.
fn factor(medium: &MixedMedium, j: usize, k: C) -> (CMat2, f64) {
    let (h, r) = hyper_scaled(k * (medium.len(j) / medium.sigma[j]));
    let s = C::new(medium.s(j), 0.0);
    (CMat2::new(h[(0, 0)], h[(0, 1)], s * h[(1, 0)], s * h[(1, 1)]), r)
}

/// `Λ_k^p(λ) = 𝓢_{s_{p-1}}𝓗_{…} ⋯ 𝓢_{s_k}𝓗_{λ̃_k l_k}`, identity for `k = p`.
pub fn lambda_seq(medium: &MixedMedium, from: usize, to: usize, lambda: C) -> Result<CMat2> {
    let k = principal_root(lambda)?;
    lambda_seq_k(medium, from, to, k)
}

fn lambda_seq_k(medium: &MixedMedium, from: usize, to: usize, k: C) -> Result<CMat2> {
    require(from <= to && to <= medium.interior_layers() + 1, || format!("need 0 ≤ {from} ≤ {to} ≤ N+1"))?;
    let mut m = CMat2::identity();
    let mut log = 0.0;
    for j in from..to {
        let (f, r) = factor(medium, j, k);
        m = f * m;
        log += r;
    }
    let out = m * C::new(log.exp(), 0.0);
    if !out.iter().all(|v| v.is_finite()) {
        return Err(Error::Overflow(format!("Λ product overflows at k = {k}")));
    }
    Ok(out)
}

/// Scaled propagation: `p̂_i, q̂_i` with `Λ_0^i[1;1] = e^{R_i} p̂_i` and the
/// source part `Σ_{j<i} Λ_{j+1}^i g_j = e^{R_i} q̂_i`.
struct Chain {
    p: Vec<[C; 2]>,
    q: Vec<[C; 2]>,
    log: Vec<f64>,
}

fn chain(medium: &MixedMedium, k: C, x0: Option<f64>) -> Chain {
    let n = medium.interior_layers();
    let zero = C::new(0.0, 0.0);
    let mut p = vec![[C::new(1.0, 0.0), C::new(1.0, 0.0)]];
    let mut q = vec![[zero, zero]];
    let mut log = vec![0.0];
    for j in 0..=n {
        let (f, r) = factor(medium, j, k);
        let rn = log[j] + r;
        let pj = p[j];
        let qj = q[j];
        p.push([f[(0, 0)] * pj[0] + f[(0, 1)] * pj[1], f[(1, 0)] * pj[0] + f[(1, 1)] * pj[1]]);
        let g = match x0 {
            Some(x0) => jump(medium.sigma[j], medium.sigma[j + 1], x0 - medium.y[j], k),
            None => [zero, zero],
        };
        let w = (-rn).exp();
        q.push([f[(0, 0)] * qj[0] + f[(0, 1)] * qj[1] + g[0] * w, f[(1, 0)] * qj[0] + f[(1, 1)] * qj[1] + g[1] * w]);
        log.push(rn);
    }
    Chain { p, q, log }
}

/// `det Λ*(λ) = Λ11 + Λ12 + Λ21 + Λ22` on the principal branch.
pub fn det_lambda_star(medium: &MixedMedium, lambda: C) -> Result<C> {
    det_lambda_star_k(medium, principal_root(lambda)?)
}

/// The determinant as an entire function of `k = √λ`, valid on both sheets.
pub fn det_lambda_star_k(medium: &MixedMedium, k: C) -> Result<C> {
    let ch = chain(medium, k, None);
    let last = ch.p.len() - 1;
    let d = rescale(ch.p[last][0] + ch.p[last][1], ch.log[last]);
    if !d.is_finite() {
        return Err(Error::Overflow(format!("det Λ* overflows at k = {k}")));
    }
    Ok(d)
}

/// Closed-form determinant for one interior layer.
pub fn det_three_layer(sigma_minus: f64, sigma_1: f64, sigma_plus: f64, l1: f64, k: C) -> C {
    let (s_minus, s1) = (sigma_minus / sigma_1, sigma_1 / sigma_plus);
    let th = k * (l1 / sigma_1);
    th.cosh() * (1.0 + s1 * s_minus) + th.sinh() * (s1 + s_minus)
}

/// Coefficients of the resolvent for one `(λ, x0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedSolution {
    pub k: C,
    pub x0: f64,
    pub c_minus: C,
    pub d_plus: C,
    /// Local states `(C_i, D_i)` at `y_{i-1}` for interior layers `1..=N`.
    pub layers: Vec<(C, C)>,
    /// Multiplier applied to the particular term: 1, or `det Λ*` for the
    /// determinant-weighted form used at poles.
    weight: C,
    medium: MixedMedium,
}

impl MixedSolution {
    /// Solves for `λ` off the cut; rejects a vanishing determinant.
    pub fn new(medium: &MixedMedium, x0: f64, lambda: C) -> Result<Self> {
        Self::from_k(medium, x0, principal_root(lambda)?)
    }

    /// Same, with `k` on either sheet.
    pub fn from_k(medium: &MixedMedium, x0: f64, k: C) -> Result<Self> {
        require(x0.is_finite(), || "source must be finite".into())?;
        require(k.norm() > 0.0 && k.is_finite(), || "k must be finite and nonzero".into())?;
        let ch = chain(medium, k, Some(x0));
        let last = ch.p.len() - 1;
        let (pl, ql) = (ch.p[last], ch.q[last]);
        let det = pl[0] + pl[1];
        let size = pl[0].norm() + pl[1].norm();
        if det.norm() <= 1e-13 * size {
            return Err(Error::Singular(format!("det Λ* vanishes at k = {k}")));
        }
        let c_minus = -(ql[0] + ql[1]) / det;
        Ok(Self::assemble(medium, x0, k, &ch, c_minus, C::new(1.0, 0.0)))
    }

    /// `det Λ*·u`, finite at the zeros of the determinant.
    pub fn det_weighted(medium: &MixedMedium, x0: f64, k: C) -> Result<Self> {
        let ch = chain(medium, k, Some(x0));
        let last = ch.p.len() - 1;
        let l = ch.log[last];
        let (pl, ql) = (ch.p[last], ch.q[last]);
        let det = rescale(pl[0] + pl[1], l);
        let c_minus = -rescale(ql[0] + ql[1], l);
        let out = Self::assemble(medium, x0, k, &ch, c_minus, det);
        if !(out.c_minus.is_finite() && out.d_plus.is_finite()) {
            return Err(Error::Overflow(format!("weighted resolvent overflows at k = {k}")));
        }
        Ok(out)
    }

    fn assemble(medium: &MixedMedium, x0: f64, k: C, ch: &Chain, c_minus: C, weight: C) -> Self {
        let n = medium.interior_layers();
        let state = |i: usize| -> [C; 2] {
            let l = ch.log[i];
            [rescale(ch.p[i][0] * c_minus + ch.q[i][0] * weight, l), rescale(ch.p[i][1] * c_minus + ch.q[i][1] * weight, l)]
        };
        let layers = (1..=n).map(|i| {
            let s = state(i);
            (s[0], s[1])
        });
        let d_plus = state(n + 1)[0];
        MixedSolution { k, x0, c_minus, d_plus, layers: layers.collect(), weight, medium: medium.clone() }
    }

    /// `u_λ(x | x0)`.
    pub fn eval(&self, x: f64) -> C {
        self.eval_with_derivative(x).0
    }

    /// `(u, u_x)`; on a boundary the left-layer formula is used.
    pub fn eval_with_derivative(&self, x: f64) -> (C, C) {
        let m = &self.medium;
        let n = m.interior_layers();
        let i = m.layer_of(x);
        let sig = m.sigma[i];
        let kt = self.k / sig;
        let d = x - self.x0;
        let part = (-kt * d.abs()).exp() / (self.k * (2.0 * sig)) * self.weight;
        let dpart = -kt * d.signum() * part;
        let (h, dh) = if i == 0 {
            let v = self.c_minus * (kt * (x - m.y[0])).exp();
            (v, kt * v)
        } else if i == n + 1 {
            let v = self.d_plus * (-kt * (x - m.y[n])).exp();
            (v, -kt * v)
        } else {
            // cosh/sinh split into growing and decaying waves so that a
            // large argument never multiplies an underflowed coefficient.
            let th = kt * (x - m.y[i - 1]);
            let (a, b) = self.layers[i - 1];
            let phase = C::new(0.0, th.im).exp();
            let up = rescale(0.5 * (a + b) * phase, th.re);
            let down = rescale(0.5 * (a - b) / phase, -th.re);
            (up + down, kt * (up - down))
        };
        (h + part, dh + dpart)
    }
}

/// `u_λ(x | x0)` on the principal branch.
pub fn u_lambda_mixed(medium: &MixedMedium, x: f64, x0: f64, lambda: C) -> Result<C> {
    Ok(MixedSolution::new(medium, x0, lambda)?.eval(x))
}

/// Boundary coefficients `(C_-, D_+)`.
pub fn solve_boundary_coeffs(medium: &MixedMedium, x0: f64, lambda: C) -> Result<(C, C)> {
    let s = MixedSolution::new(medium, x0, lambda)?;
    Ok((s.c_minus, s.d_plus))
}

/// Interior layer states `(C_i, D_i)` at `y_{i-1}`; empty when `N = 0`.
pub fn layer_coeffs(medium: &MixedMedium, x0: f64, lambda: C) -> Result<Vec<(C, C)>> {
    Ok(MixedSolution::new(medium, x0, lambda)?.layers)
}

/// A zero of the determinant, as `k = √λ` and `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetZero {
    pub n: i64,
    pub k: C,
    pub lambda: C,
}

/// Closed-form zeros for one interior layer:
/// `k = (σ_1/l_1)(artanh(-r) + iπn)` with `r = (1 + s_1 s_-)/(s_1 + s_-)`,
/// for `|n| ≤ n_max`. Returns an empty list when `r = 1` (no zeros).
pub fn three_layer_zeros(medium: &MixedMedium, n_max: usize) -> Result<Vec<DetZero>> {
    require(medium.interior_layers() == 1, || "closed form needs exactly one interior layer".into())?;
    let (sm, s1, sp) = (medium.sigma[0], medium.sigma[1], medium.sigma[2]);
    let l1 = medium.len(1);
    let (s_minus, s_1) = (sm / s1, s1 / sp);
    let r = (1.0 + s_1 * s_minus) / (s_1 + s_minus);
    if (r - 1.0).abs() < 1e-15 {
        return Ok(Vec::new());
    }
    // artanh(-r) = ½ ln((1-r)/(1+r)); for r > 1 the imaginary part is π/2
    let re = 0.5 * ((1.0 - r).abs() / (1.0 + r)).ln();
    let chi = if r < 1.0 { C::new(re, 0.0) } else { C::new(re, 0.5 * std::f64::consts::PI) };
    let scale = s1 / l1;
    let mut out = Vec::new();
    let nm = n_max as i64;
    for n in -nm..=nm {
        let k = (chi + I * (std::f64::consts::PI * n as f64)) * scale;
        out.push(DetZero { n, k, lambda: k * k });
    }
    if r > 1.0 {
        // conjugate family χ̄ + iπn is the same set shifted by one index
        let n = -nm - 1;
        let k = (chi + I * (std::f64::consts::PI * n as f64)) * scale;
        out.push(DetZero { n, k, lambda: k * k });
    }
    Ok(out)
}

/// Derivative of `det Λ*` in `k` by a trapezoidal Cauchy integral on a
/// circle of radius `radius`.
pub fn det_derivative_k(medium: &MixedMedium, k: C, radius: f64) -> Result<C> {
    let m = 64;
    let mut acc = C::new(0.0, 0.0);
    for j in 0..m {
        let e = (I * (2.0 * std::f64::consts::PI * j as f64 / m as f64)).exp();
        acc += det_lambda_star_k(medium, k + e * radius)? / e;
    }
    Ok(acc / (m as f64 * radius))
}

fn cauchy_radius(medium: &MixedMedium) -> f64 {
    let n = medium.interior_layers();
    let rate = (1..=n).map(|i| medium.len(i) / medium.sigma[i]).sum::<f64>().max(1e-12);
    0.05 / rate
}

/// Newton polishing of a zero of `det Λ*(k)`.
pub fn polish_zero(medium: &MixedMedium, k0: C) -> Result<C> {
    let radius = cauchy_radius(medium);
    let mut k = k0;
    for _ in 0..60 {
        let f = det_lambda_star_k(medium, k)?;
        let df = det_derivative_k(medium, k, radius)?;
        let step = f / df;
        k -= step;
        if step.norm() <= 1e-15 * (1.0 + k.norm()) {
            return Ok(k);
        }
    }
    let f = det_lambda_star_k(medium, k)?;
    let df = det_derivative_k(medium, k, radius)?;
    if (f / df).norm() <= 1e-12 * (1.0 + k.norm()) {
        return Ok(k);
    }
    Err(Error::Convergence(format!("Newton polishing from {k0} stalled at {k}")))
}

/// Zeros of `det Λ*(k)` in the box `re_min ≤ Re k ≤ re_max`, `|Im k| ≤
/// im_max`, found by Newton from a uniform seed lattice (no closed form used).
pub fn find_det_zeros(medium: &MixedMedium, re_min: f64, re_max: f64, im_max: f64) -> Result<Vec<C>> {
    require(re_min < re_max && im_max > 0.0, || "empty search box".into())?;
    let n = medium.interior_layers();
    let rate = (1..=n).map(|i| medium.len(i) / medium.sigma[i]).sum::<f64>().max(1e-12);
    let h = 0.25 * std::f64::consts::PI / rate;
    let nr = ((re_max - re_min) / h).ceil() as usize + 1;
    let ni = (2.0 * im_max / h).ceil() as usize + 1;
    let seeds: Vec<C> = (0..nr)
        .flat_map(|a| (0..ni).map(move |b| (a, b)))
        .map(|(a, b)| C::new(re_min + (re_max - re_min) * a as f64 / (nr - 1).max(1) as f64, -im_max + 2.0 * im_max * b as f64 / (ni - 1).max(1) as f64))
        .collect();
    let found: Vec<C> = seeds.par_iter().filter_map(|&s| newton_plain(medium, s, h)).collect();
    let margin = 1e-6 * (1.0 + re_min.abs().max(im_max));
    let mut zeros: Vec<C> = Vec::new();
    for z in found {
        let inside = z.re >= re_min - margin && z.re <= re_max + margin && z.im.abs() <= im_max + margin;
        if inside && !zeros.iter().any(|w| (w - z).norm() < 1e-7 * (1.0 + z.norm())) {
            zeros.push(z);
        }
    }
    zeros.sort_by(|a, b| a.im.total_cmp(&b.im));
    Ok(zeros)
}

/// Newton with a central-difference derivative; gives up when a step leaves
/// the neighbourhood of the seed.
fn newton_plain(medium: &MixedMedium, seed: C, reach: f64) -> Option<C> {
    let mut k = seed;
    for _ in 0..80 {
        let f = det_lambda_star_k(medium, k).ok()?;
        let dh = 1e-6 * (1.0 + k.norm());
        let df = (det_lambda_star_k(medium, k + dh).ok()? - det_lambda_star_k(medium, k - dh).ok()?) / (2.0 * dh);
        if df.norm() == 0.0 {
            return None;
        }
        let step = f / df;
        k -= step;
        if (k - seed).norm() > 4.0 * reach {
            return None;
        }
        if step.norm() <= 1e-14 * (1.0 + k.norm()) {
            return Some(k);
        }
    }
    None
}

/// `Res_{λ=λ_n} u_λ(x | x0)` at a zero `k_n` of the determinant, from the
/// determinant-weighted resolvent and `d det/dλ = det′(k)/(2k)`.
pub fn residue(medium: &MixedMedium, x: f64, x0: f64, k_pole: C) -> Result<C> {
    let weighted = MixedSolution::det_weighted(medium, x0, k_pole)?.eval(x);
    let ddet = det_derivative_k(medium, k_pole, cauchy_radius(medium).min(0.1 * k_pole.norm()))?;
    Ok(weighted * 2.0 * k_pole / ddet)
}

/// The same residue as `(1/2πi)∮ u dλ` on a circle of radius `radius`
/// around `λ_n`, staying on the sheet of `k_pole`.
pub fn contour_residue(medium: &MixedMedium, x: f64, x0: f64, k_pole: C, radius: f64) -> Result<C> {
    let lam = k_pole * k_pole;
    let m = 256;
    let mut acc = C::new(0.0, 0.0);
    for j in 0..m {
        let e = (I * (2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64)).exp();
        let k = k_pole * (1.0 + e * radius / lam).sqrt();
        acc += MixedSolution::from_k(medium, x0, k)?.eval(x) * e * radius;
    }
    Ok(acc / m as f64)
}

/// Truncated delta representation at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaValue {
    pub value: f64,
    /// Contribution of the last fifth of the branch-cut range.
    pub truncation: f64,
    /// Determinant zeros examined.
    pub poles_considered: usize,
    /// Zeros on the principal sheet whose residues were added.
    pub poles_on_principal_sheet: usize,
}

/// Branch-cut integrand `(2ω/π) Im u` at `√λ = -iω`.
fn cut_density(sol: &MixedSolution, omega: f64, x: f64) -> f64 {
    2.0 * omega / std::f64::consts::PI * sol.eval(x).im
}

fn cut_panels(medium: &MixedMedium, omega_max: f64, distance: f64) -> usize {
    let smin = medium.sigma.iter().copied().fold(f64::INFINITY, f64::min);
    let span = medium.y[medium.y.len() - 1] - medium.y[0] + distance;
    (omega_max * span / (smin * std::f64::consts::PI)).ceil() as usize + 8
}

/// `(1/πi)∫_0^Ω [u_{e^{-iπ}ω²} - u_{e^{iπ}ω²}] ω dω` plus residues at
/// determinant zeros on the principal sheet. Zeros are located for one
/// interior layer from the closed form; for positive coefficients they all
/// have `Re k < 0`, so the residue sum is empty and is reported as such.
pub fn delta_representation_mixed(medium: &MixedMedium, x: f64, x0: f64, omega_max: f64, residue_count: usize) -> Result<DeltaValue> {
    require(x != x0, || "pointwise evaluation needs x ≠ x0".into())?;
    require(omega_max > 0.0, || "cut range must be positive".into())?;
    let mut poles = Vec::new();
    if residue_count > 0 {
        if medium.interior_layers() != 1 {
            return Err(Error::InvalidInput("pole location is available for one interior layer".into()));
        }
        let mut zs = three_layer_zeros(medium, residue_count)?;
        zs.sort_by(|a, b| a.lambda.norm().total_cmp(&b.lambda.norm()));
        zs.truncate(residue_count);
        for z in zs {
            poles.push(polish_zero(medium, z.k)?);
        }
    }
    let panels = cut_panels(medium, omega_max, (x - x0).abs());
    let integrate = |a: f64, b: f64, count: usize| -> Result<f64> {
        let rule = GlRule::gl20();
        let nodes: Vec<(f64, f64)> = (0..count)
            .flat_map(|p| {
                let lo = a + (b - a) * p as f64 / count as f64;
                let hi = a + (b - a) * (p + 1) as f64 / count as f64;
                rule.mapped(lo, hi).collect::<Vec<_>>()
            })
            .collect();
        let vals: Vec<Result<f64>> = nodes
            .par_iter()
            .map(|&(om, w)| Ok(w * cut_density(&MixedSolution::from_k(medium, x0, C::new(0.0, -om))?, om, x)))
            .collect();
        vals.into_iter().sum()
    };
    let head = integrate(0.0, 0.8 * omega_max, panels)?;
    let tail = integrate(0.8 * omega_max, omega_max, panels.div_ceil(4))?;
    let mut value = head + tail;
    let on_sheet: Vec<C> = poles.iter().copied().filter(|k| k.re > 0.0).collect();
    for &k in &on_sheet {
        value += residue(medium, x, x0, k)?.re;
    }
    Ok(DeltaValue { value, truncation: tail.abs(), poles_considered: poles.len(), poles_on_principal_sheet: on_sheet.len() })
}

/// `∫ g(x) δ_Ω(x, x0) dx` for `g` supported on `[a, b]`: the branch-cut
/// integral applied to `g` (x-integral first, then ω).
pub fn sift(medium: &MixedMedium, g: impl Fn(f64) -> f64 + Sync, support: (f64, f64), x0: f64, omega_max: f64) -> Result<f64> {
    let (a, b) = support;
    require(a < b && omega_max > 0.0, || "empty support or cut range".into())?;
    let mut cuts = vec![a];
    cuts.extend(medium.y.iter().copied().filter(|&v| v > a && v < b));
    if x0 > a && x0 < b {
        cuts.push(x0);
    }
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let smin = medium.sigma.iter().copied().fold(f64::INFINITY, f64::min);
    let rule = GlRule::gl20();
    let mut xs: Vec<(f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        let count = ((w[1] - w[0]) * omega_max / (smin * std::f64::consts::PI)).ceil() as usize + 2;
        for p in 0..count {
            let lo = w[0] + (w[1] - w[0]) * p as f64 / count as f64;
            let hi = w[0] + (w[1] - w[0]) * (p + 1) as f64 / count as f64;
            xs.extend(rule.mapped(lo, hi).map(|(x, wt)| (wt * g(x), x)));
        }
    }
    let dist = (a - x0).abs().max((b - x0).abs());
    let panels = cut_panels(medium, omega_max, dist);
    let omegas: Vec<(f64, f64)> = (0..panels)
        .flat_map(|p| {
            let lo = omega_max * p as f64 / panels as f64;
            let hi = omega_max * (p + 1) as f64 / panels as f64;
            rule.mapped(lo, hi).collect::<Vec<_>>()
        })
        .collect();
    let vals: Vec<Result<f64>> = omegas
        .par_iter()
        .map(|&(om, w)| {
            let sol = MixedSolution::from_k(medium, x0, C::new(0.0, -om))?;
            Ok(w * xs.iter().map(|&(gw, x)| gw * cut_density(&sol, om, x)).sum::<f64>())
        })
        .collect();
    vals.into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn sample() -> MixedMedium {
        MixedMedium::new(vec![-0.4, 0.3, 1.1], vec![1.3, 0.6, 2.1, 0.9]).unwrap()
    }

    #[test]
    fn g_matrix_limits() {
        let lam = c(2.0, 0.5);
        let far = g_matrix(1.0, 2.0, 200.0, lam).unwrap();
        assert!(far.iter().all(|v| v.norm() < 1e-30));
        let same = g_matrix(1.5, 1.5, 0.3, lam).unwrap();
        assert!(same.iter().all(|v| v.norm() == 0.0));
        let a = g_matrix(1.0, 2.0, 0.0, c(1e4, 0.0)).unwrap();
        let b = g_matrix(1.0, 2.0, 0.0, c(4e4, 0.0)).unwrap();
        assert!((a[(0, 1)] / b[(0, 1)] - 2.0).norm() < 1e-12);
        assert!(g_matrix(1.0, 2.0, 0.1, c(-1.0, 0.0)).is_err());
    }

    #[test]
    fn lambda_seq_examples() {
        let m = sample();
        let lam = c(0.7, -0.2);
        assert_eq!(lambda_seq(&m, 2, 2, lam).unwrap(), CMat2::identity());
        let first = lambda_seq(&m, 0, 1, lam).unwrap();
        assert!((first - CMat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(m.s(0), 0.0))).norm() < 1e-15);
        assert!(lambda_seq(&m, 2, 1, lam).is_err());
        // three-layer product in entrywise form
        let t = MixedMedium::three_layer(0.8, 1.4, 2.5, 0.0, 0.9).unwrap();
        let k = lam.sqrt();
        let th = k * (0.9 / 1.4);
        let (sm, s1) = (0.8 / 1.4, 1.4 / 2.5);
        let want = CMat2::new(th.cosh(), th.sinh() * sm, th.sinh() * s1, th.cosh() * (s1 * sm));
        assert!((lambda_seq(&t, 0, 2, lam).unwrap() - want).norm() < 1e-14);
        let d = det_lambda_star(&t, lam).unwrap();
        assert!((d - det_three_layer(0.8, 1.4, 2.5, 0.9, k)).norm() < 1e-14);
    }

    #[test]
    fn uniform_medium_is_free_resolvent() {
        let m = MixedMedium::new(vec![-1.0, 0.0, 0.5], vec![1.7; 4]).unwrap();
        let lam = c(0.9, 1.3);
        let k = lam.sqrt();
        for &x in &[-2.0, -0.5, 0.2, 0.7, 3.0] {
            let u = u_lambda_mixed(&m, x, 0.3, lam).unwrap();
            let want = (-k * ((x - 0.3f64).abs() / 1.7)).exp() / (k * 3.4);
            assert!((u - want).norm() < 1e-14, "{x}");
        }
        // no zeros: det = 2 e^{k l/σ}-type, never vanishes
        let d = det_lambda_star_k(&m, c(-3.0, 2.0)).unwrap();
        let l = 1.5 / 1.7;
        assert!((d - 2.0 * (c(-3.0, 2.0) * l).exp()).norm() < 1e-12);
    }

    #[test]
    fn matching_conditions_and_source_jump() {
        let m = sample();
        let lam = c(1.1, 0.7);
        let x0 = 0.55;
        let sol = MixedSolution::new(&m, x0, lam).unwrap();
        for (i, &yb) in m.y().iter().enumerate() {
            let (ul, dl) = sol.eval_with_derivative(yb);
            let (ur, dr) = sol.eval_with_derivative(yb + 1e-12);
            assert!((ul - ur).norm() < 1e-9 * ul.norm(), "value at y{i}");
            let fl = dl * m.sigma()[i].powi(2);
            let fr = dr * m.sigma()[i + 1].powi(2);
            assert!((fl - fr).norm() < 1e-9 * fl.norm(), "flux at y{i}");
        }
        let h = 1e-7;
        let (_, dl) = sol.eval_with_derivative(x0 - h);
        let (_, dr) = sol.eval_with_derivative(x0 + h);
        let s = m.sigma()[m.layer_of(x0)];
        assert!(((dr - dl) * s * s + 1.0).norm() < 1e-5);
    }

    #[test]
    fn satisfies_ode_away_from_source() {
        let m = sample();
        let lam = c(2.3, -0.4);
        let sol = MixedSolution::new(&m, -0.1, lam).unwrap();
        let h = 1e-4;
        for &x in &[-1.5, -0.25, 0.1, 0.6, 0.9, 1.6] {
            let s = m.sigma()[m.layer_of(x)];
            let d2 = (sol.eval(x + h) - 2.0 * sol.eval(x) + sol.eval(x - h)) / (h * h);
            let r = d2 * s * s - lam * sol.eval(x);
            assert!(r.norm() < 1e-6 * sol.eval(x).norm().max(1e-3), "{x}: {r}");
        }
    }

    #[test]
    fn three_layer_against_direct_linear_solve() {
        // unknowns: A e^{k(x-y0)/σ-}, a cosh + b sinh on the middle layer, D e^{-k(x-y1)/σ+}
        let (sm, s1, sp, y0, y1) = (0.9, 1.6, 0.5, -0.2, 0.7);
        let m = MixedMedium::three_layer(sm, s1, sp, y0, y1).unwrap();
        let lam = c(0.8, 0.6);
        let k = lam.sqrt();
        let x0 = 0.1;
        let part = |x: f64, s: f64| (-(k / s) * (x - x0).abs()).exp() / (k * (2.0 * s));
        let dpart = |x: f64, s: f64| -(k / s) * (x - x0).signum() * part(x, s);
        let th = k * ((y1 - y0) / s1);
        let (ch, sh) = (th.cosh(), th.sinh());
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        #[rustfmt::skip]
        let a = nalgebra::Matrix4::new(
            one, -one, z, z,
            k / sm * sm * sm, z, -(k / s1) * s1 * s1, z,
            z, ch, sh, -one,
            z, (k / s1) * sh * s1 * s1, (k / s1) * ch * s1 * s1, (k / sp) * sp * sp,
        );
        let rhs = nalgebra::Vector4::new(
            part(y0, s1) - part(y0, sm),
            dpart(y0, s1) * s1 * s1 - dpart(y0, sm) * sm * sm,
            part(y1, sp) - part(y1, s1),
            dpart(y1, sp) * sp * sp - dpart(y1, s1) * s1 * s1,
        );
        let v = a.lu().solve(&rhs).unwrap();
        let sol = MixedSolution::new(&m, x0, lam).unwrap();
        assert!((sol.c_minus - v[0]).norm() < 1e-12);
        assert!((sol.layers[0].0 - v[1]).norm() < 1e-12 && (sol.layers[0].1 - v[2]).norm() < 1e-12);
        assert!((sol.d_plus - v[3]).norm() < 1e-12);
        // closed form with the adjugate of the three-layer Λ
        let lm = lambda_seq(&m, 0, 2, lam).unwrap();
        let (p, q) = (lm[(0, 0)] + lm[(0, 1)], lm[(1, 0)] + lm[(1, 1)]);
        let g0 = jump(sm, s1, x0 - y0, k);
        let g1 = jump(s1, sp, x0 - y1, k);
        let t1 = lambda_seq(&m, 1, 2, lam).unwrap();
        let vv = [t1[(0, 0)] * g0[0] + t1[(0, 1)] * g0[1] + g1[0], t1[(1, 0)] * g0[0] + t1[(1, 1)] * g0[1] + g1[1]];
        let det = p + q;
        let cm = -(vv[0] + vv[1]) / det;
        let dp = -(-q * vv[0] + p * vv[1]) / det;
        assert!((cm - sol.c_minus).norm() < 1e-12 && (dp - sol.d_plus).norm() < 1e-12);
    }

    #[test]
    fn decayed_source_gives_small_coefficients() {
        let m = sample();
        let (cm, dp) = solve_boundary_coeffs(&m, -200.0, c(1.0, 0.0)).unwrap();
        assert!(cm.norm() < 1e-25 && dp.norm() < 1e-25);
    }

    #[test]
    fn no_interior_layers() {
        let m = MixedMedium::new(vec![0.0], vec![1.0, 3.0]).unwrap();
        let lam = c(1.5, 0.2);
        assert!(layer_coeffs(&m, 0.4, lam).unwrap().is_empty());
        let u = MixedSolution::new(&m, 0.4, lam).unwrap();
        let (ul, dl) = u.eval_with_derivative(0.0);
        let (ur, dr) = u.eval_with_derivative(1e-15);
        assert!((ul - ur).norm() < 1e-12 && (dl - 9.0 * dr).norm() < 1e-12);
    }

    #[test]
    fn large_arguments_stay_finite() {
        let m = MixedMedium::new(vec![0.0, 30.0, 60.0], vec![1.0, 0.1, 0.2, 1.0]).unwrap();
        let u = u_lambda_mixed(&m, 45.0, 44.0, c(900.0, 0.0)).unwrap();
        assert!(u.is_finite());
        let near = (-(30.0f64 / 0.2)).exp() / (2.0 * 30.0 * 0.2);
        assert!((u.re - near).abs() < 1e-3 * near.abs().max(1e-300));
    }

    #[test]
    fn closed_form_zeros_are_zeros() {
        for &(sm, s1, sp) in &[(0.5, 1.0, 2.0), (2.0, 1.0, 3.0), (0.3, 1.7, 0.4)] {
            let m = MixedMedium::three_layer(sm, s1, sp, 0.0, 1.3).unwrap();
            for z in three_layer_zeros(&m, 6).unwrap() {
                assert!(z.k.re < 0.0, "second sheet");
                let p = polish_zero(&m, z.k).unwrap();
                assert!((p * p - z.lambda).norm() < 1e-9 * z.lambda.norm().max(1.0), "{z:?} vs {p}");
            }
        }
    }

    #[test]
    fn numeric_search_finds_closed_form_zeros() {
        let m = MixedMedium::three_layer(0.5, 1.2, 2.0, 0.0, 0.8).unwrap();
        let cf = three_layer_zeros(&m, 3).unwrap();
        let re = cf[0].k.re;
        let im_max = (3.5 * std::f64::consts::PI) * 1.2 / 0.8;
        let found = find_det_zeros(&m, 2.0 * re, -1e-3, im_max).unwrap();
        assert_eq!(found.len(), cf.len());
        for z in &cf {
            assert!(found.iter().any(|f| (f * f - z.lambda).norm() < 1e-8 * z.lambda.norm().max(1.0)));
        }
    }

    #[test]
    fn residues_agree_with_contour_integrals() {
        let m = MixedMedium::three_layer(0.7, 1.3, 2.2, 0.0, 1.0).unwrap();
        for z in three_layer_zeros(&m, 4).unwrap().iter().filter(|z| z.n != 0) {
            let k = polish_zero(&m, z.k).unwrap();
            let radius = 0.02 * z.lambda.norm();
            let r1 = residue(&m, 0.4, -0.3, k).unwrap();
            let r2 = contour_residue(&m, 0.4, -0.3, k, radius).unwrap();
            assert!((r1 - r2).norm() < 1e-6 * r1.norm().max(1e-12), "{}: {r1} {r2}", z.n);
        }
    }

    #[test]
    fn symmetric_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(1..4);
            let mut y = vec![rng.gen_range(-1.0..0.0)];
            for _ in 0..n {
                let last = *y.last().unwrap();
                y.push(last + rng.gen_range(0.2..1.0));
            }
            let sigma: Vec<f64> = (0..n + 2).map(|_| rng.gen_range(0.3..2.5)).collect();
            let m = MixedMedium::new(y, sigma).unwrap();
            let lam = c(rng.gen_range(0.1..4.0), rng.gen_range(-2.0..2.0));
            let (a, b) = (rng.gen_range(-2.0..3.0), rng.gen_range(-2.0..3.0));
            let uab = u_lambda_mixed(&m, a, b, lam).unwrap();
            let uba = u_lambda_mixed(&m, b, a, lam).unwrap();
            assert!((uab - uba).norm() < 1e-9 * uab.norm(), "{uab} {uba}");
        }
    }

    #[test]
    fn branch_cut_sifts_smooth_functions() {
        let m = MixedMedium::three_layer(0.8, 1.5, 0.6, -0.3, 0.4).unwrap();
        let bump = |x: f64| {
            let u = (x - 0.1) / 0.9;
            if u.abs() >= 1.0 {
                0.0
            } else {
                (1.0 - 1.0 / (1.0 - u * u)).exp()
            }
        };
        for &x0 in &[-0.5, 0.05, 0.3] {
            let v = sift(&m, bump, (-0.8, 1.0), x0, 120.0).unwrap();
            assert!((v - bump(x0)).abs() < 1e-3, "{x0}: {v} vs {}", bump(x0));
        }
    }

    #[test]
    fn pointwise_delta_has_no_principal_poles() {
        let m = MixedMedium::three_layer(0.8, 1.5, 0.6, -0.3, 0.4).unwrap();
        let d = delta_representation_mixed(&m, 0.9, 0.1, 40.0, 5).unwrap();
        assert_eq!(d.poles_considered, 5);
        assert_eq!(d.poles_on_principal_sheet, 0);
        assert!(d.value.is_finite() && d.truncation.is_finite());
        assert!(delta_representation_mixed(&m, 0.1, 0.1, 40.0, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn det_general_matches_closed_form(sm in 0.2f64..3.0, s1 in 0.2f64..3.0, sp in 0.2f64..3.0, l in 0.1f64..2.0,
                                            kr in -3.0f64..3.0, ki in -5.0f64..5.0) {
            let m = MixedMedium::three_layer(sm, s1, sp, 0.0, l).unwrap();
            let k = c(kr, ki);
            let d = det_lambda_star_k(&m, k).unwrap();
            let want = det_three_layer(sm, s1, sp, l, k);
            prop_assert!((d - want).norm() < 1e-12 * want.norm().max(1.0));
        }
    }
}
