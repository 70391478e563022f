//! Discrete-spectrum eigenbasis of the strip problem `(σ² u')' = -λ² u` on
//! `[y_0, y_N]` with absorbing ends and continuity of `u` and `σ² u'` at
//! every interior boundary.
//!
//! On layer `i` an eigenfunction reads `C_i cos(λ̄_i x) + D_i sin(λ̄_i x)` with
//! `λ̄_i = λ/σ_i`.

use rayon::prelude::*;

use crate::error::{require, Error, Result};
use crate::quad::GlRule;
use crate::roots::brent_with_values;
use crate::smallmat::{rotation, stretch, Mat2};

/// Layer boundaries `y_0 < … < y_N` and per-layer coefficients `σ_1..σ_N`
/// (stored zero-based: layer `i` spans `y[i]..y[i+1]` with `sigma[i]`).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrid {
    y: Vec<f64>,
    sigma: Vec<f64>,
}

impl LayerGrid {
    pub fn new(y: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        require(!sigma.is_empty() && y.len() == sigma.len() + 1, || {
            format!("need N+1 boundaries for N layers, got {} and {}", y.len(), sigma.len())
        })?;
        require(y.iter().all(|v| v.is_finite()), || "boundaries must be finite".into())?;
        require(y.windows(2).all(|w| w[0] < w[1]), || format!("boundaries must increase strictly: {y:?}"))?;
        require(sigma.iter().all(|s| s.is_finite() && *s > 0.0), || format!("sigma must be positive: {sigma:?}"))?;
        Ok(LayerGrid { y, sigma })
    }

    /// Single-layer grid on `[a, b]`.
    pub fn uniform(a: f64, b: f64, sigma: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![sigma])
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn layers(&self) -> usize {
        self.sigma.len()
    }

    /// Length of layer `i` (zero-based).
    pub fn len(&self, i: usize) -> f64 {
        self.y[i + 1] - self.y[i]
    }

    /// `s_i = σ_i / σ_{i+1}` between layer `i` and `i+1` (zero-based).
    pub fn s(&self, i: usize) -> f64 {
        self.sigma[i] / self.sigma[i + 1]
    }

    /// Sum of `l_i/σ_i`, the travel time that sets the mean root spacing.
    pub fn optical_length(&self) -> f64 {
        (0..self.layers()).map(|i| self.len(i) / self.sigma[i]).sum()
    }

    /// Layer containing `x`; boundaries belong to the layer on their left.
    pub fn layer_of(&self, x: f64) -> Option<usize> {
        if x < self.y[0] || x > self.y[self.layers()] {
            return None;
        }
        let i = self.y[1..].partition_point(|&b| b < x);
        Some(i.min(self.layers() - 1))
    }
}

/// One eigenfunction: eigenvalue, global-coordinate coefficients and norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaBasis {
    pub lambda: f64,
    pub coeffs: Vec<(f64, f64)>,
    pub norm: f64,
}

impl ThetaBasis {
    pub fn new(grid: &LayerGrid, lambda: f64) -> Result<Self> {
        let coeffs = theta_coeffs(grid, lambda)?;
        let mut b = ThetaBasis { lambda, coeffs, norm: 0.0 };
        b.norm = basis_norm(&b, grid);
        Ok(b)
    }

    pub fn lambda_bar(&self, grid: &LayerGrid, i: usize) -> f64 {
        self.lambda / grid.sigma[i]
    }

    /// Value of layer `i`'s formula at `x`, without the support check.
    pub fn layer_value(&self, grid: &LayerGrid, i: usize, x: f64) -> f64 {
        let k = self.lambda_bar(grid, i);
        let (c, d) = self.coeffs[i];
        let (s, co) = (k * x).sin_cos();
        c * co + d * s
    }

    /// Flux `σ_i² Θ_i'(x)` of layer `i`'s formula.
    pub fn layer_flux(&self, grid: &LayerGrid, i: usize, x: f64) -> f64 {
        let k = self.lambda_bar(grid, i);
        let (c, d) = self.coeffs[i];
        let (s, co) = (k * x).sin_cos();
        grid.sigma[i] * self.lambda * (d * co - c * s)
    }
}

/// Coefficients `(C_i, D_i)` from `C_1 = -sin(λ̄_1 y_0)`, `D_1 = cos(λ̄_1 y_0)`
/// and `[C;D]_{i+1} = R(λ̄_{i+1} y_i) S_{s_i} R(-λ̄_i y_i) [C;D]_i`.
pub fn theta_coeffs(grid: &LayerGrid, lambda: f64) -> Result<Vec<(f64, f64)>> {
    require(lambda > 0.0 && lambda.is_finite(), || format!("lambda must be positive, got {lambda}"))?;
    let n = grid.layers();
    let mut out = Vec::with_capacity(n);
    let k1 = lambda / grid.sigma[0];
    let (s0, c0) = (k1 * grid.y[0]).sin_cos();
    let mut cd = [-s0, c0];
    out.push((cd[0], cd[1]));
    for i in 0..n - 1 {
        let ki = lambda / grid.sigma[i];
        let kn = lambda / grid.sigma[i + 1];
        let yi = grid.y[i + 1];
        let m = rotation(kn * yi)? * stretch(1.0, grid.s(i))? * rotation(-ki * yi)?;
        cd = m.apply(cd);
        out.push((cd[0], cd[1]));
    }
    Ok(out)
}

/// Transfer factors `S_{s_i} R(-λ̄_i l_i)` for the interior layers, in the
/// local value/flux coordinates.
fn local_factors(grid: &LayerGrid, lambda: f64) -> Result<Vec<Mat2>> {
    (0..grid.layers() - 1)
        .map(|i| Ok(stretch(1.0, grid.s(i))? * rotation(-lambda / grid.sigma[i] * grid.len(i))?))
        .collect()
}

/// Eigen-equation residual: `[cos φ_N, sin φ_N] · Λ · [sin φ_1; cos φ_1]`
/// with `φ_i = λ̄_i l_i`; it is the value at `y_N` of the eigenfunction that
/// starts as `sin(λ̄_1 (x - y_0))`.
pub fn eigen_residual(grid: &LayerGrid, lambda: f64) -> Result<f64> {
    require(lambda > 0.0 && lambda.is_finite(), || format!("lambda must be positive, got {lambda}"))?;
    let factors = local_factors(grid, lambda)?;
    let mut v = [0.0, 1.0];
    for f in &factors {
        v = f.apply(v);
    }
    let n = grid.layers() - 1;
    let (s, c) = (lambda / grid.sigma[n] * grid.len(n)).sin_cos();
    Ok(c * v[0] + s * v[1])
}

/// A refined eigenvalue with the bracket that certified it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenRoot {
    pub lambda: f64,
    pub bracket: (f64, f64),
    /// Residual slope fell below 1e-8 at the root (near-tangency).
    pub degenerate: bool,
}

/// Scan start that excludes the trivial root at zero.
pub const SCAN_START: f64 = 1e-9;

/// Scan step: eight samples per fastest half-period.
pub fn scan_step(grid: &LayerGrid) -> f64 {
    let fastest = (0..grid.layers()).map(|i| grid.sigma[i] / grid.len(i)).fold(f64::INFINITY, f64::min);
    std::f64::consts::PI * fastest / 8.0
}

/// First `count` positive eigenvalues, sorted.
pub fn find_eigenvalues(grid: &LayerGrid, count: usize) -> Result<Vec<EigenRoot>> {
    find_roots_of(|l| eigen_residual(grid, l).unwrap_or(f64::NAN), scan_step(grid), grid.optical_length(), count)
}

/// Generic scan-and-refine over `(SCAN_START, window)` with the window sized
/// from the expected root density `optical / π`.
pub(crate) fn find_roots_of(f: impl Fn(f64) -> f64 + Sync, step: f64, optical: f64, count: usize) -> Result<Vec<EigenRoot>> {
    require(count >= 1, || "count must be at least 1".into())?;
    let mean_spacing = std::f64::consts::PI / optical;
    let hi = SCAN_START + 4.0 * (count as f64 + 4.0) * mean_spacing;
    let n_steps = ((hi - SCAN_START) / step).ceil() as usize;
    let chunk = 256usize;
    let n_chunks = n_steps.div_ceil(chunk);
    let mut roots: Vec<EigenRoot> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut found = Vec::new();
            let k0 = c * chunk;
            let k1 = ((c + 1) * chunk).min(n_steps);
            let mut a = SCAN_START + step * k0 as f64;
            let mut fa = f(a);
            for k in k0 + 1..=k1 {
                let b = SCAN_START + step * k as f64;
                let fb = f(b);
                if fa == 0.0 && k > 1 {
                    found.push(Ok(EigenRoot { lambda: a, bracket: (a, a), degenerate: false }));
                } else if fa * fb < 0.0 {
                    found.push(brent_with_values(&f, a, b, fa, fb, 1e-12).map(|r| {
                        let h = 1e-6 * r.x.max(1.0);
                        let slope = (f(r.x + h) - f(r.x - h)) / (2.0 * h);
                        EigenRoot { lambda: r.x, bracket: r.bracket, degenerate: slope.abs() < 1e-8 }
                    }));
                }
                a = b;
                fa = fb;
            }
            found
        })
        .flatten()
        .collect::<Result<Vec<_>>>()?;
    roots.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    roots.dedup_by(|a, b| (a.lambda - b.lambda).abs() < 1e-12 * a.lambda.max(1.0));
    if roots.len() < count {
        return Err(Error::RootShortfall { found: roots.len(), wanted: count, lo: SCAN_START, hi });
    }
    roots.truncate(count);
    Ok(roots)
}

/// Eigenvalues together with their bases.
pub fn eigenbasis(grid: &LayerGrid, count: usize) -> Result<Vec<ThetaBasis>> {
    find_eigenvalues(grid, count)?.iter().map(|r| ThetaBasis::new(grid, r.lambda)).collect()
}

/// Which first-order correction to use in [`lambda_approx`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FirstOrder {
    /// `α sin(βλ⁰) / ((-1)ⁿ(l_2/σ_2 + l_1/σ_1) - α cos(βλ⁰))`, the final displayed formula.
    #[default]
    Displayed,
    /// Same with `α β cos(βλ⁰)` in the denominator, as the linearization implies.
    Linearized,
}

/// Two-layer approximations: order 0 gives `πn/(l_1/σ_1 + l_2/σ_2)`, order 1
/// adds the correction selected by `variant`.
pub fn lambda_approx(sigma1: f64, sigma2: f64, l1: f64, l2: f64, n: usize, order: u8, variant: FirstOrder) -> Result<f64> {
    require(n >= 1, || "index n starts at 1".into())?;
    require(order <= 1, || format!("order must be 0 or 1, got {order}"))?;
    let total = l1 / sigma1 + l2 / sigma2;
    let l0 = std::f64::consts::PI * n as f64 / total;
    if order == 0 {
        return Ok(l0);
    }
    let alpha = (sigma2 - sigma1) / (sigma2 + sigma1);
    let beta = l2 / sigma2 - l1 / sigma1;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let cos_term = match variant {
        FirstOrder::Displayed => alpha * (beta * l0).cos(),
        FirstOrder::Linearized => alpha * beta * (beta * l0).cos(),
    };
    Ok(l0 + alpha * (beta * l0).sin() / (sign * total - cos_term))
}

/// Value of the eigenfunction at `x`; zero outside `[y_0, y_N]`.
pub fn theta_eval(basis: &ThetaBasis, grid: &LayerGrid, x: f64) -> f64 {
    match grid.layer_of(x) {
        Some(i) => basis.layer_value(grid, i, x),
        None => 0.0,
    }
}

/// Flux `σ² Θ'(x)`, taking the left layer at boundaries.
pub fn theta_flux(basis: &ThetaBasis, grid: &LayerGrid, x: f64) -> f64 {
    match grid.layer_of(x) {
        Some(i) => basis.layer_flux(grid, i, x),
        None => 0.0,
    }
}

/// `∫ (p cos kt + q sin kt)² dt` over `[0, len]`.
pub(crate) fn local_square_integral(p: f64, q: f64, k: f64, len: f64) -> f64 {
    let kl = k * len;
    let s = kl.sin();
    0.5 * (p * p + q * q) * len + (p * p - q * q) * (2.0 * kl).sin() / (4.0 * k) + p * q * s * s / k
}

/// `∫_{y_0}^{y_N} Θ² dx` from per-layer closed forms.
pub fn basis_norm(basis: &ThetaBasis, grid: &LayerGrid) -> f64 {
    (0..grid.layers())
        .map(|i| {
            let a = grid.y[i];
            let k = basis.lambda_bar(grid, i);
            let p = basis.layer_value(grid, i, a);
            let q = basis.layer_flux(grid, i, a) / (grid.sigma[i] * basis.lambda);
            local_square_integral(p, q, k, grid.len(i))
        })
        .sum()
}

/// Projection of `f` on layer `i`'s formula of `basis`, by Gauss-Legendre panels.
pub(crate) fn project_layer(f: &(impl Fn(f64) -> f64 + ?Sized), basis: &ThetaBasis, grid: &LayerGrid, i: usize, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let k = basis.lambda_bar(grid, i);
    let panels = ((k * (b - a) / std::f64::consts::PI).ceil() as usize + 2).max(4);
    crate::quad::gl_panels(a, b, panels, |x| f(x) * basis.layer_value(grid, i, x))
}

/// Truncated oscillating Fourier series of a function on the strip.
#[derive(Debug, Clone)]
pub struct OscSeries {
    pub grid: LayerGrid,
    pub basis: Vec<ThetaBasis>,
    pub coeffs: Vec<f64>,
}

impl OscSeries {
    pub fn eval(&self, x: f64) -> f64 {
        self.basis
            .iter()
            .zip(&self.coeffs)
            .map(|(b, c)| c * theta_eval(b, &self.grid, x) / b.norm)
            .sum()
    }
}

/// Coefficients `∫ f Θ_n` for the first `terms` eigenfunctions.
pub fn oscillating_series(f: impl Fn(f64) -> f64 + Sync, grid: &LayerGrid, terms: usize) -> Result<OscSeries> {
    let basis = eigenbasis(grid, terms)?;
    let coeffs = basis
        .par_iter()
        .map(|b| (0..grid.layers()).map(|i| project_layer(&f, b, grid, i, grid.y[i], grid.y[i + 1])).sum())
        .collect();
    Ok(OscSeries { grid: grid.clone(), basis, coeffs })
}

/// `∫ Θ_m Θ_n` by Gauss-Legendre quadrature, for orthogonality checks.
pub fn inner_product_quadrature(a: &ThetaBasis, b: &ThetaBasis, grid: &LayerGrid) -> f64 {
    let rule = GlRule::new(40);
    (0..grid.layers())
        .map(|i| {
            let k = a.lambda_bar(grid, i).max(b.lambda_bar(grid, i));
            let panels = ((k * grid.len(i) / std::f64::consts::PI).ceil() as usize + 1).max(2);
            let h = grid.len(i) / panels as f64;
            (0..panels)
                .map(|p| {
                    let lo = grid.y[i] + h * p as f64;
                    rule.integrate(lo, lo + h, |x| a.layer_value(grid, i, x) * b.layer_value(grid, i, x))
                })
                .sum::<f64>()
        })
        .sum()
}
