//! Strips of `N` layers whose boundaries `y_0(τ) < … < y_N(τ)` move in time,
//! with absorbing outer ends and continuity of `u` and `σ² u_x` inside.
//!
//! The solution at time `τ` is expanded in the eigenbasis of the grid frozen
//! at `τ`. Its coefficients follow exactly from the initial datum, the source
//! and the boundary traces: fluxes `Φ_i = σ² u_x` at every boundary and values
//! `φ_i` at the interior ones. The traces solve a second-kind Volterra system
//! obtained by evaluating the series and its flux at the boundaries.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{require, Error, Result};
use crate::obm::MovingInterface;
use crate::quad::GlRule;
use crate::roots::brent_with_values;
use crate::spectrum::{eigen_residual, find_eigenvalues, project_layer, theta_eval, theta_flux, LayerGrid, ThetaBasis};
use crate::volterra::{solve_moment_form, MomentSystem, TimeGrid};

type Datum = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Source = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Weights below `e^{-DAMPING_CUT}` are dropped from memory integrals.
const DAMPING_CUT: f64 = 40.0;

/// Guard rescan period for eigenvalue continuation.
const RESCAN_EVERY: usize = 16;

/// Moving boundaries and per-layer coefficients `σ_1..σ_N` (zero-based).
#[derive(Debug, Clone)]
pub struct MovingLayerGrid {
    bounds: Vec<MovingInterface>,
    sigma: Vec<f64>,
    horizon: f64,
}

impl MovingLayerGrid {
    /// Checks strict ordering at 257 instants across the common horizon.
    pub fn new(bounds: Vec<MovingInterface>, sigma: Vec<f64>) -> Result<Self> {
        require(!sigma.is_empty() && bounds.len() == sigma.len() + 1, || {
            format!("need N+1 boundaries for N layers, got {} and {}", bounds.len(), sigma.len())
        })?;
        require(sigma.iter().all(|s| s.is_finite() && *s > 0.0), || format!("sigma must be positive: {sigma:?}"))?;
        let horizon = bounds.iter().map(MovingInterface::horizon).fold(f64::INFINITY, f64::min);
        let grid = MovingLayerGrid { bounds, sigma, horizon };
        let samples: Vec<f64> = (0..=256).map(|k| horizon * k as f64 / 256.0).collect();
        grid.check_ordering(&samples)?;
        Ok(grid)
    }

    /// Static boundaries taken from `grid`.
    pub fn fixed(grid: &LayerGrid, horizon: f64) -> Result<Self> {
        let bounds = grid.y().iter().map(|&y| MovingInterface::constant(y, horizon)).collect::<Result<_>>()?;
        Self::new(bounds, grid.sigma().to_vec())
    }

    pub fn layers(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn boundary(&self, i: usize) -> &MovingInterface {
        &self.bounds[i]
    }

    fn check(&self, tau: f64) -> Result<()> {
        if !(0.0..=self.horizon * (1.0 + 1e-12)).contains(&tau) {
            return Err(Error::Horizon { tau, horizon: self.horizon });
        }
        Ok(())
    }

    pub fn y(&self, tau: f64) -> Vec<f64> {
        self.bounds.iter().map(|b| b.y(tau)).collect()
    }

    pub fn y_prime(&self, tau: f64) -> Vec<f64> {
        self.bounds.iter().map(|b| b.y_prime(tau)).collect()
    }

    /// The static grid at `tau`.
    pub fn frozen(&self, tau: f64) -> Result<LayerGrid> {
        self.check(tau)?;
        LayerGrid::new(self.y(tau), self.sigma.clone()).map_err(|e| match e {
            Error::InvalidInput(m) => Error::InvalidInput(format!("at τ = {tau}: {m}")),
            e => e,
        })
    }

    /// Fails at the first instant where the boundaries are not strictly ordered.
    pub fn check_ordering(&self, times: &[f64]) -> Result<()> {
        times.iter().try_for_each(|&t| self.frozen(t).map(|_| ()))
    }
}

/// Initial datum `f`, optional source `g(τ, x)` and the moving grid.
#[derive(Clone)]
pub struct StripProblem {
    pub grid: MovingLayerGrid,
    initial: Datum,
    source: Option<Source>,
}

impl fmt::Debug for StripProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StripProblem").field("grid", &self.grid).field("has_source", &self.source.is_some()).finish()
    }
}

impl StripProblem {
    pub fn new(grid: MovingLayerGrid, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        StripProblem { grid, initial: Arc::new(f), source: None }
    }

    pub fn with_source(mut self, g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.source = Some(Arc::new(g));
        self
    }

    pub fn initial(&self, x: f64) -> f64 {
        (self.initial)(x)
    }

    pub fn source(&self, tau: f64, x: f64) -> f64 {
        self.source.as_ref().map_or(0.0, |g| g(tau, x))
    }
}

/// Samples of the fluxes `Φ_0..Φ_N` and values `φ_0..φ_N` on a time grid.
/// The outer values `φ_0 = φ_N = 0` are stored but never carried as unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceTraces {
    pub times: Vec<f64>,
    pub flux: Vec<Vec<f64>>,
    pub value: Vec<Vec<f64>>,
}

impl InterfaceTraces {
    pub fn zero(times: Vec<f64>, layers: usize) -> Self {
        let n = times.len();
        InterfaceTraces { times, flux: vec![vec![0.0; layers + 1]; n], value: vec![vec![0.0; layers + 1]; n] }
    }

    /// Samples `f(τ) = (Φ, interior φ)` with `N + 1` and `N - 1` entries.
    pub fn from_fn(times: Vec<f64>, layers: usize, f: impl Fn(f64) -> (Vec<f64>, Vec<f64>)) -> Result<Self> {
        require(!times.is_empty() && times.windows(2).all(|w| w[0] < w[1]), || "times must increase strictly".into())?;
        let mut out = InterfaceTraces::zero(times, layers);
        for (k, &t) in out.times.iter().enumerate() {
            let (fl, inner) = f(t);
            require(fl.len() == layers + 1 && inner.len() + 1 == layers, || {
                format!("trace sizes {} and {} do not fit {layers} layers", fl.len(), inner.len())
            })?;
            out.flux[k] = fl;
            out.value[k][1..layers].copy_from_slice(&inner);
        }
        Ok(out)
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    /// Linear interpolation at `tau`.
    pub fn at(&self, tau: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        if !(0.0..=self.horizon() * (1.0 + 1e-12)).contains(&tau) {
            return Err(Error::Horizon { tau, horizon: self.horizon() });
        }
        Ok(self.sample(tau))
    }

    fn sample(&self, tau: f64) -> (Vec<f64>, Vec<f64>) {
        let t = &self.times;
        if t.len() == 1 {
            return (self.flux[0].clone(), self.value[0].clone());
        }
        let j = t.partition_point(|&x| x <= tau).clamp(1, t.len() - 1);
        let w = ((tau - t[j - 1]) / (t[j] - t[j - 1])).clamp(0.0, 1.0);
        let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (1.0 - w) * x + w * y).collect();
        (mix(&self.flux[j - 1], &self.flux[j]), mix(&self.value[j - 1], &self.value[j]))
    }
}

/// Jumps of one frozen basis function at boundary positions `y`:
/// `Ω_i = Θ_i(y_i) - Θ_{i+1}(y_i)` and `ω_i` likewise for the flux `σ²Θ'`,
/// with the layers outside the strip read as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceVectors {
    pub value_jump: Vec<f64>,
    pub flux_jump: Vec<f64>,
}

pub fn interface_vectors(basis: &ThetaBasis, frozen: &LayerGrid, y: &[f64]) -> InterfaceVectors {
    let n = frozen.layers();
    let side = |i: usize, f: &dyn Fn(usize, f64) -> f64| {
        let left = if i >= 1 { f(i - 1, y[i]) } else { 0.0 };
        let right = if i < n { f(i, y[i]) } else { 0.0 };
        left - right
    };
    InterfaceVectors {
        value_jump: (0..=n).map(|i| side(i, &|l, x| basis.layer_value(frozen, l, x))).collect(),
        flux_jump: (0..=n).map(|i| side(i, &|l, x| basis.layer_flux(frozen, l, x))).collect(),
    }
}

/// Boundary contribution `⟨Φ, Ω⟩ + ⟨φ, Y'Ω - ω⟩` at one instant.
fn trace_density(v: &InterfaceVectors, yp: &[f64], flux: &[f64], value: &[f64]) -> f64 {
    (0..flux.len()).map(|i| flux[i] * v.value_jump[i] + value[i] * (yp[i] * v.value_jump[i] - v.flux_jump[i])).sum()
}

/// Panels covering `[0, τ]` for integrands weighted by `e^{-λ²(τ-s)}`: the
/// given breaks, refined geometrically toward `τ` on the scale `1/λ²`, with
/// the region where the weight is below `e^{-40}` dropped.
fn damped_panels(lambda2: f64, tau: f64, breaks: &[f64]) -> Vec<(f64, f64)> {
    let cut = (tau - DAMPING_CUT / lambda2).max(0.0);
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&b| b > cut && b < tau).collect();
    pts.push(cut);
    pts.push(tau);
    let mut d = 0.25 / lambda2;
    while tau - d > cut {
        pts.push(tau - d);
        d *= 2.0;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * tau.max(1e-300));
    pts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// `∫_0^τ e^{-λ²(τ-s)} h(s) ds`.
fn damped(lambda2: f64, tau: f64, breaks: &[f64], mut h: impl FnMut(f64) -> f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    let rule = GlRule::gl10();
    damped_panels(lambda2, tau, breaks)
        .into_iter()
        .map(|(a, b)| rule.integrate(a, b, |s| (-lambda2 * (tau - s)).exp() * h(s)))
        .sum()
}

/// `∫ f Θ` with layers placed by `y(0)` and formulas from `frozen`.
fn initial_projection(problem: &StripProblem, basis: &ThetaBasis, frozen: &LayerGrid) -> f64 {
    let y0 = problem.grid.y(0.0);
    let f = |x: f64| problem.initial(x);
    (0..frozen.layers()).map(|i| project_layer(&f, basis, frozen, i, y0[i], y0[i + 1])).sum()
}

/// `∫_0^τ e^{-λ²(τ-s)} ∫ g(s, ξ) Θ(ξ) dξ ds` with layers placed by `y(s)`.
fn source_projection(problem: &StripProblem, basis: &ThetaBasis, frozen: &LayerGrid, tau: f64, breaks: &[f64]) -> f64 {
    let Some(g) = &problem.source else { return 0.0 };
    damped(basis.lambda * basis.lambda, tau, breaks, |s| {
        let ys = problem.grid.y(s);
        let gs = |x: f64| g(s, x);
        (0..frozen.layers()).map(|i| project_layer(&gs, basis, frozen, i, ys[i], ys[i + 1])).sum()
    })
}

/// `ū(τ, λ)` for the basis function `basis` on the grid `frozen`, which is
/// normally the grid at `tau` but may be any grid with the same layer count.
pub fn image_with_basis(
    problem: &StripProblem,
    traces: &InterfaceTraces,
    basis: &ThetaBasis,
    frozen: &LayerGrid,
    tau: f64,
) -> Result<f64> {
    require(frozen.layers() == problem.grid.layers(), || "basis grid has the wrong layer count".into())?;
    problem.grid.check(tau)?;
    if tau > traces.horizon() * (1.0 + 1e-12) {
        return Err(Error::Horizon { tau, horizon: traces.horizon() });
    }
    let l2 = basis.lambda * basis.lambda;
    let init = (-l2 * tau).exp() * initial_projection(problem, basis, frozen);
    let src = source_projection(problem, basis, frozen, tau, &traces.times);
    let bnd = damped(l2, tau, &traces.times, |s| {
        let v = interface_vectors(basis, frozen, &problem.grid.y(s));
        let (fl, va) = traces.sample(s);
        trace_density(&v, &problem.grid.y_prime(s), &fl, &va)
    });
    Ok(init + src + bnd)
}

/// `ū(τ, λ)` against the basis function of eigenvalue-candidate `lambda` on
/// the grid frozen at `tau`.
pub fn image_baru(problem: &StripProblem, traces: &InterfaceTraces, lambda: f64, tau: f64) -> Result<f64> {
    let frozen = problem.grid.frozen(tau)?;
    let basis = ThetaBasis::new(&frozen, lambda)?;
    image_with_basis(problem, traces, &basis, &frozen, tau)
}

/// First `terms` eigenfunctions of the grid frozen at one instant.
#[derive(Debug, Clone)]
pub struct FrozenBasis {
    pub grid: LayerGrid,
    pub basis: Vec<ThetaBasis>,
}

impl FrozenBasis {
    /// Full scan for the eigenvalues.
    pub fn scan(grid: LayerGrid, terms: usize) -> Result<Self> {
        let basis = find_eigenvalues(&grid, terms)?.iter().map(|r| ThetaBasis::new(&grid, r.lambda)).collect::<Result<_>>()?;
        Ok(FrozenBasis { grid, basis })
    }

    /// Polishes the eigenvalues of `self` on a nearby `grid`, each inside a
    /// bracket of a quarter of the local spacing; `None` when a root left it.
    pub fn continued(&self, grid: LayerGrid) -> Result<Option<Self>> {
        let l: Vec<f64> = self.basis.iter().map(|b| b.lambda).collect();
        let f = |x: f64| eigen_residual(&grid, x).unwrap_or(f64::NAN);
        let mut basis = Vec::with_capacity(l.len());
        for n in 0..l.len() {
            let below = if n == 0 { l[0] } else { l[n] - l[n - 1] };
            let above = if n + 1 < l.len() { l[n + 1] - l[n] } else { below };
            let w = 0.25 * below.min(above);
            let (a, b) = (l[n] - w, l[n] + w);
            let (fa, fb) = (f(a), f(b));
            if !(fa * fb < 0.0) {
                return Ok(None);
            }
            let r = brent_with_values(&f, a, b, fa, fb, 1e-12)?;
            basis.push(ThetaBasis::new(&grid, r.x)?);
        }
        Ok(Some(FrozenBasis { grid, basis }))
    }

    pub fn terms(&self) -> usize {
        self.basis.len()
    }
}

/// Boundary positions quantized to `1e-12` of the grid scale.
fn cache_key(y: &[f64]) -> Vec<i64> {
    let q = 1e-12 * y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    y.iter().map(|v| (v / q).round() as i64).collect()
}

/// Frozen bases at `times`, reusing bases for repeated boundary positions and
/// continuing eigenvalues from the previous instant between guard rescans.
pub fn frozen_bases(grid: &MovingLayerGrid, times: &[f64], terms: usize) -> Result<Vec<Arc<FrozenBasis>>> {
    let mut cache: HashMap<Vec<i64>, Arc<FrozenBasis>> = HashMap::new();
    let mut prev: Option<Arc<FrozenBasis>> = None;
    let mut out = Vec::with_capacity(times.len());
    for (m, &t) in times.iter().enumerate() {
        let frozen = grid.frozen(t)?;
        let key = cache_key(frozen.y());
        let basis = match cache.get(&key) {
            Some(b) => b.clone(),
            None => {
                let polished = match &prev {
                    Some(p) if m % RESCAN_EVERY != 0 => p.continued(frozen.clone())?,
                    _ => None,
                };
                let b = Arc::new(match polished {
                    Some(b) => b,
                    None => FrozenBasis::scan(frozen, terms)?,
                });
                cache.insert(key, b.clone());
                b
            }
        };
        prev = Some(basis.clone());
        out.push(basis);
    }
    Ok(out)
}

/// Series length for a run whose smallest step is `dt_min`: the first `n`
/// with `e^{-λ_n² dt_min} < 1e-12`, from the mean root spacing
/// `π / Σ l_i/σ_i` at `τ = 0`, capped at 200.
pub fn default_terms(grid: &MovingLayerGrid, dt_min: f64) -> Result<usize> {
    require(dt_min > 0.0, || format!("time step must be positive, got {dt_min}"))?;
    let spacing = std::f64::consts::PI / grid.frozen(0.0)?.optical_length();
    let lambda = (-(1e-12f64).ln() / dt_min).sqrt();
    Ok(((lambda / spacing).ceil() as usize + 1).clamp(1, 200))
}

/// Value of a truncated series with the magnitude of its last term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail: f64,
}

/// Series coefficients `ū(τ, λ_n)/N_n` at one instant.
#[derive(Debug, Clone)]
pub struct SeriesSnapshot {
    pub tau: f64,
    pub basis: Arc<FrozenBasis>,
    pub coeffs: Vec<f64>,
}

impl SeriesSnapshot {
    pub fn eval(&self, x: f64) -> SeriesValue {
        self.sum(x, theta_eval)
    }

    /// Flux `σ² u_x`, from the left layer at boundaries.
    pub fn flux(&self, x: f64) -> SeriesValue {
        self.sum(x, theta_flux)
    }

    fn sum(&self, x: f64, f: fn(&ThetaBasis, &LayerGrid, f64) -> f64) -> SeriesValue {
        let g = &self.basis.grid;
        let mut value = 0.0;
        let mut last = 0.0;
        for (b, c) in self.basis.basis.iter().zip(&self.coeffs) {
            last = c * f(b, g, x);
            value += last;
        }
        SeriesValue { value, tail: last.abs() }
    }
}

/// Coefficients at `tau` on a given frozen basis.
pub fn snapshot_with(problem: &StripProblem, traces: &InterfaceTraces, basis: Arc<FrozenBasis>, tau: f64) -> Result<SeriesSnapshot> {
    let coeffs = basis
        .basis
        .par_iter()
        .map(|b| Ok(image_with_basis(problem, traces, b, &basis.grid, tau)? / b.norm))
        .collect::<Result<_>>()?;
    Ok(SeriesSnapshot { tau, basis, coeffs })
}

/// Coefficients at `tau` on the eigenbasis of the grid frozen there.
pub fn snapshot(problem: &StripProblem, traces: &InterfaceTraces, terms: usize, tau: f64) -> Result<SeriesSnapshot> {
    let basis = Arc::new(FrozenBasis::scan(problem.grid.frozen(tau)?, terms)?);
    snapshot_with(problem, traces, basis, tau)
}

/// `u(τ, x)` from the first `terms` eigenfunctions of the grid at `tau`.
pub fn solution_series(problem: &StripProblem, traces: &InterfaceTraces, terms: usize, tau: f64, x: f64) -> Result<SeriesValue> {
    Ok(snapshot(problem, traces, terms, tau)?.eval(x))
}

/// Unknowns `Φ_0..Φ_N` followed by the interior values `φ_1..φ_{N-1}`.
struct StripSystem<'a> {
    problem: &'a StripProblem,
    times: &'a [f64],
    bases: Vec<Arc<FrozenBasis>>,
}

impl StripSystem<'_> {
    fn layers(&self) -> usize {
        self.problem.grid.layers()
    }

    /// Rows: flux of the basis function at every boundary, then its value at
    /// the interior ones.
    fn outputs(&self, b: &ThetaBasis, g: &LayerGrid) -> Vec<f64> {
        let n = self.layers();
        let y = g.y();
        let mut out: Vec<f64> = (0..=n).map(|i| b.layer_flux(g, i.saturating_sub(1).min(n - 1), y[i])).collect();
        out.extend((1..n).map(|i| b.layer_value(g, i - 1, y[i])));
        out
    }

    /// Columns: the factors multiplying each unknown in the trace density.
    fn columns(&self, b: &ThetaBasis, g: &LayerGrid, s: f64) -> Vec<f64> {
        let n = self.layers();
        let v = interface_vectors(b, g, &self.problem.grid.y(s));
        let yp = self.problem.grid.y_prime(s);
        let mut out = v.value_jump.clone();
        out.extend((1..n).map(|i| yp[i] * v.value_jump[i] - v.flux_jump[i]));
        out
    }
}

impl MomentSystem for StripSystem<'_> {
    fn dim(&self) -> usize {
        2 * self.layers()
    }

    fn forcing(&self, m: usize) -> Vec<f64> {
        let tau = self.times[m];
        let fb = &self.bases[m];
        let parts: Vec<Vec<f64>> = fb
            .basis
            .par_iter()
            .map(|b| {
                let l2 = b.lambda * b.lambda;
                let c = (-l2 * tau).exp() * initial_projection(self.problem, b, &fb.grid)
                    + source_projection(self.problem, b, &fb.grid, tau, &self.times[..=m]);
                self.outputs(b, &fb.grid).into_iter().map(|o| o * c / b.norm).collect()
            })
            .collect();
        let mut acc = vec![0.0; self.dim()];
        for p in parts {
            acc.iter_mut().zip(p).for_each(|(a, v)| *a += v);
        }
        acc
    }

    fn moments(&self, m: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let tau = self.times[m];
        let t = &self.times[..=m];
        let fb = &self.bases[m];
        let rule = GlRule::gl10();
        let parts: Vec<Vec<Vec<f64>>> = fb
            .basis
            .par_iter()
            .map(|b| {
                let l2 = b.lambda * b.lambda;
                // hat moments c[j][col] of the column factors
                let mut c = vec![vec![0.0; d]; m + 1];
                for (a, bb) in damped_panels(l2, tau, t) {
                    let k = (t.partition_point(|&x| x <= 0.5 * (a + bb)) - 1).min(m - 1);
                    let h = t[k + 1] - t[k];
                    for (s, w) in rule.mapped(a, bb) {
                        let e = w * (-l2 * (tau - s)).exp();
                        let right = (s - t[k]) / h;
                        for (col, v) in self.columns(b, &fb.grid, s).into_iter().enumerate() {
                            c[k][col] += e * (1.0 - right) * v;
                            c[k + 1][col] += e * right * v;
                        }
                    }
                }
                let out = self.outputs(b, &fb.grid);
                c.into_iter()
                    .map(|cj| {
                        let mut blk = vec![0.0; d * d];
                        for r in 0..d {
                            for col in 0..d {
                                blk[r * d + col] = out[r] * cj[col] / b.norm;
                            }
                        }
                        blk
                    })
                    .collect()
            })
            .collect();
        let mut acc = vec![vec![0.0; d * d]; m + 1];
        for p in parts {
            for (a, blk) in acc.iter_mut().zip(p) {
                a.iter_mut().zip(blk).for_each(|(x, v)| *x += v);
            }
        }
        acc
    }
}

/// Boundary traces on `grid` from the Volterra system with the eigen-sums
/// truncated at `terms`.
pub fn interface_volterra(problem: &StripProblem, terms: usize, grid: &TimeGrid) -> Result<InterfaceTraces> {
    require(terms >= 1, || "need at least one term".into())?;
    let times = grid.nodes();
    require(grid.horizon() <= problem.grid.horizon() * (1.0 + 1e-12), || {
        format!("time grid ends at {} beyond the boundary horizon {}", grid.horizon(), problem.grid.horizon())
    })?;
    let bases = frozen_bases(&problem.grid, times, terms)?;
    let sys = StripSystem { problem, times, bases };
    let sol = solve_moment_form(&sys, grid)?;
    let n = problem.grid.layers();
    InterfaceTraces::from_fn(times.to_vec(), n, |t| {
        let k = times.partition_point(|&x| x < t);
        let v = &sol.values[k];
        (v[..=n].to_vec(), v[n + 1..].to_vec())
    })
}
