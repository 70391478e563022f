//! Two-phase Stefan problem on a slab: ice on `[y_-, y(τ)]`, water on
//! `[y(τ), y_+]`, with the front driven by the latent-heat jump condition.
//!
//! The temperature is split into a piecewise-linear lift `η` that carries the
//! wall temperatures, continuity at the front and the flux jump, plus a
//! modified temperature expanded in the instantaneous two-layer eigenbasis.
//! Projecting onto that basis gives coefficients that depend on the history
//! of the front position `y` and of the modified-temperature flux `Φ` at the
//! front. The front is advanced by solving the interface condition
//! `T(τ, y(τ)) = T_m` for `y(τ)` at every step of a nonuniform time grid.

use std::time::Instant;

use crate::error::{require, Error, Result};
use crate::roots::brent_with_values;
use crate::spectrum::find_roots_of;
use crate::volterra::TimeGrid;

/// Physical parameters in the units of the reference freezing example:
/// lengths in mm, time in s, temperatures in K.
#[derive(Debug, Clone, PartialEq)]
pub struct StefanConfig {
    pub y_minus: f64,
    pub y_plus: f64,
    pub t_s: f64,
    pub t_m: f64,
    pub t_l: f64,
    pub kappa_i: f64,
    pub kappa_w: f64,
    pub rho_i: f64,
    pub rho_w: f64,
    /// Reduced latent heat `L_h / C_a`.
    pub latent: f64,
    /// The product `ρ_I L` as it enters the jump condition (K).
    pub rho_latent: f64,
}

impl StefanConfig {
    /// The reference freezing example: a 49 mm slab, ice wall at 270 K,
    /// water wall at 290 K.
    pub fn reference() -> Self {
        StefanConfig {
            y_minus: 1.0,
            y_plus: 50.0,
            t_s: 270.0,
            t_m: 273.0,
            t_l: 290.0,
            kappa_i: 1.02,
            kappa_w: 0.13,
            rho_i: 917.0,
            rho_w: 997.0,
            latent: 0.054,
            rho_latent: 49.86,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.y_minus,
            self.y_plus,
            self.t_s,
            self.t_m,
            self.t_l,
            self.kappa_i,
            self.kappa_w,
            self.rho_i,
            self.rho_w,
            self.latent,
            self.rho_latent,
        ]
        .iter()
        .all(|v| v.is_finite());
        require(finite, || "stefan parameters must be finite".into())?;
        require(self.y_minus < self.y_plus, || format!("walls out of order: {} >= {}", self.y_minus, self.y_plus))?;
        require(self.kappa_i > 0.0 && self.kappa_w > 0.0, || "diffusivities must be positive".into())?;
        require(self.t_s <= self.t_m && self.t_m <= self.t_l, || {
            format!("freezing needs T_s <= T_m <= T_l, got {} {} {}", self.t_s, self.t_m, self.t_l)
        })?;
        require(self.rho_latent > 0.0, || "latent heat term must be positive".into())
    }

    fn a(&self) -> f64 {
        self.kappa_i.sqrt()
    }

    fn b(&self) -> f64 {
        self.kappa_w.sqrt()
    }

    /// Optical lengths `(l_-, l_+)` of the two phases for a front at `y`.
    pub fn optical(&self, y: f64) -> (f64, f64) {
        ((y - self.y_minus) / self.a(), (self.y_plus - y) / self.b())
    }

    fn check_front(&self, y: f64) -> Result<()> {
        require(y >= self.y_minus && y <= self.y_plus, || {
            format!("front {y} outside [{}, {}]", self.y_minus, self.y_plus)
        })
    }
}

/// Coefficients of the lift `η = A_- + B_- x` on the ice side and
/// `A_+ + B_+ x` on the water side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lift {
    pub a_minus: f64,
    pub b_minus: f64,
    pub a_plus: f64,
    pub b_plus: f64,
}

impl Lift {
    pub fn eval(&self, y: f64, x: f64) -> f64 {
        if x <= y {
            self.a_minus + self.b_minus * x
        } else {
            self.a_plus + self.b_plus * x
        }
    }
}

/// Solves the four lift conditions in closed form for a front at `y` moving
/// with speed `y_prime`.
pub fn lift_coefficients(cfg: &StefanConfig, y: f64, y_prime: f64) -> Result<Lift> {
    cfg.check_front(y)?;
    let (ym, yp, ki, kw, rl) = (cfg.y_minus, cfg.y_plus, cfg.kappa_i, cfg.kappa_w, cfg.rho_latent);
    let (ts, tl) = (cfg.t_s, cfg.t_l);
    let d = ki * (yp - y) + kw * (y - ym);
    let jump = rl * y_prime;
    Ok(Lift {
        a_minus: (-ym * tl * kw + ts * (yp * ki + y * (kw - ki)) + ym * (y - yp) * jump) / d,
        b_minus: ((tl - ts) * kw + (yp - y) * jump) / d,
        a_plus: (-tl * (y * (ki - kw) + ym * kw) + yp * (ts * ki + (y - ym) * jump)) / d,
        b_plus: ((tl - ts) * ki + (ym - y) * jump) / d,
    })
}

/// Instantaneous two-phase spectrum for a front at `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct StefanSpectrum {
    pub y: f64,
    pub l_minus: f64,
    pub l_plus: f64,
    pub lambda: Vec<f64>,
    pub k: Vec<f64>,
    pub norm: Vec<f64>,
}

impl StefanSpectrum {
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// Basis function `n` at `x`, with the two one-sided values averaged at
    /// the front (they agree up to the root accuracy).
    pub fn basis(&self, cfg: &StefanConfig, n: usize, x: f64) -> f64 {
        let lam = self.lambda[n];
        let left = (lam * (x - cfg.y_minus) / cfg.a()).sin();
        let right = self.k[n] * (lam * (cfg.y_plus - x) / cfg.b()).sin();
        if x < self.y {
            left
        } else if x > self.y {
            right
        } else {
            let (sp, sm) = front_weights(cfg, self.y);
            0.5 * (sp * left + sm * right)
        }
    }

    /// Conductive flux `κ ∂_x Θ_n` just left (`left = true`) or right of `x`.
    pub fn basis_flux(&self, cfg: &StefanConfig, n: usize, x: f64, left: bool) -> f64 {
        let lam = self.lambda[n];
        if left {
            lam * cfg.a() * (lam * (x - cfg.y_minus) / cfg.a()).cos()
        } else {
            -lam * cfg.b() * self.k[n] * (lam * (cfg.y_plus - x) / cfg.b()).cos()
        }
    }
}

/// Weights `(s^+, s^-)`: a side that has collapsed onto the front hands its
/// half of the average to the other side.
fn front_weights(cfg: &StefanConfig, y: f64) -> (f64, f64) {
    let sp = if y == cfg.y_plus { 2.0 } else { 1.0 };
    let sm = if y == cfg.y_minus { 2.0 } else { 1.0 };
    (sp, sm)
}

fn eigen_function(cfg: &StefanConfig, y: f64) -> impl Fn(f64) -> f64 + Sync {
    let (lm, lp) = cfg.optical(y);
    let (a, b) = (cfg.a(), cfg.b());
    move |l: f64| a * (l * lm).cos() * (l * lp).sin() + b * (l * lm).sin() * (l * lp).cos()
}

/// The first `count` eigenvalues for a front at `y`. Every positive root of
/// the flux-matching equation is admissible; with the front on the ice wall
/// they are `nπ/l_+`.
pub fn stefan_eigenvalues(cfg: &StefanConfig, y: f64, count: usize) -> Result<Vec<f64>> {
    cfg.validate()?;
    cfg.check_front(y)?;
    require(count >= 1, || "count must be at least 1".into())?;
    let (lm, lp) = cfg.optical(y);
    if lm == 0.0 || lp == 0.0 {
        let l = lm.max(lp);
        return Ok((1..=count).map(|n| n as f64 * std::f64::consts::PI / l).collect());
    }
    let step = std::f64::consts::PI / (16.0 * lm.max(lp));
    let roots = find_roots_of(eigen_function(cfg, y), step, lm + lp, count)?;
    Ok(roots.into_iter().map(|r| r.lambda).collect())
}

/// Amplitude of the water-side sine. The sine ratio is used where it is well
/// conditioned; at eigenvalues the flux identity gives the same number
/// without the cancellation, including the limit where the ice layer
/// vanishes.
pub fn k_factor(cfg: &StefanConfig, y: f64, lambda: f64) -> Result<f64> {
    cfg.check_front(y)?;
    let (lm, lp) = cfg.optical(y);
    let (a, b) = (cfg.a(), cfg.b());
    let (s1, c1) = (lambda * lm).sin_cos();
    let (s2, c2) = (lambda * lp).sin_cos();
    if s2.abs() > c2.abs() {
        return Ok(s1 / s2);
    }
    let g = a * c1 * s2 + b * s1 * c2;
    if g.abs() <= 1e-8 * (a + b) {
        return Ok(-a * c1 / (b * c2));
    }
    if s2.abs() < 1e-12 {
        return Err(Error::Singular(format!("K has a pole at lambda = {lambda} (sin(lambda l_+) = 0)")));
    }
    Ok(s1 / s2)
}

/// Residual of the flux identity `√κ_I cos(λ l_-) + √κ_W K cos(λ l_+) = 0`,
/// relative to `√κ_I + √κ_W`.
pub fn cos_identity_residual(cfg: &StefanConfig, y: f64, lambda: f64, k: f64) -> f64 {
    let (lm, lp) = cfg.optical(y);
    (cfg.a() * (lambda * lm).cos() + cfg.b() * k * (lambda * lp).cos()).abs() / (cfg.a() + cfg.b())
}

/// Eigenvalues, amplitudes and closed-form norms for a front at `y`.
pub fn stefan_spectrum(cfg: &StefanConfig, y: f64, count: usize) -> Result<StefanSpectrum> {
    let lambda = stefan_eigenvalues(cfg, y, count)?;
    let (lm, lp) = cfg.optical(y);
    let k = lambda.iter().map(|&l| k_factor(cfg, y, l)).collect::<Result<Vec<_>>>()?;
    let norm = k.iter().map(|&k| 0.5 * lm * cfg.a() + 0.5 * k * k * lp * cfg.b()).collect();
    Ok(StefanSpectrum { y, l_minus: lm, l_plus: lp, lambda, k, norm })
}

/// Per-step record of the front and of the series that represents the
/// temperature at that time.
#[derive(Debug, Clone, PartialEq)]
pub struct StefanStep {
    pub tau: f64,
    pub y: f64,
    pub y_prime: f64,
    /// Flux `κ_I ∂_x` of the modified temperature at the front.
    pub phi: f64,
    pub lift: Lift,
    pub spectrum: StefanSpectrum,
    /// Initial and wall part of each coefficient.
    pub s: Vec<f64>,
    /// History part of each coefficient.
    pub r: Vec<f64>,
    /// `|T(τ, y(τ)) - T_m|` in K.
    pub residual: f64,
    pub wall_seconds: f64,
}

impl StefanStep {
    fn coeff(&self, n: usize) -> f64 {
        (self.s[n] + self.r[n]) / self.spectrum.norm[n]
    }
}

/// Time-stepping options; the defaults are the reference run.
#[derive(Debug, Clone, PartialEq)]
pub struct StefanOptions {
    pub terms: usize,
    pub h0: f64,
    pub h_max: f64,
    pub ratio: f64,
    pub horizon: f64,
    /// Largest τ at which the small-time theta form is offered.
    pub small_time: f64,
}

impl Default for StefanOptions {
    fn default() -> Self {
        StefanOptions { terms: 50, h0: 0.01, h_max: 15.0, ratio: 1.2, horizon: 1000.0, small_time: 0.1 }
    }
}

impl StefanOptions {
    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::geometric(self.h0, self.h_max, self.ratio, self.horizon)
    }
}

/// Accepted steps, starting from the liquid slab at `τ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StefanState {
    pub config: StefanConfig,
    pub terms: usize,
    pub steps: Vec<StefanStep>,
}

impl StefanState {
    /// The initial state: front on the ice wall, `y′(0) = 0`, `Φ(0) = 0`.
    pub fn new(cfg: &StefanConfig, terms: usize) -> Result<Self> {
        cfg.validate()?;
        require(terms >= 1, || "at least one term is needed".into())?;
        let y = cfg.y_minus;
        let spectrum = stefan_spectrum(cfg, y, terms)?;
        let lift = lift_coefficients(cfg, y, 0.0)?;
        let s = initial_terms(cfg, &spectrum, &lift, 0.0);
        let step = StefanStep {
            tau: 0.0,
            y,
            y_prime: 0.0,
            phi: 0.0,
            lift,
            r: vec![0.0; terms],
            s,
            spectrum,
            residual: 0.0,
            wall_seconds: 0.0,
        };
        Ok(StefanState { config: cfg.clone(), terms, steps: vec![step] })
    }

    pub fn last(&self) -> &StefanStep {
        self.steps.last().expect("state holds the initial step")
    }

    pub fn times(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.tau).collect()
    }

    pub fn y_trace(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.y).collect()
    }

    pub fn phi_trace(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.phi).collect()
    }

    pub fn horizon(&self) -> f64 {
        self.last().tau
    }

    /// Front position and speed at `tau`, interpolated linearly between
    /// accepted steps.
    pub fn front_at(&self, tau: f64) -> Result<(f64, f64)> {
        if !(0.0..=self.horizon() * (1.0 + 1e-14)).contains(&tau) {
            return Err(Error::Horizon { tau, horizon: self.horizon() });
        }
        let j = self.steps.partition_point(|s| s.tau < tau).max(1).min(self.steps.len() - 1);
        let (p, q) = (&self.steps[j - 1], &self.steps[j]);
        let w = (tau - p.tau) / (q.tau - p.tau);
        Ok((p.y + w * (q.y - p.y), p.y_prime + w * (q.y_prime - p.y_prime)))
    }

    fn step_index(&self, tau: f64) -> Option<usize> {
        let j = self.steps.partition_point(|s| s.tau < tau - 1e-12 * tau.max(1.0));
        (j < self.steps.len() && (self.steps[j].tau - tau).abs() <= 1e-12 * tau.max(1.0)).then_some(j)
    }
}

/// The part of the coefficients that comes from the initial data and the
/// current lift.
fn initial_terms(cfg: &StefanConfig, spec: &StefanSpectrum, lift: &Lift, tau: f64) -> Vec<f64> {
    let (a, b) = (cfg.a(), cfg.b());
    let span = (cfg.y_plus - cfg.y_minus) / b;
    (0..spec.len())
        .map(|n| {
            let (lam, k) = (spec.lambda[n], spec.k[n]);
            let walls = a * (cfg.t_l - cfg.t_s) + (cfg.t_m - cfg.t_l) * (a + b * k * (lam * span).cos());
            let lifted = (lift.b_minus * cfg.kappa_i * (lam * spec.l_minus).sin()
                - lift.b_plus * cfg.kappa_w * k * (lam * spec.l_plus).sin())
                / lam;
            (-tau * lam * lam).exp() / lam * (walls - lifted)
        })
        .collect()
}

/// Integrand brackets at a history point `(y_s, B_-(s), B_+(s), Φ(s))`
/// evaluated against the basis at time `τ`, without the damping factor.
/// Returns the lift part and the flux part separately.
fn history_brackets(cfg: &StefanConfig, spec: &StefanSpectrum, lift: &Lift, past: &StefanStep, n: usize) -> (f64, f64) {
    let (lam, k) = (spec.lambda[n], spec.k[n]);
    let sm = (lam * (past.y - cfg.y_minus) / cfg.a()).sin();
    let sp = (lam * (cfg.y_plus - past.y) / cfg.b()).sin();
    let sm_now = (lam * spec.l_minus).sin();
    let sp_now = (lam * spec.l_plus).sin();
    let lifted = cfg.kappa_i * (past.lift.b_minus * sm - lift.b_minus * sm_now)
        - k * cfg.kappa_w * (past.lift.b_plus * sp - lift.b_plus * sp_now);
    (lifted, sm - k * sp)
}

/// Trapezoid weights on the history nodes followed by `tau`.
fn trapezoid_weights(history: &[StefanStep], tau: f64) -> Vec<f64> {
    let t: Vec<f64> = history.iter().map(|s| s.tau).chain(std::iter::once(tau)).collect();
    let mut w = vec![0.0; t.len()];
    for j in 0..t.len() - 1 {
        let h = t[j + 1] - t[j];
        w[j] += 0.5 * h;
        w[j + 1] += 0.5 * h;
    }
    w
}

/// Coefficient pieces at `tau` for a front at `y` moving with `y_prime`:
/// `(S, R_lift, R_flux)`. The integrand vanishes at `s = τ`, so only the
/// history nodes contribute.
fn coefficient_parts(
    cfg: &StefanConfig,
    history: &[StefanStep],
    tau: f64,
    spec: &StefanSpectrum,
    lift: &Lift,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let s = initial_terms(cfg, spec, lift, tau);
    let w = trapezoid_weights(history, tau);
    let mut r_lift = vec![0.0; spec.len()];
    let mut r_flux = vec![0.0; spec.len()];
    for (past, &wj) in history.iter().zip(&w) {
        for n in 0..spec.len() {
            let lam = spec.lambda[n];
            let damp = wj * (-(tau - past.tau) * lam * lam).exp();
            let (lifted, flux) = history_brackets(cfg, spec, lift, past, n);
            r_lift[n] += damp * lifted;
            r_flux[n] += damp * past.phi * flux;
        }
    }
    (s, r_lift, r_flux)
}

/// Backward-difference front speed for a candidate position `y` at `tau`.
fn front_speed(history: &[StefanStep], tau: f64, y: f64) -> f64 {
    let k = history.len();
    let last = &history[k - 1];
    let h1 = tau - last.tau;
    if k < 2 {
        return (y - last.y) / h1;
    }
    let prev = &history[k - 2];
    let h2 = last.tau - prev.tau;
    let c0 = (2.0 * h1 + h2) / (h1 * (h1 + h2));
    let c1 = -(h1 + h2) / (h1 * h2);
    let c2 = h1 / (h2 * (h1 + h2));
    c0 * y + c1 * last.y + c2 * prev.y
}

struct Candidate {
    y_prime: f64,
    lift: Lift,
    spectrum: StefanSpectrum,
    s: Vec<f64>,
    r: Vec<f64>,
    residual: f64,
}

fn candidate(cfg: &StefanConfig, history: &[StefanStep], tau: f64, y: f64, terms: usize) -> Result<Candidate> {
    let y_prime = front_speed(history, tau, y);
    let lift = lift_coefficients(cfg, y, y_prime)?;
    let spectrum = stefan_spectrum(cfg, y, terms)?;
    let (s, r_lift, r_flux) = coefficient_parts(cfg, history, tau, &spectrum, &lift);
    let r: Vec<f64> = r_lift.iter().zip(&r_flux).map(|(a, b)| a + b).collect();
    let series: f64 = (0..spectrum.len())
        .map(|n| (s[n] + r[n]) / spectrum.norm[n] * (spectrum.lambda[n] * spectrum.l_minus).sin())
        .sum();
    let residual = lift.eval(y, y) + series - cfg.t_m;
    Ok(Candidate { y_prime, lift, spectrum, s, r, residual })
}

/// Advances the state by `h`: solves the interface condition for the new
/// front position by a bracketed root search, then evaluates the flux.
pub fn step(state: &mut StefanState, h: f64) -> Result<()> {
    require(h > 0.0 && h.is_finite(), || format!("time step must be positive, got {h}"))?;
    let start = Instant::now();
    let cfg = state.config.clone();
    let terms = state.terms;
    let history = &state.steps;
    let tau = state.last().tau + h;
    let y0 = state.last().y;
    let resid = |y: f64| candidate(&cfg, history, tau, y, terms).map(|c| c.residual);

    let lo = (y0 + 1e-12).min(cfg.y_plus);
    let f_lo = resid(lo)?;
    let mut width = if history.len() > 1 {
        3.0 * (y0 - history[history.len() - 2].y)
    } else {
        0.05
    }
    .max(1e-6);
    let mut hi;
    let mut f_hi;
    loop {
        hi = (y0 + width).min(cfg.y_plus);
        f_hi = resid(hi)?;
        if f_lo * f_hi <= 0.0 {
            break;
        }
        if hi >= cfg.y_plus {
            return Err(Error::Convergence(format!("front root not bracketed in [{lo}, {}] at tau = {tau}", cfg.y_plus)));
        }
        width *= 2.0;
    }
    let failed = std::cell::Cell::new(None);
    let f = |y: f64| match resid(y) {
        Ok(v) => v,
        Err(e) => {
            failed.set(Some(e));
            f64::NAN
        }
    };
    let root = brent_with_values(&f, lo, hi, f_lo, f_hi, 1e-11);
    if let Some(e) = failed.take() {
        return Err(e);
    }
    let y = root?.x;
    let c = candidate(&cfg, history, tau, y, terms)?;
    let phi: f64 = (0..terms)
        .map(|n| {
            let lam = c.spectrum.lambda[n];
            (c.s[n] + c.r[n]) / c.spectrum.norm[n] * lam * cfg.a() * (lam * c.spectrum.l_minus).cos()
        })
        .sum();
    if !phi.is_finite() || !y.is_finite() {
        return Err(Error::Convergence(format!("non-finite front state at tau = {tau}")));
    }
    state.steps.push(StefanStep {
        tau,
        y,
        y_prime: c.y_prime,
        phi,
        lift: c.lift,
        spectrum: c.spectrum,
        s: c.s,
        r: c.r,
        residual: c.residual.abs(),
        wall_seconds: start.elapsed().as_secs_f64(),
    });
    Ok(())
}

/// Runs the solver over every node of `grid`.
pub fn run_on(cfg: &StefanConfig, terms: usize, grid: &TimeGrid) -> Result<StefanState> {
    let mut state = StefanState::new(cfg, terms)?;
    for w in grid.nodes().windows(2) {
        step(&mut state, w[1] - w[0])?;
    }
    Ok(state)
}

pub fn run(cfg: &StefanConfig, opts: &StefanOptions) -> Result<StefanState> {
    run_on(cfg, opts.terms, &opts.grid()?)
}

/// The coefficient pieces `(S_n, R_n, N_n)` stored at step `k`.
pub fn series_terms(state: &StefanState, k: usize, n: usize) -> Result<(f64, f64, f64)> {
    let step = state
        .steps
        .get(k)
        .ok_or_else(|| Error::InvalidInput(format!("step {k} not computed ({} available)", state.steps.len())))?;
    require(n < state.terms, || format!("term {n} beyond the {} kept", state.terms))?;
    Ok((step.s[n], step.r[n], step.spectrum.norm[n]))
}

/// Coefficients and spectrum at an arbitrary `tau` inside the run.
fn series_at(state: &StefanState, tau: f64) -> Result<(f64, Lift, StefanSpectrum, Vec<f64>)> {
    if let Some(j) = state.step_index(tau) {
        let st = &state.steps[j];
        let c = (0..state.terms).map(|n| st.coeff(n)).collect();
        return Ok((st.y, st.lift, st.spectrum.clone(), c));
    }
    let (y, y_prime) = state.front_at(tau)?;
    let cfg = &state.config;
    let past = state.steps.partition_point(|s| s.tau < tau);
    let history = &state.steps[..past];
    let lift = lift_coefficients(cfg, y, y_prime)?;
    let spectrum = stefan_spectrum(cfg, y, state.terms)?;
    let (s, rl, rf) = coefficient_parts(cfg, history, tau, &spectrum, &lift);
    let c = (0..state.terms).map(|n| (s[n] + rl[n] + rf[n]) / spectrum.norm[n]).collect();
    Ok((y, lift, spectrum, c))
}

/// Temperature in K. At `τ = 0` this is the liquid initial state `T_l`.
pub fn temperature(state: &StefanState, tau: f64, x: f64) -> Result<f64> {
    let cfg = &state.config;
    require(x >= cfg.y_minus && x <= cfg.y_plus, || format!("x = {x} outside the slab"))?;
    if tau == 0.0 {
        return Ok(cfg.t_l);
    }
    let (y, lift, spectrum, c) = series_at(state, tau)?;
    let series: f64 = (0..spectrum.len()).map(|n| c[n] * spectrum.basis(cfg, n, x)).sum();
    Ok(lift.eval(y, x) + series)
}

/// One-sided conductive fluxes `(κ_I ∂_x T|_{y-0}, κ_W ∂_x T|_{y+0})` at the
/// front, differentiated term by term.
pub fn front_fluxes(state: &StefanState, tau: f64) -> Result<(f64, f64)> {
    let cfg = &state.config;
    let (y, lift, spectrum, c) = series_at(state, tau)?;
    let mut left = cfg.kappa_i * lift.b_minus;
    let mut right = cfg.kappa_w * lift.b_plus;
    for (n, cn) in c.iter().enumerate() {
        left += cn * spectrum.basis_flux(cfg, n, y, true);
        right += cn * spectrum.basis_flux(cfg, n, y, false);
    }
    Ok((left, right))
}

/// Forcing terms `(f_1, f_2)` of the two Volterra equations at `tau` for a
/// front at `y`: everything except the `Φ` history.
pub fn forcing(state: &StefanState, tau: f64, y: f64, y_prime: f64) -> Result<(f64, f64)> {
    let cfg = &state.config;
    let past = state.steps.partition_point(|s| s.tau < tau);
    let history = &state.steps[..past];
    let lift = lift_coefficients(cfg, y, y_prime)?;
    let spec = stefan_spectrum(cfg, y, state.terms)?;
    let (s, rl, _) = coefficient_parts(cfg, history, tau, &spec, &lift);
    let (mut f1, mut f2) = (0.0, cfg.t_m - lift.eval(y, y));
    for n in 0..spec.len() {
        let c = (s[n] + rl[n]) / spec.norm[n];
        let lam = spec.lambda[n];
        f1 -= c * lam * cfg.a() * (lam * spec.l_minus).cos();
        f2 -= c * spec.basis(cfg, n, y);
    }
    Ok((f1, f2))
}

/// Kernels `(𝒦_1, 𝒦_2)` coupling `Φ(s)` at a past front position `y_s` to
/// the flux and temperature equations at `tau` for a front at `y`.
pub fn kernels(cfg: &StefanConfig, spec: &StefanSpectrum, tau: f64, s: f64, y_s: f64) -> (f64, f64) {
    let (mut k1, mut k2) = (0.0, 0.0);
    for n in 0..spec.len() {
        let (lam, k) = (spec.lambda[n], spec.k[n]);
        let bracket =
            (lam * (y_s - cfg.y_minus) / cfg.a()).sin() - k * (lam * (cfg.y_plus - y_s) / cfg.b()).sin();
        let w = (-(tau - s) * lam * lam).exp() * bracket / spec.norm[n];
        k1 += w * lam * cfg.a() * (lam * spec.l_minus).cos();
        k2 += w * spec.basis(cfg, n, spec.y);
    }
    (k1, k2)
}

/// Third Jacobi theta function `1 + 2 Σ ω^{n²} cos(2nz)` for `|ω| < 1`.
pub fn theta3(z: f64, omega: f64) -> Result<f64> {
    require(omega.abs() < 1.0, || format!("theta needs |omega| < 1, got {omega}"))?;
    let mut sum = 1.0;
    let mut n = 1u32;
    loop {
        let term = omega.powi((n * n) as i32);
        if term.abs() < 1e-18 || n > 10_000 {
            break;
        }
        sum += 2.0 * term * (2.0 * n as f64 * z).cos();
        n += 1;
    }
    Ok(sum)
}

/// Small-time flux approximation at `x`: the leading coefficient behaviour
/// with eigenvalues `2πn/l_-` summed in closed form through `θ_3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallTime {
    pub omega: f64,
    pub theta_form: f64,
    pub direct_sum: f64,
}

pub fn small_time_theta(state: &StefanState, tau: f64, x: f64, max_tau: f64) -> Result<SmallTime> {
    require(tau > 0.0, || format!("small-time form needs tau > 0, got {tau}"))?;
    require(tau <= max_tau, || format!("tau = {tau} beyond the small-time threshold {max_tau}"))?;
    let cfg = &state.config;
    let (y, _) = state.front_at(tau)?;
    let (lm, lp0) = (cfg.optical(y).0, cfg.optical(cfg.y_minus).1);
    require(lm > 0.0, || "front has not left the wall".into())?;
    let (a, b) = (cfg.a(), cfg.b());
    let k0 = -a / b;
    let n0 = 0.5 * k0 * k0 * lp0 * b;
    let (sp, sm) = front_weights(cfg, y);
    let omega = (-4.0 * std::f64::consts::PI.powi(2) * tau / (lm * lm)).exp();
    let z_minus = std::f64::consts::PI * (x - cfg.y_minus) / (y - cfg.y_minus);
    let z_plus = std::f64::consts::PI * (cfg.y_plus - x) / (cfg.y_plus - y);
    let scale = a * (cfg.t_l - cfg.t_s) / (2.0 * n0);
    let theta_form =
        scale * 0.5 * (sp * a * (theta3(z_minus, omega)? - 1.0) - sm * b * k0 * (theta3(z_plus, omega)? - 1.0));
    let mut direct_sum = 0.0;
    for n in 1..=10_000u32 {
        let damp = omega.powi((n * n) as i32);
        if damp < 1e-18 {
            break;
        }
        let m = 2.0 * n as f64;
        direct_sum += damp * (sp * a * (m * z_minus).cos() - sm * b * k0 * (m * z_plus).cos());
    }
    Ok(SmallTime { omega, theta_form, direct_sum: scale * direct_sum })
}

/// Similarity constant `μ` of the semi-infinite two-phase problem, with the
/// front at `y_- + 2μ√τ`. Used as an independent check on early times.
pub fn similarity_constant(cfg: &StefanConfig) -> Result<f64> {
    cfg.validate()?;
    let (a, b) = (cfg.a(), cfg.b());
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let g = |mu: f64| {
        a * (cfg.t_m - cfg.t_s) * (-mu * mu / cfg.kappa_i).exp() / (sqrt_pi * libm::erf(mu / a))
            - b * (cfg.t_l - cfg.t_m) * (-mu * mu / cfg.kappa_w).exp() / (sqrt_pi * libm::erfc(mu / b))
            - cfg.rho_latent * mu
    };
    let mut hi = 1e-3 * a.min(b);
    while g(hi) > 0.0 {
        hi *= 2.0;
        require(hi < 100.0 * a.max(b), || "similarity constant not bracketed".into())?;
    }
    Ok(crate::roots::brent(g, 1e-8, hi, 1e-14)?.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn short_run(horizon: f64, terms: usize) -> StefanState {
        let opts = StefanOptions { terms, horizon, ..Default::default() };
        run(&StefanConfig::reference(), &opts).unwrap()
    }

    #[test]
    fn lift_satisfies_its_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mut cfg = StefanConfig::reference();
            cfg.kappa_i = rng.gen_range(0.1..2.0);
            cfg.kappa_w = rng.gen_range(0.05..1.0);
            cfg.t_s = rng.gen_range(250.0..272.0);
            cfg.t_l = rng.gen_range(274.0..300.0);
            let y = rng.gen_range(cfg.y_minus..cfg.y_plus);
            let yp = rng.gen_range(-1.0..1.0);
            let l = lift_coefficients(&cfg, y, yp).unwrap();
            let scale = cfg.t_l.abs();
            assert!((l.eval(y, cfg.y_minus) - cfg.t_s).abs() < 1e-10 * scale);
            assert!((l.a_plus + l.b_plus * cfg.y_plus - cfg.t_l).abs() < 1e-10 * scale);
            assert!((l.a_minus + l.b_minus * y - l.a_plus - l.b_plus * y).abs() < 1e-10 * scale);
            let jump = cfg.kappa_i * l.b_minus - cfg.kappa_w * l.b_plus - cfg.rho_latent * yp;
            assert!(jump.abs() < 1e-10 * (1.0 + cfg.rho_latent), "{jump}");
        }
    }

    #[test]
    fn isothermal_lift_is_constant() {
        let mut cfg = StefanConfig::reference();
        cfg.t_s = 273.0;
        cfg.t_l = 273.0;
        let l = lift_coefficients(&cfg, 7.0, 0.0).unwrap();
        for x in [1.0, 5.0, 7.0, 20.0, 50.0] {
            assert!((l.eval(7.0, x) - 273.0).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_wall_temperatures_give_a_flat_initial_lift() {
        let mut cfg = StefanConfig::reference();
        cfg.t_s = cfg.t_l;
        cfg.t_m = cfg.t_l;
        let l = lift_coefficients(&cfg, cfg.y_minus, 0.0).unwrap();
        assert_eq!(l.b_minus, 0.0);
        assert_eq!(l.b_plus, 0.0);
        assert!((l.a_minus - cfg.t_l).abs() < 1e-12 && (l.a_plus - cfg.t_l).abs() < 1e-12);
    }

    #[test]
    fn spectrum_satisfies_the_flux_identity() {
        let cfg = StefanConfig::reference();
        for y in [1.0 + 1e-6, 1.05, 3.0, 10.0, 30.0, 49.9] {
            let spec = stefan_spectrum(&cfg, y, 50).unwrap();
            assert!(spec.lambda.windows(2).all(|w| w[0] < w[1]));
            for n in 0..50 {
                let r = cos_identity_residual(&cfg, y, spec.lambda[n], spec.k[n]);
                assert!(r < 1e-9, "y {y} n {n}: {r}");
                let cont = spec.basis(&cfg, n, y - 1e-13) - spec.basis(&cfg, n, y + 1e-13);
                assert!(cont.abs() < 1e-8 * spec.k[n].abs().max(1.0), "y {y} n {n}: {cont}");
            }
        }
    }

    #[test]
    fn spectrum_is_orthogonal() {
        let cfg = StefanConfig::reference();
        let y = 6.0;
        let spec = stefan_spectrum(&cfg, y, 8).unwrap();
        let rule = crate::quad::GlRule::new(64);
        let inner = |m: usize, n: usize| {
            let f = |x: f64| spec.basis(&cfg, m, x) * spec.basis(&cfg, n, x);
            let left: f64 = rule.mapped(cfg.y_minus, y).map(|(x, w)| w * f(x)).sum::<f64>();
            let right: f64 = (0..16)
                .map(|p| {
                    let a = y + (cfg.y_plus - y) * p as f64 / 16.0;
                    let b = y + (cfg.y_plus - y) * (p + 1) as f64 / 16.0;
                    rule.mapped(a, b).map(|(x, w)| w * f(x)).sum::<f64>()
                })
                .sum::<f64>();
            left + right
        };
        for m in 0..8 {
            assert!((inner(m, m) - spec.norm[m]).abs() < 1e-8 * spec.norm[m]);
            for n in 0..m {
                assert!(inner(m, n).abs() < 1e-8 * (spec.norm[m] * spec.norm[n]).sqrt());
            }
        }
    }

    #[test]
    fn wall_spectrum_is_the_water_sine_series() {
        let cfg = StefanConfig::reference();
        let lam = stefan_eigenvalues(&cfg, cfg.y_minus, 10).unwrap();
        let (_, lp) = cfg.optical(cfg.y_minus);
        for (n, l) in lam.iter().enumerate() {
            assert!((l - (n + 1) as f64 * std::f64::consts::PI / lp).abs() < 1e-14 * l);
        }
        // Every second root is one of the 2πn/l_+ values, where K tends to
        // -√(κ_I/κ_W).
        for n in 1..=5 {
            let l = lam[2 * n - 1];
            assert!((l - 2.0 * std::f64::consts::PI * n as f64 / lp).abs() < 1e-12 * l);
            let k = k_factor(&cfg, cfg.y_minus, l).unwrap();
            assert!((k + (cfg.kappa_i / cfg.kappa_w).sqrt()).abs() < 1e-12, "{k}");
        }
        // The same limit is reached from roots with a thin ice layer.
        let y = cfg.y_minus + 1e-7;
        let spec = stefan_spectrum(&cfg, y, 2).unwrap();
        assert!((spec.k[1] + (cfg.kappa_i / cfg.kappa_w).sqrt()).abs() < 1e-4, "{}", spec.k[1]);
    }

    #[test]
    fn symmetric_media_give_unit_k() {
        let mut cfg = StefanConfig::reference();
        cfg.kappa_w = cfg.kappa_i;
        let y = 0.5 * (cfg.y_minus + cfg.y_plus);
        let spec = stefan_spectrum(&cfg, y, 10).unwrap();
        for n in 0..10 {
            // Odd modes are antisymmetric about the centre and have K = -1.
            let expect = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((spec.k[n] - expect).abs() < 1e-9, "{n}: {}", spec.k[n]);
        }
    }

    #[test]
    fn pole_of_k_is_rejected() {
        let cfg = StefanConfig::reference();
        let y = 10.0;
        let (lm, lp) = cfg.optical(y);
        let lam = std::f64::consts::PI / lp;
        assert!((lam * lm).sin().abs() > 1e-3);
        assert!(matches!(k_factor(&cfg, y, lam), Err(Error::Singular(_))));
    }

    #[test]
    fn asymptotic_roots_for_thin_water_ratio() {
        // With κ_W ≪ κ_I and comparable optical lengths the roots sit near
        // (π/2 + 2πn)/l_- or its companions; check the numeric roots against
        // the nearest such value.
        let cfg = StefanConfig::reference();
        let y = 10.0;
        let (lm, _) = cfg.optical(y);
        let lam = stefan_eigenvalues(&cfg, y, 200).unwrap();
        for n in 0..=4 {
            let guess = (std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * n as f64) / lm;
            let nearest = lam.iter().map(|l| (l - guess).abs()).fold(f64::INFINITY, f64::min);
            assert!(nearest < 0.05 * guess.max(std::f64::consts::PI / lm), "n {n}: {nearest}");
        }
    }

    #[test]
    fn invariants_at_the_start() {
        // Uniform initial medium: all three temperatures coincide.
        let mut cfg = StefanConfig::reference();
        cfg.t_s = cfg.t_l;
        cfg.t_m = cfg.t_l;
        let state = StefanState::new(&cfg, 50).unwrap();
        let (f1, f2) = forcing(&state, 0.0, cfg.y_minus, 0.0).unwrap();
        assert!(f1.abs() < 1e-12, "{f1}");
        assert!((f2 - (cfg.t_m - cfg.t_l)).abs() < 1e-12, "{f2}");
        assert_eq!(state.last().phi, 0.0);
        assert_eq!(temperature(&state, 0.0, 20.0).unwrap(), cfg.t_l);
    }

    #[test]
    fn kernels_vanish_on_the_diagonal() {
        let cfg = StefanConfig::reference();
        for y in [1.2, 4.0, 25.0] {
            let spec = stefan_spectrum(&cfg, y, 50).unwrap();
            let (k1, k2) = kernels(&cfg, &spec, 3.0, 3.0, y);
            // Relative to the size of the individual terms.
            let s1: f64 = (0..spec.len()).map(|n| spec.lambda[n] * cfg.a() / spec.norm[n]).sum();
            let s2: f64 = (0..spec.len()).map(|n| (1.0 + spec.k[n].abs()) / spec.norm[n]).sum();
            assert!(k1.abs() < 1e-12 * s1 && k2.abs() < 1e-12 * s2, "{k1} {k2}");
        }
    }

    #[test]
    fn history_integrand_vanishes_at_the_current_time() {
        let state = short_run(5.0, 50);
        let cfg = &state.config;
        let st = state.last();
        for n in 0..50 {
            let (lifted, flux) = history_brackets(cfg, &st.spectrum, &st.lift, st, n);
            assert!(lifted.abs() < 1e-12 && (st.phi * flux).abs() < 1e-12, "{n}: {lifted} {flux}");
        }
    }

    #[test]
    fn first_steps_follow_the_volterra_recursion() {
        let state = short_run(0.03, 50);
        let cfg = &state.config;
        let s1 = &state.steps[1];
        let (f1, f2) = forcing(&state, s1.tau, s1.y, s1.y_prime).unwrap();
        assert!(f2.abs() < 1e-8, "{f2}");
        assert!((s1.phi + f1).abs() < 1e-9 * s1.phi.abs().max(1.0));

        let s2 = &state.steps[2];
        let h1 = s1.tau;
        let w1 = 0.5 * (s2.tau - 0.0);
        let (f1, f2) = forcing(&state, s2.tau, s2.y, s2.y_prime).unwrap();
        let (k1, k2) = kernels(cfg, &s2.spectrum, s2.tau, h1, s1.y);
        assert!((f2 - w1 * s1.phi * k2).abs() < 1e-8, "{f2} {}", w1 * s1.phi * k2);
        assert!((s2.phi - (w1 * s1.phi * k1 - f1)).abs() < 1e-9 * s2.phi.abs().max(1.0));
    }

    #[test]
    fn reference_run_properties() {
        let state = short_run(200.0, 50);
        let cfg = &state.config;
        assert!(state.y_trace().windows(2).all(|w| w[1] > w[0]));
        for (i, st) in state.steps.iter().enumerate().skip(1) {
            let tol = if i == 1 { 1e-2 } else { 1e-3 };
            assert!(st.residual < tol, "step {i}: {}", st.residual);
            let t = temperature(&state, st.tau, st.y).unwrap();
            assert!((t - cfg.t_m).abs() < tol);
            assert!((temperature(&state, st.tau, cfg.y_minus).unwrap() - cfg.t_s).abs() < 1e-9);
            assert!((temperature(&state, st.tau, cfg.y_plus).unwrap() - cfg.t_l).abs() < 1e-9);
            let (left, right) = front_fluxes(&state, st.tau).unwrap();
            let target = cfg.rho_latent * st.y_prime;
            assert!((left - right - target).abs() <= 0.01 * target.abs(), "step {i}: {} vs {target}", left - right);
        }
        // Semi-infinite similarity front as a loose oracle for the early
        // motion: the slab is long compared with the diffusion length.
        let mu = similarity_constant(cfg).unwrap();
        assert!((mu - 0.131_182_45).abs() < 1e-6, "{mu}");
        let st = state.last();
        let neumann = 2.0 * mu * st.tau.sqrt();
        assert!(((st.y - cfg.y_minus) / neumann - 1.0).abs() < 0.05, "{} vs {neumann}", st.y - cfg.y_minus);
    }

    #[test]
    fn temperature_between_steps_is_continuous() {
        let state = short_run(20.0, 50);
        let k = state.steps.len() - 2;
        let (t0, t1) = (state.steps[k].tau, state.steps[k + 1].tau);
        let x = 10.0;
        let a = temperature(&state, t0, x).unwrap();
        let b = temperature(&state, t0 + 1e-6 * (t1 - t0), x).unwrap();
        assert!((a - b).abs() < 1e-3, "{a} {b}");
        assert!(matches!(temperature(&state, 25.0, x), Err(Error::Horizon { .. })));
    }

    #[test]
    fn theta_function_basics() {
        for z in [0.0, 0.3, 1.7] {
            assert_eq!(theta3(z, 0.0).unwrap(), 1.0);
        }
        assert!(theta3(0.2, 1.0).is_err());
        let state = short_run(0.05, 50);
        for tau in [0.01, 0.02, 0.05] {
            for x in [1.001, 1.01, 20.0] {
                let st = small_time_theta(&state, tau, x, 0.1).unwrap();
                assert!(st.omega > 0.0 && st.omega < 1.0);
                assert!((st.theta_form - st.direct_sum).abs() < 1e-8 * st.direct_sum.abs().max(1.0));
            }
        }
        assert!(small_time_theta(&state, 0.0, 20.0, 0.1).is_err());
        assert!(small_time_theta(&state, 0.2, 20.0, 0.1).is_err());
    }

    #[test]
    fn series_terms_are_exposed() {
        let state = short_run(1.0, 20);
        let (s, r, n) = series_terms(&state, 3, 4).unwrap();
        assert!(s.is_finite() && r.is_finite() && n > 0.0);
        assert!(series_terms(&state, 999, 0).is_err());
        assert!(series_terms(&state, 1, 20).is_err());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = StefanConfig::reference();
        cfg.t_s = 280.0;
        assert!(cfg.validate().is_err());
        let mut cfg = StefanConfig::reference();
        cfg.y_plus = 0.5;
        assert!(StefanState::new(&cfg, 10).is_err());
    }
}
