//! Finite-volume oracle for the piecewise-constant heat equation
//! `u_t = (σ² u_x)_x`, used to cross-check the semi-analytical solvers.
//!
//! Layers are meshed separately so that every interface is a cell face;
//! face fluxes use the series resistance of the two half cells, which keeps
//! flux continuity exact and the scheme second order. The two-phase Stefan
//! oracle maps each phase onto `[0, 1]` (front fixing) and moves the front
//! with the latent-heat balance.

use layerheat::stefan::{similarity_constant, StefanConfig};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FdError {
    #[error("invalid finite-difference setup: {0}")]
    Invalid(String),
    #[error("explicit step violates stability: σ²Δt/Δx² = {ratio:.3} > 0.5")]
    Cfl { ratio: f64 },
    #[error("solution blew up at t = {t}")]
    Unstable { t: f64 },
}

type FdResult<T> = std::result::Result<T, FdError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Explicit,
    CrankNicolson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdConfig {
    pub cells: usize,
    pub dt: f64,
    pub scheme: Scheme,
    /// Crank-Nicolson steps replaced by two implicit Euler half steps to damp
    /// rough initial data.
    pub rannacher_steps: usize,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig { cells: 400, dt: 1e-3, scheme: Scheme::CrankNicolson, rannacher_steps: 4 }
    }
}

/// Layered rod with Dirichlet ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Rod {
    pub bounds: Vec<f64>,
    pub sigma: Vec<f64>,
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone)]
struct Mesh {
    centres: Vec<f64>,
    widths: Vec<f64>,
    cond: Vec<f64>,
    /// Face transmissibilities; `trans[0]` is the left wall, `trans[n]` the
    /// right wall.
    trans: Vec<f64>,
}

impl Mesh {
    fn new(rod: &Rod, cells: usize) -> FdResult<Self> {
        let n_layers = rod.sigma.len();
        if n_layers == 0 || rod.bounds.len() != n_layers + 1 {
            return Err(FdError::Invalid("need one more bound than layers".into()));
        }
        if rod.bounds.windows(2).any(|w| w[1] <= w[0]) || rod.sigma.iter().any(|s| *s <= 0.0) {
            return Err(FdError::Invalid("bounds must increase and sigma be positive".into()));
        }
        let total = rod.bounds[n_layers] - rod.bounds[0];
        let (mut centres, mut widths, mut cond) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..n_layers {
            let (a, b) = (rod.bounds[i], rod.bounds[i + 1]);
            let n = ((cells as f64 * (b - a) / total).round() as usize).max(2);
            let h = (b - a) / n as f64;
            for j in 0..n {
                centres.push(a + (j as f64 + 0.5) * h);
                widths.push(h);
                cond.push(rod.sigma[i] * rod.sigma[i]);
            }
        }
        let n = centres.len();
        let mut trans = Vec::with_capacity(n + 1);
        trans.push(2.0 * cond[0] / widths[0]);
        for i in 0..n - 1 {
            trans.push(1.0 / (widths[i] / (2.0 * cond[i]) + widths[i + 1] / (2.0 * cond[i + 1])));
        }
        trans.push(2.0 * cond[n - 1] / widths[n - 1]);
        Ok(Mesh { centres, widths, cond, trans })
    }

    /// `(Lu)_i = (F_{i+1/2} - F_{i-1/2}) / h_i` including the wall values.
    fn apply(&self, u: &[f64], left: f64, right: f64, out: &mut [f64]) {
        let n = u.len();
        for i in 0..n {
            let west = if i == 0 { left } else { u[i - 1] };
            let east = if i == n - 1 { right } else { u[i + 1] };
            out[i] = (self.trans[i + 1] * (east - u[i]) - self.trans[i] * (u[i] - west)) / self.widths[i];
        }
    }

    /// Solves `(I - θ dt L) v = rhs` with the wall terms folded into `rhs`.
    fn implicit(&self, theta_dt: f64, rhs: &mut [f64], left: f64, right: f64) {
        let n = rhs.len();
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 0..n {
            let c = theta_dt / self.widths[i];
            diag[i] = 1.0 + c * (self.trans[i] + self.trans[i + 1]);
            if i > 0 {
                lower[i] = -c * self.trans[i];
            } else {
                rhs[i] += c * self.trans[0] * left;
            }
            if i < n - 1 {
                upper[i] = -c * self.trans[i + 1];
            } else {
                rhs[i] += c * self.trans[n] * right;
            }
        }
        thomas(&lower, &diag, &upper, rhs);
    }

    fn stability_ratio(&self, dt: f64) -> f64 {
        self.cond.iter().zip(&self.widths).map(|(k, h)| k * dt / (h * h)).fold(0.0, f64::max)
    }
}

/// In-place tridiagonal solve (no pivoting; the matrices here are
/// diagonally dominant).
pub fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut d = diag[0];
    c[0] = upper[0] / d;
    rhs[0] /= d;
    for i in 1..n {
        d = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / d;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / d;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// Cell averages at the requested times, with the mesh needed to
/// reconstruct point values.
#[derive(Debug, Clone)]
pub struct FdSolution {
    mesh: Mesh,
    rod: Rod,
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
}

impl FdSolution {
    pub fn centres(&self) -> &[f64] {
        &self.mesh.centres
    }

    /// `∫u dx` at output `k`.
    pub fn mass(&self, k: usize) -> f64 {
        self.u[k].iter().zip(&self.mesh.widths).map(|(u, h)| u * h).sum()
    }

    /// Piecewise-linear reconstruction through the cell centres, the walls
    /// and the interface faces (whose values follow from flux continuity).
    pub fn value(&self, k: usize, x: f64) -> f64 {
        let (c, u, m) = (&self.mesh.centres, &self.u[k], &self.mesh);
        let n = c.len();
        let lo = self.rod.bounds[0];
        let hi = *self.rod.bounds.last().expect("bounds");
        if x <= lo {
            return self.rod.left;
        }
        if x >= hi {
            return self.rod.right;
        }
        if x <= c[0] {
            return lerp(lo, self.rod.left, c[0], u[0], x);
        }
        if x >= c[n - 1] {
            return lerp(c[n - 1], u[n - 1], hi, self.rod.right, x);
        }
        let i = c.partition_point(|&v| v <= x) - 1;
        let face = c[i] + 0.5 * m.widths[i];
        if m.cond[i] != m.cond[i + 1] {
            let (tl, tr) = (2.0 * m.cond[i] / m.widths[i], 2.0 * m.cond[i + 1] / m.widths[i + 1]);
            let uf = (tl * u[i] + tr * u[i + 1]) / (tl + tr);
            return if x <= face { lerp(c[i], u[i], face, uf, x) } else { lerp(face, uf, c[i + 1], u[i + 1], x) };
        }
        lerp(c[i], u[i], c[i + 1], u[i + 1], x)
    }
}

fn lerp(x0: f64, y0: f64, x1: f64, y1: f64, x: f64) -> f64 {
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Evolves `initial` (cell-centre samples) from `t0` through the increasing
/// output `times`.
pub fn fd_solve(cfg: &FdConfig, rod: &Rod, initial: impl Fn(f64) -> f64, t0: f64, times: &[f64]) -> FdResult<FdSolution> {
    if cfg.cells < 4 || !(cfg.dt > 0.0) {
        return Err(FdError::Invalid(format!("cells {} and dt {} must be positive", cfg.cells, cfg.dt)));
    }
    if times.iter().any(|&t| t < t0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(FdError::Invalid("output times must be increasing and not before t0".into()));
    }
    let mesh = Mesh::new(rod, cfg.cells)?;
    if cfg.scheme == Scheme::Explicit {
        let ratio = mesh.stability_ratio(cfg.dt);
        if ratio > 0.5 {
            return Err(FdError::Cfl { ratio });
        }
    }
    let mut u: Vec<f64> = mesh.centres.iter().map(|&x| initial(x)).collect();
    let bound = u.iter().fold(rod.left.abs().max(rod.right.abs()), |m, v| m.max(v.abs())).max(1.0) * 1e6;
    let mut work = vec![0.0; u.len()];
    let mut t = t0;
    let mut taken = 0usize;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        let steps = if span > 0.0 { (span / cfg.dt).ceil() as usize } else { 0 };
        for _ in 0..steps {
            let dt = span / steps as f64;
            match cfg.scheme {
                Scheme::Explicit => {
                    mesh.apply(&u, rod.left, rod.right, &mut work);
                    u.iter_mut().zip(&work).for_each(|(v, l)| *v += dt * l);
                }
                Scheme::CrankNicolson if taken < cfg.rannacher_steps => {
                    for _ in 0..2 {
                        mesh.implicit(0.5 * dt, &mut u, rod.left, rod.right);
                    }
                }
                Scheme::CrankNicolson => {
                    mesh.apply(&u, rod.left, rod.right, &mut work);
                    u.iter_mut().zip(&work).for_each(|(v, l)| *v += 0.5 * dt * l);
                    mesh.implicit(0.5 * dt, &mut u, rod.left, rod.right);
                }
            }
            taken += 1;
            t += dt;
            if u.iter().any(|v| !v.is_finite() || v.abs() > bound) {
                return Err(FdError::Unstable { t });
            }
        }
        t = target;
        out.push(u.clone());
    }
    Ok(FdSolution { mesh, rod: rod.clone(), times: times.to_vec(), u: out })
}

/// Front-fixing controls for the two-phase oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct StefanFdConfig {
    /// Intervals per phase.
    pub cells: usize,
    /// Start time; the similarity solution supplies the state there.
    pub t0: f64,
    pub dt0: f64,
    pub dt_max: f64,
    pub growth: f64,
    /// Geometric clustering of the water nodes toward the front.
    pub stretch: f64,
}

impl Default for StefanFdConfig {
    fn default() -> Self {
        StefanFdConfig { cells: 200, t0: 0.01, dt0: 1e-4, dt_max: 0.25, growth: 1.01, stretch: 8.0 }
    }
}

#[derive(Clone)]
struct Phase {
    /// Mapped coordinates in `[0, 1]`, increasing.
    xi: Vec<f64>,
    temps: Vec<f64>,
    kappa: f64,
    /// `true` for the ice side, where `ξ` runs from the wall to the front.
    ice: bool,
}

impl Phase {
    fn new(xi: Vec<f64>, kappa: f64, ice: bool, init: impl Fn(f64) -> f64) -> Self {
        let temps = xi.iter().map(|&v| init(v)).collect();
        Phase { xi, temps, kappa, ice }
    }

    /// Three-point weights `(west, centre, east)` of
    /// `κ/L² T_ξξ + c(ξ) T_ξ` at interior node `j`, with the mapped-grid
    /// advection `c = ξ y′/L` (ice) or `(1 - ξ) y′/L` (water).
    fn stencil(&self, len: f64, speed: f64, j: usize) -> (f64, f64, f64) {
        let (hm, hp) = (self.xi[j] - self.xi[j - 1], self.xi[j + 1] - self.xi[j]);
        let xi = self.xi[j];
        let adv = if self.ice { xi * speed / len } else { (1.0 - xi) * speed / len };
        let d = self.kappa / (len * len);
        let sum = hm + hp;
        let second = (2.0 / (hm * sum), -2.0 / (hm * hp), 2.0 / (hp * sum));
        let first = (-hp / (hm * sum), (hp - hm) / (hm * hp), hm / (hp * sum));
        (d * second.0 + adv * first.0, d * second.1 + adv * first.1, d * second.2 + adv * first.2)
    }

    /// One Crank-Nicolson step while the phase length moves from `len_old`
    /// to `len_new`.
    fn advance(&mut self, len_old: f64, len_new: f64, speed_old: f64, speed_new: f64, dt: f64) {
        let m = self.temps.len() - 1;
        let old = self.temps.clone();
        let mut lower = vec![0.0; m - 1];
        let mut diag = vec![0.0; m - 1];
        let mut upper = vec![0.0; m - 1];
        let mut rhs = vec![0.0; m - 1];
        for j in 1..m {
            let (w, c, e) = self.stencil(len_old, speed_old, j);
            let explicit = w * old[j - 1] + c * old[j] + e * old[j + 1];
            let (w, c, e) = self.stencil(len_new, speed_new, j);
            let r = j - 1;
            diag[r] = 1.0 - 0.5 * dt * c;
            rhs[r] = old[j] + 0.5 * dt * explicit;
            if j > 1 {
                lower[r] = -0.5 * dt * w;
            } else {
                rhs[r] += 0.5 * dt * w * old[0];
            }
            if j < m - 1 {
                upper[r] = -0.5 * dt * e;
            } else {
                rhs[r] += 0.5 * dt * e * old[m];
            }
        }
        thomas(&lower, &diag, &upper, &mut rhs);
        self.temps[1..m].copy_from_slice(&rhs);
    }

    /// `∂T/∂x` at the front by the one-sided second-order stencil.
    fn front_gradient(&self, len: f64) -> f64 {
        let m = self.temps.len() - 1;
        let (t, xi) = (&self.temps, &self.xi);
        let (f0, f1, f2, h1, h2) = if self.ice {
            (t[m], t[m - 1], t[m - 2], xi[m] - xi[m - 1], xi[m - 1] - xi[m - 2])
        } else {
            (t[0], t[1], t[2], xi[1] - xi[0], xi[2] - xi[1])
        };
        let d = (2.0 * h1 + h2) / (h1 * (h1 + h2)) * f0 - (h1 + h2) / (h1 * h2) * f1 + h1 / (h2 * (h1 + h2)) * f2;
        let sign = if self.ice { 1.0 } else { -1.0 };
        sign * d / len
    }
}

/// Nodes on `[0, 1]` clustered geometrically toward `0` (`stretch > 0`).
fn clustered(m: usize, stretch: f64) -> Vec<f64> {
    (0..=m).map(|j| ((stretch * j as f64 / m as f64).exp_m1()) / stretch.exp_m1()).collect()
}

/// Front positions `(τ, y)` at the requested times from the front-fixing
/// oracle.
pub fn fd_stefan(cfg: &StefanConfig, fd: &StefanFdConfig, times: &[f64]) -> anyhow::Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    anyhow::ensure!(fd.cells >= 8 && fd.t0 > 0.0 && fd.dt0 > 0.0 && fd.dt_max >= fd.dt0 && fd.growth >= 1.0 && fd.stretch > 0.0, "bad front-fixing controls {fd:?}");
    anyhow::ensure!(times.iter().all(|&t| t >= fd.t0) && times.windows(2).all(|w| w[1] >= w[0]), "output times must increase from t0");
    let mu = similarity_constant(cfg)?;
    let (a, b) = (cfg.kappa_i.sqrt(), cfg.kappa_w.sqrt());
    let m = fd.cells;
    let mut y = cfg.y_minus + 2.0 * mu * fd.t0.sqrt();
    let root_t = fd.t0.sqrt();
    let ice_xi: Vec<f64> = (0..=m).map(|j| j as f64 / m as f64).collect();
    let y0 = y;
    let mut ice = Phase::new(ice_xi, cfg.kappa_i, true, |xi| {
        let x = cfg.y_minus + (y0 - cfg.y_minus) * xi;
        cfg.t_s + (cfg.t_m - cfg.t_s) * libm::erf((x - cfg.y_minus) / (2.0 * a * root_t)) / libm::erf(mu / a)
    });
    let mut water = Phase::new(clustered(m, fd.stretch), cfg.kappa_w, false, |xi| {
        let x = y0 + (cfg.y_plus - y0) * xi;
        cfg.t_l - (cfg.t_l - cfg.t_m) * libm::erfc((x - cfg.y_minus) / (2.0 * b * root_t)) / libm::erfc(mu / b)
    });
    ice.temps[m] = cfg.t_m;
    water.temps[0] = cfg.t_m;
    water.temps[m] = cfg.t_l;

    let speed = |ice: &Phase, water: &Phase, y: f64| {
        (cfg.kappa_i * ice.front_gradient(y - cfg.y_minus) - cfg.kappa_w * water.front_gradient(cfg.y_plus - y)) / cfg.rho_latent
    };
    let mut t = fd.t0;
    let mut dt = fd.dt0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target - 1e-12 * target.max(1.0) {
            let h = dt.min(target - t);
            let v0 = speed(&ice, &water, y);
            // Heun predictor-corrector for the front, Crank-Nicolson for the
            // temperatures on the moving grids.
            let y_pred = y + h * v0;
            let (mut ice_p, mut water_p) = (ice.clone(), water.clone());
            ice_p.advance(y - cfg.y_minus, y_pred - cfg.y_minus, v0, v0, h);
            water_p.advance(cfg.y_plus - y, cfg.y_plus - y_pred, v0, v0, h);
            let v1 = speed(&ice_p, &water_p, y_pred);
            let y_new = y + 0.5 * h * (v0 + v1);
            ice.advance(y - cfg.y_minus, y_new - cfg.y_minus, v0, v1, h);
            water.advance(cfg.y_plus - y, cfg.y_plus - y_new, v0, v1, h);
            y = y_new;
            t += h;
            anyhow::ensure!(y.is_finite() && y > cfg.y_minus && y < cfg.y_plus, "front left the slab at t = {t}");
            dt = (dt * fd.growth).min(fd.dt_max);
        }
        out.push((target, y));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use layerheat::multilayer::{interface_volterra, solution_series, MovingLayerGrid, StripProblem};
    use layerheat::spectrum::LayerGrid;
    use layerheat::volterra::TimeGrid;

    fn gaussian(x: f64, t: f64, sigma: f64) -> f64 {
        (-x * x / (4.0 * sigma * sigma * t)).exp() / (2.0 * sigma * (std::f64::consts::PI * t).sqrt())
    }

    fn gaussian_error(cells: usize, dt: f64) -> f64 {
        let rod = Rod { bounds: vec![-8.0, 8.0], sigma: vec![1.0], left: 0.0, right: 0.0 };
        let cfg = FdConfig { cells, dt, ..Default::default() };
        let sol = fd_solve(&cfg, &rod, |x| gaussian(x, 0.5, 1.0), 0.5, &[1.0]).unwrap();
        sol.centres().iter().zip(&sol.u[0]).map(|(&x, u)| (u - gaussian(x, 1.0, 1.0)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_evolution_and_refinement() {
        let coarse = gaussian_error(400, 2e-3);
        let fine = gaussian_error(800, 1e-3);
        assert!(fine < 1e-4, "{fine}");
        let ratio = coarse / fine;
        assert!((3.0..5.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn explicit_scheme_checks_stability() {
        let rod = Rod { bounds: vec![0.0, 1.0], sigma: vec![1.0], left: 0.0, right: 0.0 };
        let cfg = FdConfig { cells: 100, dt: 1e-3, scheme: Scheme::Explicit, rannacher_steps: 0 };
        assert!(matches!(fd_solve(&cfg, &rod, |_| 1.0, 0.0, &[0.1]), Err(FdError::Cfl { .. })));
        let cfg = FdConfig { dt: 4e-5, ..cfg };
        let sol = fd_solve(&cfg, &rod, |x| (std::f64::consts::PI * x).sin(), 0.0, &[0.1]).unwrap();
        let exact = (-std::f64::consts::PI.powi(2) * 0.1).exp();
        assert!((sol.value(0, 0.5) - exact).abs() < 1e-3);
    }

    #[test]
    fn static_two_layer_strip_matches_series() {
        let (y, sigma) = (vec![0.0, 0.4, 1.0], vec![1.0, 0.5]);
        let f = |x: f64| x * (1.0 - x);
        let grid = LayerGrid::new(y.clone(), sigma.clone()).unwrap();
        let problem = StripProblem::new(MovingLayerGrid::fixed(&grid, 0.2).unwrap(), f);
        let traces = interface_volterra(&problem, 60, &TimeGrid::uniform(0.2, 20).unwrap()).unwrap();
        let rod = Rod { bounds: y, sigma, left: 0.0, right: 0.0 };
        let sol = fd_solve(&FdConfig { cells: 400, dt: 2e-4, ..Default::default() }, &rod, f, 0.0, &[0.2]).unwrap();
        for k in 1..20 {
            let x = k as f64 / 20.0;
            let s = solution_series(&problem, &traces, 60, 0.2, x).unwrap().value;
            assert!((sol.value(0, x) - s).abs() < 1e-3, "{x}: {} vs {s}", sol.value(0, x));
        }
    }

    #[test]
    fn mass_is_conserved_away_from_walls() {
        let rod = Rod { bounds: vec![-20.0, 0.0, 20.0], sigma: vec![1.0, 2.0], left: 0.0, right: 0.0 };
        let sol = fd_solve(&FdConfig { cells: 800, ..Default::default() }, &rod, |x| gaussian(x - 0.5, 0.01, 2.0), 0.01, &[0.01, 0.1, 0.5]).unwrap();
        for k in 1..3 {
            assert!((sol.mass(k) - sol.mass(0)).abs() < 1e-10, "{} vs {}", sol.mass(k), sol.mass(0));
        }
    }

    #[test]
    fn front_fixing_tracks_the_similarity_front() {
        let cfg = StefanConfig::reference();
        let mu = similarity_constant(&cfg).unwrap();
        let times = [0.1, 1.0, 10.0, 100.0];
        let fronts = fd_stefan(&cfg, &StefanFdConfig::default(), &times).unwrap();
        for (t, y) in fronts {
            let want = cfg.y_minus + 2.0 * mu * t.sqrt();
            assert!(((y - cfg.y_minus) / (want - cfg.y_minus) - 1.0).abs() < 1e-3, "{t}: {y} vs {want}");
        }
    }

    #[test]
    fn tridiagonal_solve() {
        let (l, d, u) = (vec![0.0, 1.0, 1.0], vec![4.0, 4.0, 4.0], vec![1.0, 1.0, 0.0]);
        let mut r = vec![5.0, 6.0, 5.0];
        thomas(&l, &d, &u, &mut r);
        for v in r {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }
}
