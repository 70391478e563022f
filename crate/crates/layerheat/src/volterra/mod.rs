//! Linear Volterra systems of the second kind,
//! `u(τ) = f(τ) + ∫_0^τ K(τ, s) u(s) ds`, on nonuniform time grids.
//!
//! Three discretizations are offered: composite trapezoid, a fourth-order
//! block-by-block Simpson scheme, and product trapezoid for kernels with a
//! `(τ - s)^{-1/2}` factor. Each step solves one small dense block, so a run
//! costs `O(M²)` kernel evaluations.

pub mod laplace;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{require, Error, Result};
use crate::quad::GlRule;

/// Strictly increasing time nodes starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        require(nodes.len() >= 2, || "a time grid needs at least two nodes".into())?;
        require(nodes[0] == 0.0, || format!("time grid must start at 0, got {}", nodes[0]))?;
        require(nodes.windows(2).all(|w| w[0] < w[1] && w[1].is_finite()), || "time nodes must increase strictly".into())?;
        Ok(TimeGrid { nodes })
    }

    /// `steps` equal steps on `[0, horizon]`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        require(horizon > 0.0 && steps >= 1, || format!("bad uniform grid: horizon {horizon}, steps {steps}"))?;
        Self::new((0..=steps).map(|k| horizon * k as f64 / steps as f64).collect())
    }

    /// Steps growing geometrically from `h0` by `ratio` up to `h_max`; the
    /// last node lands exactly on `horizon`.
    pub fn geometric(h0: f64, h_max: f64, ratio: f64, horizon: f64) -> Result<Self> {
        require(h0 > 0.0 && h_max >= h0 && ratio >= 1.0 && horizon > 0.0, || {
            format!("bad geometric grid: h0 {h0}, h_max {h_max}, ratio {ratio}, horizon {horizon}")
        })?;
        let mut nodes = vec![0.0];
        let mut h = h0;
        let mut t = 0.0;
        while t + h < horizon * (1.0 - 1e-12) {
            t += h;
            nodes.push(t);
            h = (h * ratio).min(h_max);
        }
        nodes.push(horizon);
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().expect("nonempty grid")
    }
}

/// Discretization of the memory integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Trapezoid,
    Simpson,
    /// Kernels are given as `√(τ - s) K(τ, s)`, which must stay bounded
    /// (including its limit at `s = τ`).
    ProductTrapezoid,
}

/// A `d`-dimensional linear Volterra system.
///
/// Kernels are written row-major into a `d × d` buffer; at `s = τ` they must
/// return their analytic limit.
pub trait VolterraSystem: Sync {
    fn dim(&self) -> usize;
    fn forcing(&self, tau: f64, out: &mut [f64]);
    fn kernel(&self, tau: f64, s: f64, out: &mut [f64]);
}

/// Closure-backed system.
pub struct FnSystem<F, K> {
    pub dim: usize,
    pub forcing: F,
    pub kernel: K,
}

impl<F, K> VolterraSystem for FnSystem<F, K>
where
    F: Fn(f64, &mut [f64]) + Sync,
    K: Fn(f64, f64, &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn forcing(&self, tau: f64, out: &mut [f64]) {
        (self.forcing)(tau, out)
    }
    fn kernel(&self, tau: f64, s: f64, out: &mut [f64]) {
        (self.kernel)(tau, s, out)
    }
}

/// Solution samples `values[m][c]` at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSolution {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl VolterraSolution {
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[c]).collect()
    }

    /// Piecewise-linear interpolation of component `c`.
    pub fn interpolate(&self, c: usize, tau: f64) -> Result<f64> {
        let t = &self.times;
        let last = *t.last().expect("nonempty");
        if !(0.0..=last).contains(&tau) {
            return Err(Error::Horizon { tau, horizon: last });
        }
        let j = t.partition_point(|&x| x <= tau).clamp(1, t.len() - 1);
        let w = (tau - t[j - 1]) / (t[j] - t[j - 1]);
        Ok((1.0 - w) * self.values[j - 1][c] + w * self.values[j][c])
    }
}

/// Weights of `∫_a^b p(s) ds` where `p` interpolates at `nodes` (exact for
/// polynomials of degree `nodes.len() - 1 ≤ 3`).
pub(crate) fn lagrange_weights(nodes: &[f64], a: f64, b: f64) -> Vec<f64> {
    let rule = GlRule::new(4);
    nodes
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            rule.integrate(a, b, |x| {
                nodes.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &xj)| (x - xj) / (xi - xj)).product::<f64>()
            })
        })
        .collect()
}

/// Product-trapezoid weights of `∫_{s_j}^{s_{j+1}} f(s) (τ - s)^{-1/2} ds`
/// for linear `f`, returned as the weights on `f(s_j)` and `f(s_{j+1})`.
pub(crate) fn sqrt_panel_weights(tau: f64, s0: f64, s1: f64) -> (f64, f64) {
    let ra = (tau - s0).max(0.0).sqrt();
    let rb = (tau - s1).max(0.0).sqrt();
    let diff = (s1 - s0) / (ra + rb);
    let c = 2.0 / 3.0 * diff / (ra + rb);
    (c * (ra + 2.0 * rb), c * (2.0 * ra + rb))
}

/// Quadrature weights for `∫_0^{t_m}` over nodes `0..=m` under `rule`
/// (Simpson handled separately for the start-up steps).
pub(crate) fn step_weights(t: &[f64], m: usize, rule: Rule) -> Vec<f64> {
    let mut w = vec![0.0; m + 1];
    match rule {
        Rule::Trapezoid => {
            for j in 0..m {
                let h = 0.5 * (t[j + 1] - t[j]);
                w[j] += h;
                w[j + 1] += h;
            }
        }
        Rule::ProductTrapezoid => {
            for j in 0..m {
                let (a, b) = sqrt_panel_weights(t[m], t[j], t[j + 1]);
                w[j] += a;
                w[j + 1] += b;
            }
        }
        Rule::Simpson => {
            debug_assert!(m >= 2);
            let mut start = 0;
            if m % 2 == 1 {
                let lw = lagrange_weights(&t[0..4], t[0], t[3]);
                for (k, v) in lw.into_iter().enumerate() {
                    w[k] += v;
                }
                start = 3;
            }
            let mut j = start;
            while j + 2 <= m {
                let lw = lagrange_weights(&t[j..j + 3], t[j], t[j + 2]);
                for (k, v) in lw.into_iter().enumerate() {
                    w[j + k] += v;
                }
                j += 2;
            }
        }
    }
    w
}

fn kernel_matrix(sys: &impl VolterraSystem, tau: f64, s: f64) -> DMatrix<f64> {
    let d = sys.dim();
    let mut buf = vec![0.0; d * d];
    sys.kernel(tau, s, &mut buf);
    DMatrix::from_row_slice(d, d, &buf)
}

fn forcing_vec(sys: &impl VolterraSystem, tau: f64) -> DVector<f64> {
    let mut buf = vec![0.0; sys.dim()];
    sys.forcing(tau, &mut buf);
    DVector::from_vec(buf)
}

/// Ordered history sum `Σ_{j<m} w_j K(t_m, t_j) u_j`, kernels evaluated in
/// parallel and accumulated sequentially.
fn history(sys: &impl VolterraSystem, t: &[f64], m: usize, w: &[f64], u: &[DVector<f64>]) -> DVector<f64> {
    let terms: Vec<DVector<f64>> = (0..m)
        .into_par_iter()
        .map(|j| if w[j] == 0.0 { DVector::zeros(sys.dim()) } else { kernel_matrix(sys, t[m], t[j]) * &u[j] * w[j] })
        .collect();
    terms.into_iter().fold(DVector::zeros(sys.dim()), |acc, v| acc + v)
}

fn solve_block(a: DMatrix<f64>, b: DVector<f64>, node: usize) -> Result<DVector<f64>> {
    let lu = a.lu();
    lu.solve(&b)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Singular(format!("Volterra diagonal block at node {node}")))
}

/// Forward-substitution solve of the discretized system on `grid`.
pub fn solve_second_kind(sys: &impl VolterraSystem, grid: &TimeGrid, rule: Rule) -> Result<VolterraSolution> {
    let d = sys.dim();
    require(d >= 1, || "system dimension must be positive".into())?;
    let t = grid.nodes();
    let m_max = t.len() - 1;
    let mut u: Vec<DVector<f64>> = Vec::with_capacity(t.len());
    u.push(forcing_vec(sys, 0.0));
    let mut next = 1;

    if rule == Rule::Simpson {
        require(m_max >= 2, || "Simpson rule needs at least two steps".into())?;
        simpson_start(sys, t, &mut u)?;
        next = 3;
    }

    for m in next..=m_max {
        let w = step_weights(t, m, rule);
        let rhs = forcing_vec(sys, t[m]) + history(sys, t, m, &w, &u);
        let a = DMatrix::identity(d, d) - kernel_matrix(sys, t[m], t[m]) * w[m];
        u.push(solve_block(a, rhs, m)?);
    }
    Ok(VolterraSolution { times: t.to_vec(), values: u.into_iter().map(|v| v.iter().copied().collect()).collect() })
}

/// Joint solve for nodes 1 and 2: Simpson on `[t_0, t_2]`, and on
/// `[t_0, t_1]` with the midpoint value taken from the quadratic through
/// nodes 0, 1, 2.
fn simpson_start(sys: &impl VolterraSystem, t: &[f64], u: &mut Vec<DVector<f64>>) -> Result<()> {
    let d = sys.dim();
    let (t0, t1, t2) = (t[0], t[1], t[2]);
    let mid = 0.5 * (t0 + t1);
    let h1 = t1 - t0;
    let interp = lagrange_weights_at(&[t0, t1, t2], mid);
    let k10 = kernel_matrix(sys, t1, t0);
    let k1m = kernel_matrix(sys, t1, mid);
    let k11 = kernel_matrix(sys, t1, t1);
    let w2 = lagrange_weights(&[t0, t1, t2], t0, t2);
    let k20 = kernel_matrix(sys, t2, t0);
    let k21 = kernel_matrix(sys, t2, t1);
    let k22 = kernel_matrix(sys, t2, t2);
    let (a, b, c) = (h1 / 6.0, 4.0 * h1 / 6.0, h1 / 6.0);

    let mut big = DMatrix::<f64>::identity(2 * d, 2 * d);
    let mut rhs = DVector::<f64>::zeros(2 * d);
    // row block 1: u1 - [c K11 + b L1 K1m] u1 - b L2 K1m u2 = f1 + (a K10 + b L0 K1m) u0
    let b11 = &k11 * c + &k1m * (b * interp[1]);
    let b12 = &k1m * (b * interp[2]);
    let r1 = forcing_vec(sys, t1) + (&k10 * a + &k1m * (b * interp[0])) * &u[0];
    // row block 2: u2 - w1 K21 u1 - w2 K22 u2 = f2 + w0 K20 u0
    let b21 = &k21 * w2[1];
    let b22 = &k22 * w2[2];
    let r2 = forcing_vec(sys, t2) + &k20 * &u[0] * w2[0];
    for i in 0..d {
        for j in 0..d {
            big[(i, j)] -= b11[(i, j)];
            big[(i, d + j)] -= b12[(i, j)];
            big[(d + i, j)] -= b21[(i, j)];
            big[(d + i, d + j)] -= b22[(i, j)];
        }
        rhs[i] = r1[i];
        rhs[d + i] = r2[i];
    }
    let sol = solve_block(big, rhs, 1)?;
    u.push(sol.rows(0, d).into_owned());
    u.push(sol.rows(d, d).into_owned());
    Ok(())
}

/// A system given through its discrete moments: with `u` piecewise linear
/// between nodes, `u_m = f_m + Σ_{j ≤ m} W_{mj} u_j` where `W_{mj}` is the
/// kernel at `t_m` integrated against the hat function of node `j`.
///
/// This suits kernels too sharp near `s = τ` for pointwise rules, when the
/// moments can be integrated accurately by the caller.
pub trait MomentSystem: Sync {
    fn dim(&self) -> usize;
    /// Forcing at node `m`.
    fn forcing(&self, m: usize) -> Vec<f64>;
    /// Row-major `dim × dim` blocks `W_{mj}` for `j = 0..=m`.
    fn moments(&self, m: usize) -> Vec<Vec<f64>>;
}

/// Forward substitution for a [`MomentSystem`] on `grid`; forcing and
/// moments of all nodes are built in parallel first.
pub fn solve_moment_form(sys: &impl MomentSystem, grid: &TimeGrid) -> Result<VolterraSolution> {
    let d = sys.dim();
    require(d >= 1, || "system dimension must be positive".into())?;
    let t = grid.nodes();
    let blocks: Vec<(Vec<f64>, Vec<Vec<f64>>)> =
        (0..t.len()).into_par_iter().map(|m| (sys.forcing(m), if m == 0 { Vec::new() } else { sys.moments(m) })).collect();
    let mut u: Vec<DVector<f64>> = Vec::with_capacity(t.len());
    u.push(DVector::from_vec(blocks[0].0.clone()));
    for (m, (f, w)) in blocks.into_iter().enumerate().skip(1) {
        require(w.len() == m + 1 && w.iter().all(|b| b.len() == d * d), || format!("moment blocks at node {m} have wrong shape"))?;
        let mut rhs = DVector::from_vec(f);
        for (j, uj) in u.iter().enumerate() {
            rhs += DMatrix::from_row_slice(d, d, &w[j]) * uj;
        }
        let a = DMatrix::identity(d, d) - DMatrix::from_row_slice(d, d, &w[m]);
        u.push(solve_block(a, rhs, m)?);
    }
    Ok(VolterraSolution { times: t.to_vec(), values: u.into_iter().map(|v| v.iter().copied().collect()).collect() })
}

/// Values at `x` of the Lagrange basis polynomials on `nodes`.
pub(crate) fn lagrange_weights_at(nodes: &[f64], x: f64) -> Vec<f64> {
    nodes
        .iter()
        .enumerate()
        .map(|(i, &xi)| nodes.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &xj)| (x - xj) / (xi - xj)).product())
        .collect()
}
