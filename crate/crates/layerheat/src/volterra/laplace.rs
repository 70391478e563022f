//! Convolution-type Volterra systems solved in the Laplace domain.
//!
//! When every kernel depends on `τ - s` only, the transformed system is the
//! algebraic `(I - K̂(p)) Û(p) = F̂(p)`. The solution is inverted with a
//! Gaver–Stehfest order sweep; if the orders disagree the Euler-summed
//! Fourier series (Abate–Whitt) is used instead.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::VolterraSolution;
use crate::error::{require, Error, Result};

/// Orders tried by the Gaver–Stehfest sweep.
pub const STEHFEST_ORDERS: [usize; 4] = [8, 10, 12, 14];

/// Relative disagreement across the sweep above which the fallback runs.
pub const SWEEP_TOLERANCE: f64 = 1e-5;

/// Stehfest weights `V_k`, `k = 1..=n` for even `n`.
pub fn stehfest_weights(n: usize) -> Vec<f64> {
    assert!(n.is_multiple_of(2) && n >= 2, "Stehfest order must be even");
    let half = n / 2;
    let fact = |k: usize| (1..=k).fold(1.0f64, |a, b| a * b as f64);
    (1..=n)
        .map(|k| {
            let lo = k.div_ceil(2);
            let hi = k.min(half);
            let sum: f64 = (lo..=hi)
                .map(|j| {
                    (j as f64).powi(half as i32) * fact(2 * j)
                        / (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k))
                })
                .sum();
            if (k + half).is_multiple_of(2) {
                sum
            } else {
                -sum
            }
        })
        .collect()
}

/// Gaver–Stehfest approximation of `f(t)` from real samples of `F`.
pub fn gaver_stehfest(f: impl Fn(f64) -> f64, t: f64, n: usize) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    let v = stehfest_weights(n);
    ln2 / t * v.iter().enumerate().map(|(k, vk)| vk * f((k + 1) as f64 * ln2 / t)).sum::<f64>()
}

/// Euler-summation parameters: discretization shift `a`, terms `n`, and
/// binomial averaging depth `m`.
#[derive(Debug, Clone, Copy)]
pub struct EulerParams {
    pub a: f64,
    pub n: usize,
    pub m: usize,
}

impl Default for EulerParams {
    fn default() -> Self {
        EulerParams { a: 18.4, n: 15, m: 11 }
    }
}

fn euler_nodes(t: f64, p: EulerParams) -> Vec<Complex64> {
    (0..=p.n + p.m).map(|k| Complex64::new(p.a, 2.0 * std::f64::consts::PI * k as f64) / (2.0 * t)).collect()
}

/// Combines image samples at [`euler_nodes`] into `f(t)`.
fn euler_combine(samples: &[Complex64], t: f64, p: EulerParams) -> f64 {
    let scale = (0.5 * p.a).exp() / t;
    let mut partial = Vec::with_capacity(p.n + p.m + 1);
    let mut s = 0.5 * samples[0].re;
    partial.push(s);
    for (k, v) in samples.iter().enumerate().skip(1) {
        s += if k % 2 == 0 { v.re } else { -v.re };
        partial.push(s);
    }
    let mut binom = 1.0;
    let mut acc = 0.0;
    for j in 0..=p.m {
        acc += binom * partial[p.n + j];
        binom *= (p.m - j) as f64 / (j + 1) as f64;
    }
    scale * acc / 2f64.powi(p.m as i32)
}

/// Euler (Abate–Whitt) inversion from complex samples of `F`.
pub fn euler_inversion(f: impl Fn(Complex64) -> Complex64, t: f64, params: EulerParams) -> f64 {
    let samples: Vec<Complex64> = euler_nodes(t, params).into_iter().map(f).collect();
    euler_combine(&samples, t, params)
}

/// Which inversion produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InversionMethod {
    GaverStehfest,
    Euler,
}

/// An inverted value with its method and self-consistency spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub value: f64,
    pub method: InversionMethod,
    pub spread: f64,
}

/// Vector-valued inversion at `t`: the sweep, then the fallback. `floor` is
/// the absolute scale below which differences count as agreement.
pub fn invert_vec(
    image: &(impl Fn(Complex64) -> Result<Vec<Complex64>> + Sync),
    dim: usize,
    t: f64,
    floor: f64,
) -> Result<Vec<Inversion>> {
    require(t > 0.0, || format!("inversion time must be positive, got {t}"))?;
    let ln2 = std::f64::consts::LN_2;
    let n_max = *STEHFEST_ORDERS.last().expect("orders");
    let samples: Vec<Vec<Complex64>> =
        (1..=n_max).map(|k| image(Complex64::new(k as f64 * ln2 / t, 0.0))).collect::<Result<_>>()?;
    let sweep: Vec<Vec<f64>> = STEHFEST_ORDERS
        .iter()
        .map(|&n| {
            let v = stehfest_weights(n);
            (0..dim).map(|c| ln2 / t * v.iter().enumerate().map(|(k, vk)| vk * samples[k][c].re).sum::<f64>()).collect()
        })
        .collect();
    let best = &sweep[sweep.len() - 1];
    let mut out = Vec::with_capacity(dim);
    let mut euler: Option<(Vec<f64>, Vec<f64>)> = None;
    for c in 0..dim {
        let scale = best[c].abs().max(floor);
        let spread = sweep.iter().map(|s| (s[c] - best[c]).abs()).fold(0.0, f64::max) / scale;
        if spread <= SWEEP_TOLERANCE {
            out.push(Inversion { value: best[c], method: InversionMethod::GaverStehfest, spread });
            continue;
        }
        if euler.is_none() {
            euler = Some(euler_vec(image, dim, t)?);
        }
        let (fine, coarse) = euler.as_ref().expect("computed");
        let scale = fine[c].abs().max(floor);
        let spread = (fine[c] - coarse[c]).abs() / scale;
        if spread > SWEEP_TOLERANCE {
            return Err(Error::Inversion(format!(
                "component {c} at t = {t}: Stehfest orders and Euler sums both disagree (relative spread {spread:e})"
            )));
        }
        out.push(Inversion { value: fine[c], method: InversionMethod::Euler, spread });
    }
    Ok(out)
}

/// Euler inversion at two depths, returned as (finer, coarser).
fn euler_vec(image: &(impl Fn(Complex64) -> Result<Vec<Complex64>> + Sync), dim: usize, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let fine_p = EulerParams { a: 18.4, n: 21, m: 13 };
    let coarse_p = EulerParams::default();
    let nodes = euler_nodes(t, fine_p);
    let samples: Vec<Vec<Complex64>> = nodes.par_iter().map(|&p| image(p)).collect::<Result<_>>()?;
    let combine = |params: EulerParams| -> Vec<f64> {
        (0..dim)
            .map(|c| {
                let s: Vec<Complex64> = samples[..=params.n + params.m].iter().map(|v| v[c]).collect();
                euler_combine(&s, t, params)
            })
            .collect()
    };
    Ok((combine(fine_p), combine(coarse_p)))
}

/// Solves `u = f + K * u` (convolution) from the images `K̂(p)` (row-major
/// `d × d`) and `F̂(p)`, sampled at `times`. At `t = 0` the value is taken
/// from `initial`, since the inversion formulas need `t > 0`.
pub fn laplace_convolution_solve(
    dim: usize,
    kernel_hat: impl Fn(Complex64, &mut [Complex64]) -> Result<()> + Sync,
    forcing_hat: impl Fn(Complex64, &mut [Complex64]) -> Result<()> + Sync,
    times: &[f64],
    initial: &[f64],
    floor: f64,
) -> Result<(VolterraSolution, Vec<Vec<Inversion>>)> {
    require(initial.len() == dim, || "initial value has the wrong dimension".into())?;
    let image = |p: Complex64| -> Result<Vec<Complex64>> {
        let mut k = vec![Complex64::new(0.0, 0.0); dim * dim];
        let mut f = vec![Complex64::new(0.0, 0.0); dim];
        kernel_hat(p, &mut k)?;
        forcing_hat(p, &mut f)?;
        let a = DMatrix::<Complex64>::identity(dim, dim) - DMatrix::from_row_slice(dim, dim, &k);
        a.lu()
            .solve(&DVector::from_vec(f))
            .map(|v| v.iter().copied().collect())
            .ok_or_else(|| Error::Singular(format!("transformed Volterra system at p = {p}")))
    };
    let rows: Vec<Result<(Vec<f64>, Vec<Inversion>)>> = times
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok((initial.to_vec(), Vec::new()));
            }
            let inv = invert_vec(&image, dim, t, floor)?;
            Ok((inv.iter().map(|i| i.value).collect(), inv))
        })
        .collect();
    let mut values = Vec::with_capacity(times.len());
    let mut diags = Vec::with_capacity(times.len());
    for r in rows {
        let (v, d) = r?;
        values.push(v);
        diags.push(d);
    }
    Ok((VolterraSolution { times: times.to_vec(), values }, diags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volterra::{solve_second_kind, FnSystem, Rule, TimeGrid};

    #[test]
    fn stehfest_weights_sum_to_zero() {
        for n in STEHFEST_ORDERS {
            let v = stehfest_weights(n);
            assert!(v.iter().sum::<f64>().abs() < 1e-6 * v.iter().map(|x| x.abs()).fold(0.0, f64::max));
        }
        assert_eq!(stehfest_weights(2), vec![2.0, -2.0]);
    }

    #[test]
    fn invert_exponential_both_methods() {
        for k in 1..=20 {
            let t = 0.1 * k as f64;
            let gs = gaver_stehfest(|p| 1.0 / (p + 1.0), t, 14);
            assert!((gs - (-t).exp()).abs() < 1e-4 * (-t).exp(), "{t}: {gs}");
            let eu = euler_inversion(|p| 1.0 / (p + 1.0), t, EulerParams::default());
            assert!((eu - (-t).exp()).abs() < 1e-7, "{t}: {eu}");
        }
        // oscillatory target where the sweep disagrees and the fallback is used
        let img = |p: Complex64| Ok(vec![Complex64::new(1.0, 0.0) / (p * p + 25.0)]);
        let inv = invert_vec(&img, 1, 2.0, 1e-10).unwrap();
        assert_eq!(inv[0].method, InversionMethod::Euler);
        assert!((inv[0].value - (10.0f64).sin() / 5.0).abs() < 1e-7);
    }

    #[test]
    fn zero_kernel_recovers_forcing() {
        let times: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
        let (sol, _) = laplace_convolution_solve(
            1,
            |_, k| {
                k[0] = Complex64::new(0.0, 0.0);
                Ok(())
            },
            |p, f| {
                f[0] = 1.0 / (p + 1.0);
                Ok(())
            },
            &times,
            &[1.0],
            1e-12,
        )
        .unwrap();
        for (t, v) in times.iter().zip(&sol.values) {
            assert!((v[0] - (-t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn convolution_system_matches_time_stepping() {
        // u = 1 + ∫ e^{-(τ-s)} 0.5 u(s) ds
        let times: Vec<f64> = (0..=10).map(|k| 0.2 * k as f64).collect();
        let (sol, _) = laplace_convolution_solve(
            1,
            |p, k| {
                k[0] = 0.5 / (p + 1.0);
                Ok(())
            },
            |p, f| {
                f[0] = 1.0 / p;
                Ok(())
            },
            &times,
            &[1.0],
            1e-12,
        )
        .unwrap();
        let sys = FnSystem { dim: 1, forcing: |_: f64, o: &mut [f64]| o[0] = 1.0, kernel: |t: f64, s: f64, o: &mut [f64]| o[0] = 0.5 * (-(t - s)).exp() };
        let g = TimeGrid::uniform(2.0, 200).unwrap();
        let stepped = solve_second_kind(&sys, &g, Rule::Simpson).unwrap();
        for (t, v) in times.iter().zip(&sol.values) {
            let exact = stepped.interpolate(0, *t).unwrap();
            assert!((v[0] - exact).abs() < 1e-6, "{t}: {} vs {exact}", v[0]);
        }
    }
}
