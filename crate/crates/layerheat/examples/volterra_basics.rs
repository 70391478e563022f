//! Second-kind Volterra solver on `u(τ) = 1 + ∫_0^τ u(s) ds`, whose
//! solution is `e^τ`, with the error per rule and step count.

use layerheat::volterra::{solve_second_kind, FnSystem, Rule, TimeGrid};

fn main() -> layerheat::Result<()> {
    let sys = FnSystem {
        dim: 1,
        forcing: |_: f64, o: &mut [f64]| o[0] = 1.0,
        kernel: |_: f64, _: f64, o: &mut [f64]| o[0] = 1.0,
    };
    for rule in [Rule::Trapezoid, Rule::Simpson] {
        for m in [25, 50, 100, 200] {
            let grid = TimeGrid::uniform(1.0, m)?;
            let sol = solve_second_kind(&sys, &grid, rule)?;
            let err = sol.times.iter().zip(&sol.values).map(|(t, v)| (v[0] - t.exp()).abs()).fold(0.0, f64::max);
            println!("{rule:?} M = {m:>3}: max error {err:.3e}");
        }
    }
    Ok(())
}
