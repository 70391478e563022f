//! Transition density of oscillating Brownian motion across a constant and a
//! linearly moving interface, with total mass at several times.

use layerheat::obm::{density_profile, solve_interface, total_mass, MovingInterface, ObmProblem};
use layerheat::volterra::TimeGrid;

fn main() -> layerheat::Result<()> {
    let grid = TimeGrid::uniform(1.0, 100)?;
    for (name, iface) in [
        ("constant", MovingInterface::constant(0.0, 1.0)?),
        ("linear", MovingInterface::linear(0.0, 0.1, 1.0)?),
    ] {
        let problem = ObmProblem::new(1.0, 2.0, iface, 0.5)?;
        let trace = solve_interface(&problem, &grid)?;
        println!("{name} interface");
        for tau in [0.1, 0.5, 1.0] {
            println!("  mass at tau = {tau}: {:.8}", total_mass(&problem, &trace, tau, 1e-10)?);
        }
        let xs: Vec<f64> = (0..=12).map(|k| -3.0 + 0.5 * k as f64).collect();
        let g = density_profile(&problem, &trace, 1.0, &xs)?;
        for (x, v) in xs.iter().zip(g) {
            println!("  x = {x:>5.2}: g = {v:.6}");
        }
    }
    Ok(())
}
