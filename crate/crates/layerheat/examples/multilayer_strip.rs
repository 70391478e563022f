//! Three-layer strip whose two inner interfaces oscillate: interface traces
//! from the Volterra system and the solution profile at the final time.

use layerheat::multilayer::{interface_volterra, snapshot, MovingLayerGrid, StripProblem};
use layerheat::obm::MovingInterface;
use layerheat::volterra::TimeGrid;

fn main() -> layerheat::Result<()> {
    let horizon = 0.2;
    let bounds = vec![
        MovingInterface::constant(0.0, horizon)?,
        MovingInterface::new(|t| 0.3 + 0.05 * (10.0 * t).sin(), |t| 0.5 * (10.0 * t).cos(), horizon)?,
        MovingInterface::new(|t| 0.7 - 0.1 * t, |_| -0.1, horizon)?,
        MovingInterface::constant(1.0, horizon)?,
    ];
    let grid = MovingLayerGrid::new(bounds, vec![1.0, 0.4, 0.8])?;
    let problem = StripProblem::new(grid, |x| (std::f64::consts::PI * x).sin());
    let times = TimeGrid::uniform(horizon, 40)?;
    let terms = 60;
    let traces = interface_volterra(&problem, terms, &times)?;

    println!("{:>7} {:>10} {:>10} {:>10} {:>10}", "tau", "phi_1", "phi_2", "flux_0", "flux_3");
    for (k, t) in traces.times.iter().enumerate().step_by(5) {
        let (v, f) = (&traces.value[k], &traces.flux[k]);
        println!("{t:>7.3} {:>10.5} {:>10.5} {:>10.5} {:>10.5}", v[1], v[2], f[0], f[3]);
    }
    let snap = snapshot(&problem, &traces, terms, horizon)?;
    println!("\nprofile at tau = {horizon}");
    for k in 0..=10 {
        let x = k as f64 / 10.0;
        let u = snap.eval(x);
        println!("x = {x:.1}: u = {:.6} (last term {:.1e})", u.value, u.tail);
    }
    Ok(())
}
