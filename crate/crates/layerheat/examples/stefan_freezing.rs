//! Freezing of a water slab from a cold wall: front position, interface
//! residual and gradient jump per step, compared with the semi-infinite
//! similarity front. Optional positional arguments override the horizon in
//! seconds, the term count, the first step and the step growth ratio
//! (defaults 1000, 50, 0.01, 1.2).

use layerheat::stefan::{front_fluxes, run, similarity_constant, StefanConfig, StefanOptions};

fn main() -> layerheat::Result<()> {
    let mut args = std::env::args().skip(1);
    let horizon = args.next().and_then(|s| s.parse().ok()).unwrap_or(1000.0);
    let terms = args.next().and_then(|s| s.parse().ok()).unwrap_or(50);
    let h0 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let ratio = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.2);

    let cfg = StefanConfig::reference();
    let opts = StefanOptions { terms, horizon, h0, ratio, ..Default::default() };
    let state = run(&cfg, &opts)?;
    let mu = similarity_constant(&cfg)?;

    println!("{:>10} {:>12} {:>12} {:>10} {:>10} {:>11} {:>8}", "tau_s", "y_mm", "similar_mm", "phi", "resid_K", "jump_rel", "step_s");
    for st in state.steps.iter().skip(1) {
        let (left, right) = front_fluxes(&state, st.tau)?;
        let target = cfg.rho_latent * st.y_prime;
        println!(
            "{:>10.3} {:>12.6} {:>12.6} {:>10.5} {:>10.2e} {:>11.2e} {:>8.4}",
            st.tau,
            st.y,
            cfg.y_minus + 2.0 * mu * st.tau.sqrt(),
            st.phi,
            st.residual,
            ((left - right) - target).abs() / target.abs(),
            st.wall_seconds
        );
    }
    Ok(())
}
