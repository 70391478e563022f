//! One runner per subcommand. A runner turns its parameter block into CSV
//! tables, plot panels and a JSON object of headline numbers; writing them
//! out is shared.

use std::path::Path;

use serde_json::{json, Value};

use layerheat::mixed::{det_lambda_star_k, sift, three_layer_zeros, MixedMedium};
use layerheat::multilayer::{interface_volterra, snapshot, MovingLayerGrid, StripProblem};
use layerheat::obm::{density_profile, laplace_route, solve_interface, total_mass, MovingInterface, ObmProblem};
use layerheat::oit::{oit_inverse, SampledImage, Support, TwoLayerMedium};
use layerheat::spectrum::{eigen_residual, eigenbasis, lambda_approx, FirstOrder, LayerGrid};
use layerheat::stefan::{front_fluxes, run, similarity_constant, temperature};
use layerheat::volterra::TimeGrid;

use crate::checks;
use crate::config::{
    FirstOrderVariant, InitialData, MixedConfig, MultilayerConfig, ObmConfig, OitConfig, Problem, RunConfig, SpectrumConfig, StefanRunConfig,
    ValidateConfig,
};
use crate::error::HarnessResult;
use crate::output::{num, plot_script, write_text, Panel, Phases, Table};

/// What a runner produced, before it is written out.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub panels: Vec<Panel>,
    pub results: Value,
    /// Ids of failed checks (validate only).
    pub failed: Vec<String>,
}

/// Runs the resolved configuration and writes its artifacts into `dir`.
/// Returns the output with the written file names appended to `results`.
pub fn execute(cfg: &RunConfig, dir: &Path, phases: &mut Phases) -> HarnessResult<(RunOutput, Vec<String>)> {
    let block = "resolved config carries its block";
    let out = match cfg.problem {
        Problem::Spectrum => spectrum(cfg.spectrum.as_ref().expect(block), phases)?,
        Problem::Oit => oit(cfg.oit.as_ref().expect(block), phases)?,
        Problem::Mixed => mixed(cfg.mixed.as_ref().expect(block), phases)?,
        Problem::Obm => obm(cfg.obm.as_ref().expect(block), phases)?,
        Problem::Multilayer => multilayer(cfg.multilayer.as_ref().expect(block), phases)?,
        Problem::Stefan => stefan(cfg.stefan.as_ref().expect(block), phases)?,
        Problem::Validate => validate(cfg.validate.as_ref().expect(block), phases)?,
    };
    let files = phases.time("write", || {
        let mut files = Vec::new();
        for t in &out.tables {
            t.write(dir)?;
            files.push(t.name.clone());
        }
        if !out.panels.is_empty() {
            write_text(dir, "plot.gp", &plot_script(&out.panels))?;
            files.push("plot.gp".to_string());
        }
        Ok(files)
    })?;
    Ok((out, files))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn spectrum(c: &SpectrumConfig, phases: &mut Phases) -> HarnessResult<RunOutput> {
    let grid = LayerGrid::new(c.interfaces.clone(), c.sigma.clone())?;
    let basis = phases.time("eigenvalues", || Ok(eigenbasis(&grid, c.count)?))?;
    let two_layer = c.sigma.len() == 2;
    let variant = match c.first_order {
        FirstOrderVariant::Displayed => FirstOrder::Displayed,
        FirstOrderVariant::Linearized => FirstOrder::Linearized,
    };
    let mut header = vec!["n", "lambda", "residual", "norm"];
    if two_layer {
        header.extend(["lambda0", "lambda1", "rel_err0", "rel_err1"]);
    }
    let mut table = Table::new("spectrum_eigenvalues.csv", &header);
    let (mut worst0, mut worst1): (f64, f64) = (0.0, 0.0);
    phases.time("approximations", || {
        for (i, b) in basis.iter().enumerate() {
            let n = i + 1;
            let mut row = vec![n as f64, b.lambda, eigen_residual(&grid, b.lambda)?, b.norm];
            if two_layer {
                let (s1, s2, l1, l2) = (c.sigma[0], c.sigma[1], grid.len(0), grid.len(1));
                let a0 = lambda_approx(s1, s2, l1, l2, n, 0, variant)?;
                let a1 = lambda_approx(s1, s2, l1, l2, n, 1, variant)?;
                let (e0, e1) = ((a0 - b.lambda).abs() / b.lambda, (a1 - b.lambda).abs() / b.lambda);
                worst0 = worst0.max(e0);
                worst1 = worst1.max(e1);
                row.extend([a0, a1, e0, e1]);
            }
            table.push(&row);
        }
        Ok(())
    })?;
    let mut panels = vec![Panel { title: "eigenvalues".into(), file: table.name.clone(), x: 1, ys: vec![2], logscale_y: false }];
    let mut results = json!({ "count": basis.len(), "lambda_first": basis[0].lambda, "lambda_last": basis[basis.len() - 1].lambda });
    if two_layer {
        panels.push(Panel { title: "relative error of the approximations".into(), file: table.name.clone(), x: 1, ys: vec![7, 8], logscale_y: true });
        results["max_rel_err0"] = json!(worst0);
        results["max_rel_err1"] = json!(worst1);
    }
    Ok(RunOutput { tables: vec![table], panels, results, failed: Vec::new() })
}

fn oit(c: &OitConfig, phases: &mut Phases) -> HarnessResult<RunOutput> {
    let medium = TwoLayerMedium::new(c.interface, c.sigma_minus, c.sigma_plus)?;
    let (lo, hi) = (c.support[0], c.support[1]);
    let f = c.function.evaluator((lo, hi), c.interface);
    let image = phases.time("forward", || Ok(SampledImage::forward(&f, Support { lo, hi }, &medium, c.omega_max, c.panels, c.forward_tol)?))?;
    let mut table = Table::new("oit_round_trip.csv", &["x", "f", "inverse", "error", "truncation"]);
    let xs = linspace(lo, hi, c.points);
    let (mut err2, mut worst): (f64, f64) = (0.0, 0.0);
    phases.time("inverse", || {
        for &x in &xs {
            let inv = oit_inverse(&image, &medium, x, c.inverse_tol)?;
            let e = inv.value - f(x);
            err2 += e * e;
            worst = worst.max(e.abs());
            table.push(&[x, f(x), inv.value, e, inv.truncation]);
        }
        Ok(())
    })?;
    let h = (hi - lo) / (c.points - 1) as f64;
    let results = json!({
        "l2_error": (err2 * h).sqrt(),
        "max_error": worst,
    });
    let panels = vec![
        Panel { title: "function and inverse transform".into(), file: table.name.clone(), x: 1, ys: vec![2, 3], logscale_y: false },
        Panel { title: "round-trip error".into(), file: table.name.clone(), x: 1, ys: vec![4], logscale_y: false },
    ];
    Ok(RunOutput { tables: vec![table], panels, results, failed: Vec::new() })
}

fn mixed(c: &MixedConfig, phases: &mut Phases) -> HarnessResult<RunOutput> {
    let medium = MixedMedium::new(c.interfaces.clone(), c.sigma.clone())?;
    let (lo, hi) = (c.support[0], c.support[1]);
    let g = c.function.evaluator((lo, hi), c.interfaces[0]);
    let mut sifted = Table::new("mixed_sift.csv", &["x0", "g", "sifted", "error"]);
    let mut worst: f64 = 0.0;
    phases.time("sift", || {
        for k in 1..=c.points {
            let x0 = lo + (hi - lo) * k as f64 / (c.points + 1) as f64;
            let v = sift(&medium, &g, (lo, hi), x0, c.omega_max)?;
            worst = worst.max((v - g(x0)).abs());
            sifted.push(&[x0, g(x0), v, v - g(x0)]);
        }
        Ok(())
    })?;
    let mut tables = vec![sifted];
    let mut results = json!({ "max_sift_error": worst });
    if medium.interior_layers() == 1 {
        let mut zeros = Table::new("mixed_zeros.csv", &["n", "k_re", "k_im", "lambda_re", "lambda_im", "det_abs"]);
        phases.time("zeros", || {
            for z in three_layer_zeros(&medium, c.zeros)? {
                let det = det_lambda_star_k(&medium, z.k)?.norm();
                zeros.push(&[z.n as f64, z.k.re, z.k.im, z.lambda.re, z.lambda.im, det]);
            }
            Ok(())
        })?;
        results["zeros"] = json!(zeros.rows.len());
        tables.push(zeros);
    }
    let panels = vec![Panel { title: "sifted test function".into(), file: "mixed_sift.csv".into(), x: 1, ys: vec![2, 3], logscale_y: false }];
    Ok(RunOutput { tables, panels, results, failed: Vec::new() })
}

fn obm(c: &ObmConfig, phases: &mut Phases) -> HarnessResult<RunOutput> {
    let interface = MovingInterface::linear(c.position, c.velocity, c.horizon)?;
    let problem = ObmProblem::new(c.sigma_minus, c.sigma_plus, interface, c.x0)?;
    let grid = TimeGrid::geometric(c.grid.h0, c.grid.h_max, c.grid.ratio, c.horizon)?;
    let trace = phases.time("volterra", || Ok(solve_interface(&problem, &grid)?))?;
    let laplace = if c.laplace {
        Some(phases.time("laplace", || Ok(laplace_route(c.sigma_minus, c.sigma_plus, c.position, c.velocity, c.x0, &grid)?))?)
    } else {
        None
    };
    let mut header = vec!["tau", "y", "phi", "flux"];
    if laplace.is_some() {
        header.extend(["phi_laplace", "flux_laplace"]);
    }
    let mut traces = Table::new("obm_trace.csv", &header);
    let mut gap: f64 = 0.0;
    for (k, &t) in trace.times.iter().enumerate() {
        let mut row = vec![t, c.position + c.velocity * t, trace.phi[k], trace.flux[k]];
        if let Some(l) = &laplace {
            gap = gap.max((l.phi[k] - trace.phi[k]).abs()).max((l.flux[k] - trace.flux[k]).abs());
            row.extend([l.phi[k], l.flux[k]]);
        }
        traces.push(&row);
    }
    let xs = linspace(c.x_range[0], c.x_range[1], c.points);
    let mut density = Table::new("obm_density.csv", &["tau", "x", "g"]);
    let mut masses = Vec::new();
    phases.time("density", || {
        for &tau in &c.profile_times {
            for (x, g) in xs.iter().zip(density_profile(&problem, &trace, tau, &xs)?) {
                density.push(&[tau, *x, g]);
            }
            masses.push(json!({ "tau": tau, "mass": total_mass(&problem, &trace, tau, 1e-10)? }));
        }
        Ok(())
    })?;
    let mut results = json!({ "masses": masses });
    if laplace.is_some() {
        results["max_route_difference"] = json!(gap);
    }
    let mut trace_cols = vec![3];
    if laplace.is_some() {
        trace_cols.push(5);
    }
    let panels = vec![
        Panel { title: "density on the interface".into(), file: traces.name.clone(), x: 1, ys: trace_cols, logscale_y: false },
        Panel { title: "density profiles".into(), file: density.name.clone(), x: 2, ys: vec![3], logscale_y: false },
    ];
    Ok(RunOutput { tables: vec![traces, density], panels, results, failed: Vec::new() })
}

fn multilayer(c: &MultilayerConfig, phases: &mut Phases) -> HarnessResult<RunOutput> {
    let bounds = c
        .interfaces
        .iter()
        .map(|m| {
            let (a, b) = (m.clone(), m.clone());
            MovingInterface::new(move |t| a.y(t), move |t| b.y_prime(t), c.horizon)
        })
        .collect::<layerheat::Result<Vec<_>>>()?;
    let grid = MovingLayerGrid::new(bounds, c.sigma.clone())?;
    let times = TimeGrid::uniform(c.horizon, c.steps)?;
    grid.check_ordering(times.nodes())?;
    let (y0, yn) = (c.interfaces[0].position, c.interfaces[c.interfaces.len() - 1].position);
    let problem = match c.initial {
        InitialData::Sine { mode } => {
            let k = mode as f64 * std::f64::consts::PI / (yn - y0);
            StripProblem::new(grid, move |x| (k * (x - y0)).sin())
        }
        InitialData::Parabola => StripProblem::new(grid, move |x| (x - y0) * (yn - x)),
    };
    let traces = phases.time("volterra", || Ok(interface_volterra(&problem, c.terms, &times)?))?;

    let n = c.interfaces.len();
    let mut header: Vec<String> = vec!["tau".into()];
    for (prefix, _) in [("y", 0), ("value", 1), ("flux", 2)] {
        header.extend((0..n).map(|i| format!("{prefix}_{i}")));
    }
    let mut trace_table = Table::with_header("multilayer_traces.csv", header);
    for (k, &t) in traces.times.iter().enumerate() {
        let mut row = vec![t];
        row.extend(problem.grid.y(t));
        row.extend(&traces.value[k]);
        row.extend(&traces.flux[k]);
        trace_table.push(&row);
    }
    let mut profile = Table::new("multilayer_profile.csv", &["tau", "x", "u", "last_term"]);
    let mut tail: f64 = 0.0;
    phases.time("profiles", || {
        for &tau in &c.profile_times {
            let snap = snapshot(&problem, &traces, c.terms, tau)?;
            let y = problem.grid.y(tau);
            for x in linspace(y[0], y[n - 1], c.points) {
                let v = snap.eval(x);
                tail = tail.max(v.tail);
                profile.push(&[tau, x, v.value, v.tail]);
            }
        }
        Ok(())
    })?;
    let last = traces.times.len() - 1;
    let results = json!({
        "final_values": traces.value[last],
        "final_fluxes": traces.flux[last],
        "max_last_term": tail,
    });
    let panels = vec![
        Panel { title: "interface values".into(), file: trace_table.name.clone(), x: 1, ys: (n + 3..=2 * n).collect(), logscale_y: false },
        Panel { title: "boundary fluxes".into(), file: trace_table.name.clone(), x: 1, ys: (2 * n + 2..=3 * n + 1).collect(), logscale_y: false },
        Panel { title: "profiles".into(), file: profile.name.clone(), x: 2, ys: vec![3], logscale_y: false },
    ];
    Ok(RunOutput { tables: vec![trace_table, profile], panels, results, failed: Vec::new() })
}

fn stefan(c: &StefanRunConfig, phases: &mut Phases) -> HarnessResult<RunOutput> {
    let cfg = c.physics();
    let state = phases.time("march", || Ok(run(&cfg, &c.options())?))?;
    // the similarity front exists only for a freezing configuration
    let mu = similarity_constant(&cfg).ok();
    let mut trace = Table::new(
        "stefan_trace.csv",
        &["tau_s", "y_mm", "y_prime_mm_per_s", "similarity_y_mm", "phi_K_mm_per_s", "interface_residual_K", "jump_rel"],
    );
    // wall times live in their own file so the trace stays reproducible
    let mut timing = Table::new("stefan_timing.csv", &["tau_s", "step_wall_s"]);
    let (mut residual, mut jump, mut slowest): (f64, f64, f64) = (0.0, 0.0, 0.0);
    phases.time("diagnostics", || {
        for st in &state.steps {
            let similarity = mu.map_or(f64::NAN, |m| cfg.y_minus + 2.0 * m * st.tau.sqrt());
            let rel = if st.tau > 0.0 {
                let (left, right) = front_fluxes(&state, st.tau)?;
                let target = cfg.rho_latent * st.y_prime;
                let r = ((left - right) - target).abs() / target.abs();
                jump = jump.max(r);
                residual = residual.max(st.residual);
                slowest = slowest.max(st.wall_seconds);
                r
            } else {
                f64::NAN
            };
            trace.push(&[st.tau, st.y, st.y_prime, similarity, st.phi, st.residual, rel]);
            timing.push(&[st.tau, st.wall_seconds]);
        }
        Ok(())
    })?;
    let mut profile = Table::new("stefan_profile.csv", &["tau_s", "x_mm", "T_K"]);
    phases.time("profiles", || {
        for &tau in &c.profile_times_s {
            for x in linspace(cfg.y_minus, cfg.y_plus, c.profile_points) {
                profile.push(&[tau, x, temperature(&state, tau, x)?]);
            }
        }
        Ok(())
    })?;
    let last = state.last();
    let results = json!({
        "steps": state.steps.len() - 1,
        "final_tau_s": last.tau,
        "final_y_mm": last.y,
        "similarity_y_mm": mu.map(|m| cfg.y_minus + 2.0 * m * last.tau.sqrt()),
        "max_interface_residual_K": residual,
        "max_jump_rel": jump,
        "slowest_step_s": slowest,
    });
    let panels = vec![
        Panel { title: "front position".into(), file: trace.name.clone(), x: 1, ys: vec![2, 4], logscale_y: false },
        Panel { title: "temperature profiles".into(), file: profile.name.clone(), x: 2, ys: vec![3], logscale_y: false },
    ];
    Ok(RunOutput { tables: vec![trace, profile, timing], panels, results, failed: Vec::new() })
}

fn validate(c: &ValidateConfig, phases: &mut Phases) -> HarnessResult<RunOutput> {
    let selected: Vec<&checks::Check> = if c.only.is_empty() {
        checks::CHECKS.iter().collect()
    } else {
        c.only.iter().filter_map(|id| checks::by_id(id)).collect()
    };
    let mut table = Table::new("validate.csv", &["criterion", "part", "passed", "detail", "seconds"]);
    let mut outcomes = Vec::new();
    let mut failed = Vec::new();
    for check in selected {
        let outcome = phases.time(&format!("criterion {}", check.id), || Ok(checks::run_check(check)))?;
        eprintln!("{}", outcome.report());
        for p in &outcome.parts {
            table.push_cells(vec![outcome.id.into(), p.label.clone(), p.passed.to_string(), p.detail.clone(), num(outcome.seconds)]);
        }
        if !outcome.passed() {
            failed.push(outcome.id.to_string());
        }
        outcomes.push(json!({
            "id": outcome.id,
            "title": outcome.title,
            "passed": outcome.passed(),
            "seconds": outcome.seconds,
            "parts": outcome.parts.iter().map(|p| json!({ "label": p.label, "passed": p.passed, "detail": p.detail })).collect::<Vec<_>>(),
        }));
    }
    let results = json!({ "checks": outcomes, "failed": failed });
    Ok(RunOutput { tables: vec![table], panels: Vec::new(), results, failed })
}
