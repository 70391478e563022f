//! Argument parsing and the run sequence: load and resolve the config, size
//! the worker pool, run, write the summary, map failures to exit codes.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use crate::config::{Problem, RunConfig};
use crate::error::{HarnessError, HarnessResult};
use crate::output::{write_text, Phase, Phases};
use crate::runners::execute;

#[derive(Debug, Parser)]
#[command(name = "layerheat", version, about = "Heat conduction in layered media with moving interfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON run configuration; defaults for the subcommand when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory (created if missing).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads for the parallel loops inside the solvers.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,

    /// Run single-threaded so every floating-point reduction has a fixed order.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Eigenvalues of a layered strip and the two-layer approximations.
    Spectrum,
    /// Forward and inverse oscillating transform of a test function.
    Oit,
    /// Sifting through the mixed-spectrum representation.
    Mixed,
    /// Transition density with a moving variance switch.
    Obm,
    /// Strip with moving interior interfaces.
    Multilayer,
    /// Two-phase freezing slab.
    Stefan,
    /// Run the acceptance checks; exits nonzero if any fails.
    Validate,
}

impl Command {
    pub fn problem(self) -> Problem {
        match self {
            Command::Spectrum => Problem::Spectrum,
            Command::Oit => Problem::Oit,
            Command::Mixed => Problem::Mixed,
            Command::Obm => Problem::Obm,
            Command::Multilayer => Problem::Multilayer,
            Command::Stefan => Problem::Stefan,
            Command::Validate => Problem::Validate,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub layerheat: &'static str,
    pub harness: &'static str,
    pub modules: &'static [&'static str],
}

pub const VERSIONS: Versions = Versions { layerheat: layerheat::VERSION, harness: env!("CARGO_PKG_VERSION"), modules: layerheat::MODULES };

/// Contents of `summary.json`, also printed as one line on stdout.
#[derive(Debug, Serialize)]
pub struct Summary {
    pub problem: &'static str,
    pub status: &'static str,
    pub config_hash: String,
    pub versions: &'static Versions,
    pub threads: usize,
    pub deterministic: bool,
    pub phases: Vec<Phase>,
    pub outputs: Vec<String>,
    pub results: Value,
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args(args: impl IntoIterator<Item = OsString>) -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).format_target(false).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version requests are not failures
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{e}");
            e.exit_code()
        }
    }
}

fn load(cli: &Cli) -> HarnessResult<RunConfig> {
    let problem = cli.command.problem();
    let cfg = match &cli.config {
        Some(path) => {
            log::info!("config {}", path.display());
            RunConfig::load(path)?
        }
        None => {
            log::info!("no --config given, using the {} defaults", problem.name());
            RunConfig::default_for(problem)
        }
    };
    cfg.resolve(problem)
}

fn threads(cli: &Cli) -> usize {
    let n = if cli.deterministic {
        if cli.threads.is_some_and(|t| t > 1) {
            log::warn!("--deterministic overrides --threads; running on one thread");
        }
        1
    } else {
        cli.threads.map_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()), |t| t as usize)
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        // only reachable when the pool was already built in this process
        log::warn!("worker pool unchanged: {e}");
    }
    rayon::current_num_threads()
}

fn output_dir(cli: &Cli, cfg: &RunConfig) -> HarnessResult<PathBuf> {
    let dir = cli.out.clone().or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("layerheat-out"));
    std::fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
    Ok(dir)
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> HarnessResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Numeric(format!("serializing {name}: {e}")))?;
    write_text(dir, name, &(text + "\n")).map(|_| ())
}

fn run(cli: &Cli) -> HarnessResult<()> {
    let mut phases = Phases::default();
    let cfg = phases.time("config", || load(cli))?;
    let hash = cfg.hash();
    log::info!("config hash sha256:{hash}");
    log::info!(
        "layerheat {} (modules {}), layerheat-harness {}",
        VERSIONS.layerheat,
        VERSIONS.modules.join(", "),
        VERSIONS.harness
    );
    let threads = threads(cli);
    log::info!("threads {threads}{}", if cli.deterministic { " (deterministic)" } else { "" });
    let dir = output_dir(cli, &cfg)?;
    write_json(&dir, "config.resolved.json", &cfg)?;

    let (out, mut outputs) = execute(&cfg, &dir, &mut phases)?;
    outputs.insert(0, "config.resolved.json".to_string());
    outputs.push("summary.json".to_string());
    let summary = Summary {
        problem: cfg.problem.name(),
        status: if out.failed.is_empty() { "ok" } else { "failed" },
        config_hash: hash,
        versions: &VERSIONS,
        threads,
        deterministic: cli.deterministic,
        phases: phases.done,
        outputs,
        results: out.results,
    };
    write_json(&dir, "summary.json", &summary)?;
    println!("{}", serde_json::to_string(&summary).map_err(|e| HarnessError::Numeric(e.to_string()))?);
    log::info!("wrote {} files to {}", summary.outputs.len(), dir.display());
    if out.failed.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::Checks(out.failed))
    }
}
