//! Command-line driver: resolves a [`RunConfig`], runs one analysis and
//! writes CSV/JSON datasets into the output directory.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 numeric failure.

pub mod config;
pub mod output;
pub mod recipes;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use borerdyn::analysis::{largest_lyapunov, sweep};
use borerdyn::equilibria::{equilibrium, EquilibriumLabel};
use borerdyn::integrate::{integrate, integrate_discard_transient};
use borerdyn::stability::{classify, hopf_alpha_c, lyapunov_global_check};
use clap::{Parser, Subcommand};
use serde_json::json;
use thiserror::Error;

pub use config::{ConfigBuilder, Diagnostic, RunConfig};

/// Environment variable naming a config file applied before `--config`.
pub const SEED_CONFIG_ENV: &str = "BORERDYN_SEED_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "borerdyn", version, about = "Sugarcane borer and parasitoid population dynamics")]
struct Cli {
    /// Config file (flat `key = value` or JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set alpha=1e-4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = ".", global = true)]
    out: PathBuf,
    /// Worker threads for parallel sweeps (0 = all cores).
    #[arg(long, default_value_t = 0, global = true)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one trajectory -> trajectory.csv
    Simulate {
        /// Days integrated and dropped before recording.
        #[arg(long, default_value_t = 0.0)]
        discard: f64,
    },
    /// Equilibria E1..E5 at the constant rate r0 -> equilibria.json
    Equilibria,
    /// Stability table row and eigenvalues -> stability.json
    Stability,
    /// Hopf critical value of alpha -> hopf.json
    Hopf,
    /// Bifurcation sweep -> sweep.csv, summary.json
    Sweep,
    /// Largest Lyapunov exponent -> lyapunov.json
    Lyapunov,
    /// Regenerate one canned figure dataset (fig1 .. fig9).
    Reproduce { figure: String },
    /// Print the resolved config as JSON.
    Config,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", .0.iter().map(|d| format!("config error: {d}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<Diagnostic>),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Model(#[from] borerdyn::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if e.is_numeric() => 2,
            _ => 1,
        }
    }
}

/// Run the CLI on `argv` (including the program name); returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

/// Defaults, then the seed config, then `--config`, then `--set`.
fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut b = ConfigBuilder::default();
    if let Some(p) = std::env::var_os(SEED_CONFIG_ENV).filter(|p| !p.is_empty()) {
        b.file(Path::new(&p)).map_err(CliError::Config)?;
    }
    if let Some(p) = &cli.config {
        b.file(p).map_err(CliError::Config)?;
    }
    let mut errs = Vec::new();
    for s in &cli.sets {
        match s.split_once('=') {
            Some((k, v)) => {
                if let Err(d) = b.set(k.trim(), v.trim()) {
                    errs.push(d);
                }
            }
            None => errs.push(Diagnostic {
                field: s.clone(),
                message: "expected KEY=VALUE".into(),
            }),
        }
    }
    if !errs.is_empty() {
        return Err(CliError::Config(errs));
    }
    b.build().map_err(CliError::Config)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve(cli)?;
    if let Command::Config = cli.command {
        print!("{}", output::to_json(&cfg));
        return Ok(());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    std::fs::create_dir_all(&cli.out)?;
    pool.install(|| dispatch(&cli.command, &cfg, &cli.out))?;
    output::write_json(&cli.out.join("config.json"), &cfg)?;
    Ok(())
}

fn dispatch(cmd: &Command, cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let p = &cfg.params;
    match cmd {
        Command::Simulate { discard } => {
            let traj = if *discard > 0.0 {
                let window = cfg.integration.t_end - cfg.integration.t_start;
                integrate_discard_transient(p, &cfg.x0, *discard, window, &cfg.integration)?
            } else {
                integrate(p, &cfg.x0, &cfg.integration)?
            };
            output::write_trajectory(&out.join("trajectory.csv"), &traj)?;
            report(out, &["trajectory.csv"]);
        }
        Command::Equilibria => {
            let list: Vec<_> = EquilibriumLabel::ALL
                .iter()
                .map(|&l| match equilibrium(l, p, p.r0) {
                    Ok(r) => serde_json::to_value(r).expect("report serializes"),
                    Err(e) => json!({ "label": l, "error": e.to_string() }),
                })
                .collect();
            output::write_json(&out.join("equilibria.json"), &json!({ "r": p.r0, "equilibria": list }))?;
            report(out, &["equilibria.json"]);
        }
        Command::Stability => {
            let table = classify(p, p.r0);
            let check = lyapunov_global_check(p, p.r0, p.alpha, None).ok();
            output::write_json(
                &out.join("stability.json"),
                &json!({ "table": table, "lyapunov_function_check": check }),
            )?;
            report(out, &["stability.json"]);
        }
        Command::Hopf => {
            let h = hopf_alpha_c(p, p.r0)?;
            output::write_json(&out.join("hopf.json"), &h)?;
            report(out, &["hopf.json"]);
        }
        Command::Sweep => {
            let res = sweep(p, &cfg.x0, &cfg.integration, &cfg.sweep, &cfg.analysis)?;
            let tol = cfg.analysis.cluster_tol;
            output::write_sweep(&out.join("sweep.csv"), &res, cfg.analysis.var_index, tol)?;
            output::write_json(&out.join("summary.json"), &output::sweep_summary(&res))?;
            report(out, &["sweep.csv", "summary.json"]);
        }
        Command::Lyapunov => {
            let est = largest_lyapunov(p, &cfg.x0, &cfg.integration, &cfg.analysis.lyapunov)?;
            output::write_json(&out.join("lyapunov.json"), &est)?;
            report(out, &["lyapunov.json"]);
        }
        Command::Reproduce { figure } => {
            let recipe = recipes::Recipe::from_name(figure).ok_or_else(|| {
                CliError::Usage(format!("unknown figure `{figure}` (expected fig1 .. fig9)"))
            })?;
            let files = recipes::run(recipe, cfg, out)?;
            let names: Vec<&str> = files.iter().map(String::as_str).collect();
            report(out, &names);
        }
        Command::Config => unreachable!("handled before dispatch"),
    }
    Ok(())
}

fn report(out: &Path, files: &[&str]) {
    for f in files {
        println!("wrote {}", out.join(f).display());
    }
}
