#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cache;
mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use aaklab::num::Mp;
use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{Experiment, Precision};
use crate::run::{RunError, Runner};

#[derive(Parser)]
#[command(name = "aaklab", version, about = "Rational approximation experiments on the unit disk")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    cache: Option<Switch>,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = default_jobs())]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Check the configuration and exit.
    Validate,
    /// Compute the extremal cut.
    Cut,
    /// Degree sweeps and rates.csv.
    Rates,
    /// Degree sweeps with pole tables.
    Poles,
    /// Cut plus capacity map.
    Capmap,
    /// Full experiment with diagnostics and summary.
    Run,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn load(path: Option<&PathBuf>) -> Result<Experiment, String> {
    let path = path.ok_or("missing --config")?;
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    config::load(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn fail(e: RunError, config: &std::path::Path) -> ExitCode {
    match e {
        RunError::Stage { .. } => {
            eprintln!("error: {e} [config {}]", config.display());
            ExitCode::from(EXIT_NUMERIC)
        }
        RunError::Io(_) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}

fn dispatch<R: aaklab::num::Real>(runner: &Runner, command: &Command) -> Result<(), RunError> {
    match command {
        Command::Validate => Ok(()),
        Command::Cut => runner.cut().map(|c| {
            if let Some(c) = c {
                println!("capacity {:.15}", c.capacity());
            } else {
                println!("no cut: function has no branch points");
            }
        }),
        Command::Rates | Command::Poles => {
            let cut = runner.cut()?;
            let mut all = Vec::new();
            for gi in 0..runner.exp.generators.len() {
                all.push(runner.sweep::<R>(gi, cut.as_ref())?);
            }
            let fits = runner.write_rates(&all)?;
            for (recs, fit) in all.iter().zip(fits) {
                let label = &recs.first().map(|r| r.generator.clone()).unwrap_or_default();
                match fit {
                    Some(f) => println!("{label}: fitted limit {:.6e} over n in {:?}", f.limit, f.window),
                    None => println!("{label}: too few trusted degrees to fit"),
                }
            }
            Ok(())
        }
        Command::Capmap => {
            let Some(cut) = runner.cut()? else {
                println!("no cut: function has no branch points");
                return Ok(());
            };
            if let Some(s) = runner.capmap::<R>(&cut)? {
                println!("{} n={} median {:.4e} p90 {:.4e} masked {:.3}", s.generator, s.n, s.median_dev, s.p90_dev, s.masked_fraction);
            }
            Ok(())
        }
        Command::Run => {
            let s = runner.run::<R>()?;
            for c in &s.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("{} passed, {} failed", s.passed, s.failed);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exp = match load(cli.config.as_ref()) {
        Ok(e) => e,
        Err(msg) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let config_path = cli.config.clone().unwrap_or_default();
    if matches!(cli.command, Command::Validate) {
        println!("ok: {} with {} generators, n in {}..={}", exp.spec.kind, exp.generators.len(), exp.config.sweep.n_min, exp.config.sweep.n_max);
        return ExitCode::SUCCESS;
    }
    let out = cli.out.clone().unwrap_or_else(|| exp.config.output.clone());
    let cache_on = match cli.cache {
        Some(Switch::On) => true,
        Some(Switch::Off) => false,
        None => exp.config.cache,
    };
    let runner = match Runner::new(&exp, out, cache_on, cli.jobs) {
        Ok(r) => r,
        Err(e) => return fail(e, &config_path),
    };
    let result = match exp.config.precision {
        Precision::F64 => dispatch::<f64>(&runner, &cli.command),
        Precision::Mp => dispatch::<Mp>(&runner, &cli.command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e, &config_path),
    }
}
