use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use funnelsim_cli::config::parse_integrator;
use funnelsim_cli::{presets, probe_config, resolve, run_config, CliError, Exit, Overrides, ProbeKind, RunConfig};
use funnelsim_core::Integrator;
use rayon::prelude::*;

#[derive(Parser, Debug)]
#[command(name = "funnelsim", version, about = "Funnel control simulations with operator internal dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate and verify one or more presets or config files.
    Run {
        /// Preset names (paper-sec4, dirac0, delay, bi-form-demo) or config paths.
        #[arg(required = true)]
        targets: Vec<String>,
        /// Output directory; with several targets each gets a subdirectory.
        #[arg(long, env = "FUNNELSIM_OUT", default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, value_parser = parse_integrator)]
        integrator: Option<Integrator>,
        /// Also write plot.svg.
        #[arg(long)]
        svg: bool,
        /// Number of targets run in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Accepted for symmetry with `probe`; runs are deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Empirical checks of the internal operator: causality, bibo or lipschitz.
    Probe {
        target: String,
        probe: ProbeKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a preset's config text.
    Show { preset: String },
}

fn run_one(target: &str, overrides: &Overrides, out: PathBuf, svg: bool) -> Exit {
    let result = resolve(target).map_err(CliError::from).and_then(|mut cfg: RunConfig| {
        cfg.apply(overrides);
        run_config(&cfg, &out, svg)
    });
    match result {
        Ok(outcome) => {
            let stream = if outcome.exit == Exit::Ok { "" } else { "error: " };
            eprintln!("{target}: {stream}{} ({})", outcome.message, out.display());
            outcome.exit
        }
        Err(e) => {
            eprintln!("{target}: error: {e}");
            e.exit()
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let exit = match cli.command {
        Command::Run { targets, out, dt, horizon, integrator, svg, jobs, seed: _ } => {
            let overrides = Overrides { dt, horizon, integrator };
            let dir = |t: &str| {
                if targets.len() == 1 {
                    out.clone()
                } else {
                    out.join(PathBuf::from(t).file_stem().map_or_else(|| t.into(), |s| s.to_os_string()))
                }
            };
            let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build();
            let exits: Vec<Exit> = match pool {
                Ok(pool) => pool.install(|| targets.par_iter().map(|t| run_one(t, &overrides, dir(t), svg)).collect()),
                Err(e) => {
                    eprintln!("error: cannot start worker pool: {e}");
                    vec![Exit::Io]
                }
            };
            exits.into_iter().find(|e| *e != Exit::Ok).unwrap_or(Exit::Ok)
        }
        Command::Probe { target, probe, seed } => {
            match resolve(&target).map_err(CliError::from).and_then(|cfg| probe_config(&cfg, probe, seed)) {
                Ok((text, exit)) => {
                    print!("{text}");
                    exit
                }
                Err(e) => {
                    eprintln!("{target}: error: {e}");
                    e.exit()
                }
            }
        }
        Command::Show { preset } => match presets::text(&preset) {
            Some(text) => {
                print!("{text}");
                Exit::Ok
            }
            None => {
                eprintln!("error: unknown preset '{preset}' ({})", presets::NAMES.join(", "));
                Exit::Config
            }
        },
    };
    ExitCode::from(exit.code() as u8)
}
