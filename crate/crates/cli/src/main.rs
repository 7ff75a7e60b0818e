mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{parse_grid, parse_schedule, Config, GridSpec};
use crate::error::{CliError, Result};
use crate::output::OutDir;

/// Optimal limited-duration quarantine for the SIR model.
#[derive(Debug, Parser)]
#[command(name = "quarantine", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON model configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Schedule "t1,eta" replacing the config's (or, for verify, the planner's).
    #[arg(long, global = true, value_parser = parse_schedule)]
    schedule_override: Option<(f64, f64)>,

    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one schedule and write the trajectory.
    Simulate,
    /// Compute the optimal schedule.
    Plan,
    /// Plan over a grid of duration bounds.
    Sweep {
        /// Duration bounds "start:stop:count".
        #[arg(long, value_parser = parse_grid, default_value = "10:400:40")]
        grid: GridSpec,
    },
    /// Check a schedule against the oracle and the maximum principle.
    Verify,
    /// Brute-force grid search with refinement.
    Oracle,
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let config = Config::load(&path)?;
    let out = OutDir::create(&cli.out)?;
    match cli.command {
        Command::Simulate => {
            let s = commands::simulate(&config, cli.schedule_override, &out)?;
            println!("x_inf = {}  J = {}", s.x_inf, s.j);
        }
        Command::Plan => {
            let p = commands::plan_cmd(&config, &out)?;
            let case = p.case_id.map_or("-".to_string(), |c| c.to_string());
            println!("t* = {}  eta* = {}  case {}  J* = {}", p.t_star, p.eta_star, case, p.j_star);
            if let Some(reason) = &p.fallback_reason {
                println!("oracle fallback: {reason}");
            }
        }
        Command::Sweep { grid } => {
            let s = commands::sweep(&config, grid, &out)?;
            println!(
                "{} bounds  tau_bar = {:?}  tau_tilde = {:?}  t_tilde = {:?}",
                s.taus.len(),
                s.tau_bar,
                s.tau_tilde,
                s.t_tilde
            );
        }
        Command::Verify => {
            let r = commands::verify(&config, cli.schedule_override, &out)?;
            if !r.passed {
                return Err(CliError::Verification(r.failed_checks()));
            }
            println!("verified ({}, {})", r.schedule.t1, r.schedule.eta);
        }
        Command::Oracle => {
            let o = commands::oracle_cmd(&config, &out)?;
            println!("refined ({}, {})  J = {}", o.refined.t1, o.refined.eta, o.refined_j);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("quarantine: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
