use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cpt_alloc_cli::commands;
use cpt_alloc_cli::{AppError, ConfigError, RunConfig, SweepParam};

#[derive(Parser)]
#[command(name = "cpt-alloc", version, about = "Optimal CPT portfolio policies")]
struct Cli {
    /// Flat `key = value` config file; defaults apply to absent keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `out_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed, overriding `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Backward induction; writes policy.csv.
    Solve,
    /// Monte Carlo wealth paths under the optimal policy.
    Simulate,
    /// Re-solve over a grid of one parameter.
    Sweep {
        /// alpha | mu | sigma | delta | rate-mode
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<String>,
    },
    /// CPT value of a position `amount * y`.
    Value {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        amount: f64,
    },
    /// Precommitted versus time-consistent last-period fractions.
    Demo,
}

fn init_threads() -> Result<(), ConfigError> {
    let Ok(raw) = std::env::var("CPT_ALLOC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| ConfigError::BadValue {
            key: "CPT_ALLOC_THREADS".into(),
            value: raw.clone(),
            reason: "expected a positive integer".into(),
        })?;
    // Fails only if a pool already exists, which cannot happen this early.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn run(cli: Cli) -> Result<(), AppError> {
    init_threads()?;
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli.out.clone().unwrap_or_else(|| cfg.out_dir.clone());
    match cli.command {
        Command::Solve => {
            let p = commands::run_solve(&cfg, &out)?;
            println!("wrote {}", p.display());
        }
        Command::Simulate => {
            for p in commands::run_simulate(&cfg, &out)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Sweep { param, grid } => {
            let param = SweepParam::parse(&param).ok_or_else(|| ConfigError::BadValue {
                key: "param".into(),
                value: param.clone(),
                reason: "expected alpha, mu, sigma, delta or rate-mode".into(),
            })?;
            let p = commands::run_sweep(&cfg, param, &grid, &out)?;
            println!("wrote {}", p.display());
        }
        Command::Value { amount } => {
            let v = commands::run_value(&cfg, amount)?;
            println!("amount = {amount}");
            println!("value = {}", cpt_alloc_core::fmt17(v.value()));
            println!("gain_part = {}", cpt_alloc_core::fmt17(v.gain_part()));
            println!("loss_part = {}", cpt_alloc_core::fmt17(v.loss_part()));
        }
        Command::Demo => {
            let p = commands::run_demo(&cfg, &out)?;
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cpt-alloc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
