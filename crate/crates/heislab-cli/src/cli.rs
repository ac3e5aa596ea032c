//! Argument parsing, dispatch, and the exit-code contract:
//! 0 success, 1 usage/config error, 2 numerical failure,
//! 3 a verification check failed its tolerance.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::{parse_config, Config};
use crate::csvout::{run_csv, sweep_csv, verify_csv};

#[derive(Parser)]
#[command(name = "heislab", version, about = "Degenerate reaction-diffusion laboratory on the Heisenberg group")]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (flat section.key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Per-key overrides, e.g. --set equation.sigma=1.3 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides sweep.master_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides sweep.parallelism.
    #[arg(long)]
    parallel: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the pointwise identities (product rule, decay bound).
    VerifyLemmas {
        #[command(flatten)]
        common: Common,
        /// Sample count for the decay-bound checks.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Check cutoff and capacity scaling exponents.
    VerifyScaling {
        #[command(flatten)]
        common: Common,
    },
    /// Principal Dirichlet eigenpair with structural checks.
    Eigen {
        #[command(flatten)]
        common: Common,
    },
    /// One time integration, emitted as a run CSV.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Exponent/amplitude sweep, emitted as a sweep CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Degenerate-to-porous-medium transform checks.
    TransformCheck {
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common) -> Result<Config, String> {
    let mut text = String::new();
    if let Some(path) = &common.config {
        text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    }
    let mut config = parse_config(&text).map_err(|e| format!("config error: {e}"))?;
    for assignment in &common.sets {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got {assignment:?}"))?;
        config.set(key.trim(), value.trim()).map_err(|e| format!("config error: {e}"))?;
    }
    if let Some(seed) = common.seed {
        config.sweep_master_seed = seed;
    }
    if let Some(parallel) = common.parallel {
        config.sweep_parallelism = parallel;
    }
    config.validate().map_err(|e| format!("config error: {e}"))?;
    Ok(config)
}

fn emit(common: &Common, content: &str) -> Result<(), String> {
    match &common.out {
        Some(path) => fs::write(path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

pub fn run_cli(args: Vec<String>) -> i32 {
    let parsed = match CliArgs::try_parse_from(args) {
        Ok(p) => p,
        Err(e) => {
            // clap handles --help/--version with success-style exits
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };

    let (common, result): (&Common, Result<(String, bool), heislab::Error>) = match &parsed.command
    {
        Command::VerifyLemmas { common, samples } => {
            let config = match load_config(common) {
                Ok(c) => c,
                Err(msg) => return usage_error(&msg),
            };
            let rows = commands::cmd_verify_lemmas(*samples, config.sweep_master_seed);
            (
                common,
                rows.map(|r| {
                    let all_pass = r.iter().all(|row| row.pass);
                    (verify_csv(&config.echo(), &r), all_pass)
                }),
            )
        }
        Command::VerifyScaling { common } => {
            let config = match load_config(common) {
                Ok(c) => c,
                Err(msg) => return usage_error(&msg),
            };
            let rows = commands::cmd_verify_scaling();
            (
                common,
                rows.map(|r| {
                    let all_pass = r.iter().all(|row| row.pass);
                    (verify_csv(&config.echo(), &r), all_pass)
                }),
            )
        }
        Command::Eigen { common } => {
            let config = match load_config(common) {
                Ok(c) => c,
                Err(msg) => return usage_error(&msg),
            };
            let rows = commands::cmd_eigen(&config);
            (
                common,
                rows.map(|r| {
                    let all_pass = r.iter().all(|row| row.pass);
                    (verify_csv(&config.echo(), &r), all_pass)
                }),
            )
        }
        Command::Run { common } => {
            let config = match load_config(common) {
                Ok(c) => c,
                Err(msg) => return usage_error(&msg),
            };
            let record = commands::cmd_run(&config);
            (common, record.map(|rec| (run_csv(&config.echo(), &rec), true)))
        }
        Command::Sweep { common } => {
            let config = match load_config(common) {
                Ok(c) => c,
                Err(msg) => return usage_error(&msg),
            };
            let rows = commands::cmd_sweep(&config, config.sweep_parallelism);
            (common, rows.map(|r| (sweep_csv(&config.echo(), &r), true)))
        }
        Command::TransformCheck { common } => {
            let config = match load_config(common) {
                Ok(c) => c,
                Err(msg) => return usage_error(&msg),
            };
            let rows = commands::cmd_transform_check(&config);
            (
                common,
                rows.map(|r| {
                    let all_pass = r.iter().all(|row| row.pass);
                    (verify_csv(&config.echo(), &r), all_pass)
                }),
            )
        }
    };

    match result {
        Ok((content, all_pass)) => {
            if let Err(msg) = emit(common, &content) {
                eprintln!("{msg}");
                return 1;
            }
            if all_pass {
                0
            } else {
                3
            }
        }
        Err(e) => {
            eprintln!("numerical failure: {e}");
            2
        }
    }
}

fn usage_error(msg: &str) -> i32 {
    eprintln!("{msg}");
    1
}
