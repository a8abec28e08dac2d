use std::path::PathBuf;
use std::process::ExitCode;

use adiabat_cli::config::ExperimentConfig;
use adiabat_cli::presets::{preset, PRESET_NAMES};
use adiabat_cli::runner::{run_checks, run_config, run_preset, RunReport, Settings};
use adiabat_cli::{CliError, EXIT_CONFIG, EXIT_FAILURE, EXIT_OK};
use clap::{Args, Parser, Subcommand};

/// Exact versus adiabatic Lindblad evolution: sweeps and consistency checks.
#[derive(Parser)]
#[command(name = "adiabat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a JSON config and write CSV tables.
    Run {
        /// Named preset.
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        preset: Option<String>,
        /// JSON experiment config.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the time step.
        #[arg(long)]
        dt: Option<f64>,
        /// Override the random model seed.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run every consistency check.
    Check {
        #[arg(long, required = true)]
        all: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory; defaults to the config's `outputs` or `out/<name>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit the generation time stamp so reruns are byte-identical.
    #[arg(long)]
    no_timestamp: bool,
}

/// Worker count from ADIABAT_THREADS, if set.
fn threads() -> Result<Option<usize>, CliError> {
    match std::env::var("ADIABAT_THREADS") {
        Ok(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("ADIABAT_THREADS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn settings(output: OutputArgs, fallback: PathBuf) -> Result<Settings, CliError> {
    Ok(Settings { out: output.out.unwrap_or(fallback), timestamp: !output.no_timestamp, threads: threads()? })
}

fn execute(command: Command) -> Result<RunReport, CliError> {
    match command {
        Command::Run { preset: name, config, dt, seed, output } => {
            if let Some(name) = name {
                let mut p = preset(&name).ok_or_else(|| {
                    CliError::Config(format!("unknown preset {name:?}; expected one of {}", PRESET_NAMES.join(", ")))
                })?;
                if let Some(dt) = dt {
                    p.config.dt = dt;
                }
                if let Some(seed) = seed {
                    p.config.seed = seed;
                }
                let settings = settings(output, PathBuf::from("out").join(p.name))?;
                run_preset(&p, &settings)
            } else {
                let path = config.expect("clap requires --preset or --config");
                let mut c = ExperimentConfig::from_file(&path)?;
                if let Some(dt) = dt {
                    c.dt = dt;
                }
                if let Some(seed) = seed {
                    c.seed = seed;
                }
                let fallback = c.outputs.clone().unwrap_or_else(|| PathBuf::from("out").join("config"));
                let settings = settings(output, fallback)?;
                run_config(&c, &settings)
            }
        }
        Command::Check { output, .. } => run_checks(&settings(output, PathBuf::from("out").join("check"))?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    match execute(cli.command) {
        Ok(report) => {
            for a in &report.assertions {
                println!("{}", a.line());
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(if report.passed() { EXIT_OK } else { EXIT_FAILURE } as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
