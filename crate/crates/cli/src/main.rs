use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use evscale_cli::config::{validate_config, RunConfig};
use evscale_cli::study::run_study;
use evscale_cli::CliError;

#[derive(Parser)]
#[command(
    name = "evscale",
    version,
    about = "Optimize an EV powertrain design over a drive cycle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a proportional/combined scaling study
    Run {
        /// Config file (flat key = value text); defaults apply without one
        #[arg(long)]
        config: Option<PathBuf>,
        /// Drive-cycle file (two columns: time, speed)
        #[arg(long)]
        cycle: Option<PathBuf>,
        /// Unit of the cycle's speed column
        #[arg(long, value_parser = ["kmh", "ms"])]
        speed_unit: Option<String>,
        /// Which study to run
        #[arg(long, value_parser = ["proportional", "combined", "both"])]
        mode: Option<String>,
        /// Optimizer iterations after the initial batch
        #[arg(long)]
        iters: Option<usize>,
        /// Seed or comma-separated seed list
        #[arg(long)]
        seed: Option<String>,
        /// Resample step, seconds
        #[arg(long)]
        dt: Option<f64>,
        /// Output directory (one subdirectory per run)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep the per-step trace of the best design
        #[arg(long)]
        trace: bool,
        /// Run seeds concurrently
        #[arg(long)]
        parallel_seeds: bool,
    },
    /// Check a config file and report unknown keys, filled defaults and
    /// widened bounds
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn dispatch() -> Result<ExitCode, CliError> {
    match Cli::parse().command {
        Command::Run {
            config,
            cycle,
            speed_unit,
            mode,
            iters,
            seed,
            dt,
            out,
            trace,
            parallel_seeds,
        } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = fs::read_to_string(&path).map_err(|source| CliError::Io {
                        path: path.display().to_string(),
                        source,
                    })?;
                    RunConfig::from_text(&text)?
                }
                None => RunConfig::default(),
            };
            if let Some(v) = cycle {
                cfg.set_from_cli("run.cycle", &v.display().to_string())?;
            }
            if let Some(v) = speed_unit {
                cfg.set_from_cli("run.speed_unit", &v)?;
            }
            if let Some(v) = mode {
                cfg.set_from_cli("run.mode", &v)?;
            }
            if let Some(v) = iters {
                cfg.set_from_cli("run.iterations", &v.to_string())?;
            }
            if let Some(v) = seed {
                cfg.set_from_cli("run.seeds", &v)?;
            }
            if let Some(v) = dt {
                cfg.set_from_cli("run.dt", &v.to_string())?;
            }
            if let Some(v) = out {
                cfg.set_from_cli("run.out", &v.display().to_string())?;
            }
            if trace {
                cfg.set_from_cli("run.trace", "true")?;
            }
            if parallel_seeds {
                cfg.set_from_cli("run.parallel_seeds", "true")?;
            }

            let outcome = run_study(&cfg)?;
            for run in &outcome.runs {
                match run.result.best() {
                    Some(best) => println!(
                        "{} seed {}: best {:.4} MJ -> {}",
                        run.mode.label(),
                        run.seed,
                        best.e_ac / 1e6,
                        run.dir.display()
                    ),
                    None => println!(
                        "{} seed {}: no feasible design -> {}",
                        run.mode.label(),
                        run.seed,
                        run.dir.display()
                    ),
                }
            }
            println!("study files in {}", outcome.out_dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let text = fs::read_to_string(&config).map_err(|source| CliError::Io {
                path: config.display().to_string(),
                source,
            })?;
            let (_, report) = validate_config(&text)?;
            print!("config: {}\n{}", config.display(), report.render());
            if report.is_clean() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
    }
}
