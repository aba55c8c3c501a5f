use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use viability_cli::commands::{cmd_learn, cmd_oracle, cmd_sweep, parse_seeds, print_report};
use viability_cli::config::ExperimentConfig;
use viability_cli::render::{render_field, render_run};
use viability_cli::AppError;

/// Viability kernels, safety measures, and safe active learning for
/// simulated dynamical systems.
#[derive(Parser)]
#[command(name = "viab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute exact ground truth (viable sets and measures) by brute force.
    Oracle {
        /// Experiment configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config and VIAB_OUT).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the safe active learner and score it against the oracle files.
    Learn {
        #[arg(long)]
        config: PathBuf,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip scoring (no oracle files needed).
        #[arg(long)]
        no_score: bool,
    },
    /// Run one learning run per seed and aggregate the scores.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated seeds, e.g. 0,1,2,3.
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_score: bool,
    },
    /// Render snapshots of a learning run, or a single field CSV, as PNGs.
    Render {
        /// Learning-run directory (e.g. runs/h/learn/seed-0).
        #[arg(long, conflicts_with = "field", required_unless_present = "field")]
        run: Option<PathBuf>,
        /// Single field CSV to render as a heatmap.
        #[arg(long)]
        field: Option<PathBuf>,
        /// Output directory (default: next to the input).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Oracle { config, out } => {
            let config = ExperimentConfig::load(&config)?;
            let dir = cmd_oracle(&config, out.as_deref())?;
            println!("oracle files written to {}", dir.display());
        }
        Command::Learn { config, seed, out, no_score } => {
            let config = ExperimentConfig::load(&config)?;
            let outputs = cmd_learn(&config, seed, out.as_deref(), no_score)?;
            println!("learning run written to {}", outputs.run_dir.display());
            if let Some(report) = &outputs.report {
                print_report(&mut std::io::stdout(), report)
                    .map_err(|e| AppError::Runtime(e.to_string()))?;
            }
        }
        Command::Sweep { config, seeds, out, no_score } => {
            let config = ExperimentConfig::load(&config)?;
            let seeds = parse_seeds(&seeds)?;
            let (path, aggregate) = cmd_sweep(&config, &seeds, out.as_deref(), no_score)?;
            println!("sweep aggregate written to {}", path.display());
            if let Some(rate) = &aggregate.failure_rate {
                println!(
                    "failure rate: median {:.3} (IQR {:.3}..{:.3}, {} runs)",
                    rate.median, rate.q1, rate.q3, rate.count
                );
            }
            for row in aggregate.rows.iter().filter(|r| r.error.is_some()) {
                eprintln!("seed {} failed: {}", row.seed, row.error.as_deref().unwrap());
            }
        }
        Command::Render { run, field, out } => {
            if let Some(csv) = field {
                let out_path = match &out {
                    Some(dir) => {
                        std::fs::create_dir_all(dir).map_err(|e| {
                            AppError::Runtime(format!("cannot create {}: {e}", dir.display()))
                        })?;
                        dir.join(csv.with_extension("png").file_name().unwrap())
                    }
                    None => csv.with_extension("png"),
                };
                render_field(&csv, &out_path)?;
                println!("wrote {}", out_path.display());
            } else {
                let run_dir = run.expect("clap enforces run xor field");
                let out_dir = out.unwrap_or_else(|| run_dir.join("render"));
                let images = render_run(&run_dir, &out_dir)?;
                for image in &images {
                    println!(
                        "wrote {} ({} samples, {} failures)",
                        image.path.display(),
                        image.samples_drawn,
                        image.failures_drawn
                    );
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
