use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use rinorm::error::Error;
use rinorm::experiment::{run_to_dir, ExperimentConfig, EXPERIMENTS};

/// Experiment runner: evaluates norm comparisons for families of
/// independent random variables and writes results.csv + summary.json.
#[derive(Debug, Parser)]
#[command(name = "rinorm", version)]
struct Args {
    /// Experiment config file (JSON)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,

    /// Override samples per batch
    #[arg(long)]
    samples: Option<usize>,

    /// Output directory (default: config `out`, else runs/<experiment>)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the experiment name
    #[arg(long)]
    experiment: Option<String>,

    /// Print the experiment registry and exit
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list {
        for name in EXPERIMENTS {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    let Some(path) = &args.config else {
        eprintln!("error: --config PATH is required (or use --list)");
        return ExitCode::from(2);
    };
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg: ExperimentConfig = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: malformed config: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        cfg.mc.seed = seed;
    }
    if let Some(samples) = args.samples {
        cfg.mc.samples_per_batch = samples;
    }
    if let Some(experiment) = &args.experiment {
        cfg.experiment = experiment.clone();
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let out_dir = args
        .out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(&cfg.experiment));
    match run_to_dir(&cfg, &out_dir) {
        Ok(art) => {
            println!("wrote {}", art.csv_path.display());
            println!("wrote {}", art.summary_path.display());
            if art.pass {
                println!("PASS {}", cfg.experiment);
                ExitCode::SUCCESS
            } else {
                for row in &art.failing_rows {
                    eprintln!("FAIL {}: {row}", cfg.experiment);
                }
                ExitCode::from(1)
            }
        }
        Err(e @ (Error::UnknownExperiment(_) | Error::Config(_) | Error::Json(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
