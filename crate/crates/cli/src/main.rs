use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use u2_experiments::{execute, CliError, Experiment, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(
    name = "u2-experiments",
    version,
    about = "Run a U(2) estimation experiment and write CSV + SVG"
)]
struct Args {
    /// fim-scan, fim-diag, mle-vs-m, mle-vs-n or singularity-scan
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output_dir`; defaults to the current directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `trials`.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    quiet: bool,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn run(args: Args) -> Result<Vec<PathBuf>, CliError> {
    let experiment: Experiment = args.experiment.parse()?;
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(out) = args.out {
        config.output_dir = Some(out);
    }
    let dir = config
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("."));
    execute(experiment, &config, &dir, args.threads)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let line = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("config: {}", line.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    let quiet = args.quiet;
    match run(args) {
        Ok(paths) => {
            if !quiet {
                for p in paths {
                    println!("{}", p.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
