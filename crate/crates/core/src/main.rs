use clap::Parser;
use ds3::cli::{self, ExperimentKind};
use std::path::PathBuf;
use std::process::ExitCode;

/// Compute-scaling calculus engine: closed-form inference-strategy laws,
/// a seeded skill-walk oracle, skill-graph training model, compute
/// allocation, and pass@k / majority-voting analysis.
#[derive(Parser, Debug)]
#[command(name = "ds3", version, about)]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: ExperimentKind,

    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,

    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory (overrides config and DS3_OUT_DIR).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Dotted-path config overrides, e.g. --set params.trials=1000.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = (|| {
        let mut tree = cli::load_config(&args.config)?;
        for assignment in &args.sets {
            cli::apply_override(&mut tree, assignment)?;
        }
        cli::run(tree, Some(args.experiment), args.seed, args.out.clone())
    })();
    match result {
        Ok(summary) => {
            println!(
                "{}: {} rows -> {}",
                summary.experiment.name(),
                summary.rows,
                summary.result_csv.display()
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
