use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use surco_cli::config::parse_methods;
use surco_cli::{CliError, CliResult, ExperimentConfig, Overrides};
use surco_core::instances::DeadlineRegime;

#[derive(Parser)]
#[command(name = "surco", version, about = "Surrogate-cost optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated methods: zero, prior, hybrid, heuristic, oracle, let.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Deadline regime: loose, normal or tight.
    #[arg(long, global = true)]
    regime: Option<String>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write train and test instance files.
    Generate,
    /// Run the configured methods on the test instances and write results.csv.
    Run,
    /// Train the cost network on the training instances.
    TrainPrior,
    /// Write the cover, sample-size and Lipschitz tables to theory.csv.
    Theory,
    /// Check the config, and the instance files and model when present.
    Validate,
}

fn execute(cli: &Cli) -> CliResult<String> {
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        methods: cli.method.as_deref().map(parse_methods).transpose()?,
        regime: cli
            .regime
            .as_deref()
            .map(|r| r.parse::<DeadlineRegime>().map_err(|e| CliError::Config(e.to_string())))
            .transpose()?,
        jobs: cli.jobs,
    };
    let cfg = ExperimentConfig::load(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Generate => surco_cli::cmd_generate(&cfg),
        Command::Run => surco_cli::cmd_run(&cfg),
        Command::TrainPrior => surco_cli::cmd_train_prior(&cfg),
        Command::Theory => surco_cli::cmd_theory(&cfg),
        Command::Validate => surco_cli::cmd_validate(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
