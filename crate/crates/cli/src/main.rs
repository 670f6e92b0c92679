use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qrc_core::pipeline::{self, RunConfig, RunOptions};
use qrc_core::readout::FeatureKind;
use qrc_core::QrcError;

#[derive(Parser, Debug)]
#[command(name = "qrc", version, about = "Quantum reservoir readouts for speckle ground-state energies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate (or ingest) the dataset CSV and manifest.
    Generate(Args),
    /// Run the reservoir over the dataset and write feature files.
    Features(Args),
    /// Fit linear readouts on the training split.
    Train(Args),
    /// Evaluate trained readouts and write reports.
    Evaluate(Args),
    /// All of the above, then print a summary table.
    RunAll(Args),
}

#[derive(clap::Args, Debug)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Use only the first M instances.
    #[arg(long, value_name = "M")]
    limit: Option<usize>,
    /// Worker threads (0 = one per core). Overrides the config.
    #[arg(long, value_name = "W")]
    workers: Option<usize>,
    /// Restrict to one readout kind.
    #[arg(long, value_enum)]
    kind: Option<Kind>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Single,
    Two,
}

impl From<Kind> for FeatureKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Single => FeatureKind::Single,
            Kind::Two => FeatureKind::Two,
        }
    }
}

fn run(command: Command) -> qrc_core::Result<()> {
    let (Command::Generate(args)
    | Command::Features(args)
    | Command::Train(args)
    | Command::Evaluate(args)
    | Command::RunAll(args)) = &command;
    let config = RunConfig::load(&args.config)?;
    let opts = RunOptions {
        limit: args.limit,
        workers: args.workers,
        kind: args.kind.map(Into::into),
    };
    if opts.limit == Some(0) {
        return Err(QrcError::InvalidConfig("--limit must be positive".into()));
    }
    match command {
        Command::Generate(_) => {
            pipeline::cmd_generate(&config, &opts)?;
        }
        Command::Features(_) => {
            pipeline::cmd_features(&config, &opts)?;
        }
        Command::Train(_) => {
            for (model, metrics) in pipeline::cmd_train(&config, &opts)? {
                println!("{}: train MAE {:.6e}  R² {:.6}", model.kind, metrics.mae, metrics.r2);
            }
        }
        Command::Evaluate(_) => {
            for report in pipeline::cmd_evaluate(&config, &opts)? {
                println!(
                    "{}: test MAE {:.6e}  R² {:.6}  ({} instances)",
                    report.kind, report.test.mae, report.test.r2, report.n_test
                );
            }
        }
        Command::RunAll(_) => {
            let summary = pipeline::cmd_run_all(&config, &opts)?;
            print!("{}", summary.table());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp_secs()
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
