//! `ids`: prepare, select, evaluate and compare intrusion-detection models.
//!
//! Exit codes: 0 on success, 1 for configuration problems (including bad
//! arguments and a locked output directory), 2 for data errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ids_core::exec;
use ids_core::harness::{self, ConfigFile, ExperimentConfig};
use ids_core::Error;

#[derive(Parser, Debug)]
#[command(name = "ids", version, about = "GA feature selection and ensemble evaluation for intrusion detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Clean, encode, subsample and scale the dataset.
    Prep(CommonArgs),
    /// Run GA feature selection on the prepared table.
    Select(CommonArgs),
    /// Cross-validate the configured classifier on the reduced table.
    Eval(CommonArgs),
    /// Grid-search learner hyperparameters.
    Gridsearch(CommonArgs),
    /// All stages for every classifier, plus comparison.csv.
    Experiment(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Experiment config, suite config or run manifest (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master, GA and subsample seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            config.override_seed(seed);
        }
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
    }

    fn single(&self) -> Result<ExperimentConfig, Error> {
        let mut config = ConfigFile::load(&self.config)?.single()?;
        self.apply(&mut config);
        Ok(config)
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Prep(args) => {
            let config = args.single()?;
            let m = harness::cmd_prep(&config)?;
            println!("prep: wrote {:?} to {}", m.outputs, config.output_dir.display());
        }
        Command::Select(args) => {
            let config = args.single()?;
            let m = harness::cmd_select(&config)?;
            println!("select: wrote {:?} to {}", m.outputs, config.output_dir.display());
        }
        Command::Eval(args) => {
            let config = args.single()?;
            let (_, out) = harness::cmd_eval(&config)?;
            print!("{}", out.report.to_markdown());
        }
        Command::Gridsearch(args) => {
            let config = args.single()?;
            let (_, out) = harness::cmd_gridsearch(&config)?;
            println!(
                "gridsearch: best score {:.4} with {}",
                out.result.best_score,
                serde_json::to_string(&out.result.best_params)?
            );
        }
        Command::Experiment(args) => {
            let (configs, out_dir) = match ConfigFile::load(&args.config)? {
                ConfigFile::Single(mut c) => {
                    args.apply(&mut c);
                    let dir = c.output_dir.clone();
                    (vec![c], dir)
                }
                ConfigFile::Suite(mut s) => {
                    if let Some(out) = &args.out {
                        s.output_dir = out.clone();
                    }
                    let mut members = harness::suite_members(&s);
                    if let Some(seed) = args.seed {
                        members.iter_mut().for_each(|c| c.override_seed(seed));
                    }
                    (members, s.output_dir)
                }
            };
            let summary = harness::cmd_experiment(&configs, &out_dir)?;
            print!("{}", harness::comparison_csv(&summary.rows));
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match exec::with_env_threads(|| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}
