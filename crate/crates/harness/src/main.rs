use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use multiproj::config::ExperimentConfig;
use multiproj::output::{write_config_echo, write_csv};
use multiproj::runner::{build_problem, run_experiment};
use multiproj::suite::{Suite, SuiteOptions, CRITERIA};
use multiproj::{estimate_config_eta, HarnessError};

const EXIT_SUITE_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "multiproj",
    version,
    about = "Random multi-constraint projection experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSV and config echo.
    Run {
        config: PathBuf,
        /// Overrides `output_path` from the config.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Overrides `workers` from the config.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run every (algorithm, M) pair of the config's sweep, one CSV each.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the estimated linear-regularity constant of the instance.
    EstimateEta {
        config: PathBuf,
        /// Overrides `eta_probes` from the config.
        #[arg(long)]
        probes: Option<usize>,
    },
    /// Compare the iterative polyhedral projection with the exhaustive
    /// active-set oracle on random instances.
    CheckQp {
        #[arg(long, default_value_t = SuiteOptions::default().seed)]
        seed: u64,
    },
    /// Run the acceptance experiments and print one line per criterion.
    PaperSuite {
        /// Comma-separated criterion numbers; default all.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[arg(long, default_value_t = SuiteOptions::default().seed)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load(
    path: &Path,
    output: Option<PathBuf>,
    workers: Option<usize>,
) -> Result<ExperimentConfig, HarnessError> {
    let mut config = ExperimentConfig::from_path(path)?;
    if output.is_some() {
        config.output_path = output;
    }
    if workers.is_some() {
        config.workers = workers;
    }
    config.validate()?;
    Ok(config)
}

fn run_one(config: &ExperimentConfig) -> Result<(), HarnessError> {
    let path = config
        .output_path
        .clone()
        .ok_or_else(|| HarnessError::Config {
            field: "output_path".into(),
            message: "no output path in the config or on the command line".into(),
        })?;
    let result = run_experiment(config)?;
    write_csv(&result, &path)?;
    let problem = build_problem(config)?;
    let echo = write_config_echo(&config.resolved(&problem)?, &path)?;
    eprintln!(
        "{}: {} trials ok, {} failed; config echoed to {}",
        path.display(),
        result.trial_count,
        result.failed_trials.len(),
        echo.display()
    );
    for f in &result.failed_trials {
        eprintln!("  trial {} failed: {}", f.trial, f.message);
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<ExitCode, HarnessError> {
    match command {
        Command::Run {
            config,
            output,
            workers,
        } => {
            run_one(&load(&config, output, workers)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            config,
            output,
            workers,
        } => {
            let config = load(&config, output, workers)?;
            for point in config.sweep_points() {
                point.validate()?;
                run_one(&point)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::EstimateEta { config, probes } => {
            let mut config = ExperimentConfig::from_path(&config)?;
            if let Some(p) = probes {
                config.eta_probes = p;
            }
            config.validate()?;
            println!("{:.16e}", estimate_config_eta(&config)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckQp { seed } => {
            let suite = Suite::new(SuiteOptions {
                seed,
                workers: None,
            });
            let outcome = suite.run(1)?;
            println!("{outcome}");
            Ok(exit_for(outcome.passed))
        }
        Command::PaperSuite {
            only,
            seed,
            workers,
        } => {
            let ids = if only.is_empty() {
                CRITERIA.to_vec()
            } else {
                only
            };
            let suite = Suite::new(SuiteOptions { seed, workers });
            let mut all = true;
            for id in ids {
                let outcome = suite.run(id)?;
                println!("{outcome}");
                all &= outcome.passed;
            }
            Ok(exit_for(all))
        }
    }
}

fn exit_for(passed: bool) -> ExitCode {
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_SUITE_FAILURE)
    }
}
