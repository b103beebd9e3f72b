//! `duelbo`: run confounded-feedback optimization experiments.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use duelbo::acceptance;
use duelbo::harness::{
    emit_csv, run_single_with, run_suite_with, AggregateResult, ExperimentConfig, PolicyCurve, RunOptions, SuiteOptions,
};
use duelbo::Error;

#[derive(Parser)]
#[command(name = "duelbo", version, about = "Bias-robust Bayesian optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// CSV output file (default: `<name>.csv` in the current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for per-step environment logs of the first seed.
        #[arg(long)]
        debug_log: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run every `*.json` configuration in a directory.
    Suite {
        #[arg(long)]
        dir: PathBuf,
        /// Output directory for the CSV files (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the acceptance checks and print one line per criterion.
    Verify {
        /// Criteria to run (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Args, Clone, Copy)]
struct Common {
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of repetitions.
    #[arg(long)]
    reps: Option<usize>,
    /// Parallel worker threads across seeds.
    #[arg(long)]
    jobs: Option<usize>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, debug_log, common } => {
            load(&config, common).and_then(|c| run_config(&c, out, debug_log.as_deref(), common.jobs))
        }
        Command::Suite { dir, out, common } => run_dir(&dir, out.as_deref(), common),
        Command::Verify { only, jobs } => return verify(&only, jobs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

fn load(path: &Path, common: Common) -> duelbo::Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(reps) = common.reps {
        config.repetitions = reps;
    }
    config.validate()?;
    Ok(config)
}

fn run_config(
    config: &ExperimentConfig,
    out: Option<PathBuf>,
    debug_log: Option<&Path>,
    jobs: Option<usize>,
) -> duelbo::Result<()> {
    let out = out.unwrap_or_else(|| PathBuf::from(format!("{}.csv", config.name)));
    info!(
        "{}: {} policies x {} repetitions, {} steps",
        config.name,
        config.policies.len(),
        config.repetitions,
        config.environment.horizon
    );
    let result = if config.repetitions >= 2 {
        run_suite_with(config, SuiteOptions { jobs, run: RunOptions::default() })?.aggregate
    } else {
        // a single repetition has no standard error
        let curves = config
            .policies
            .iter()
            .map(|p| {
                let trace = run_single_with(config, p, config.seed, RunOptions::default())?.trace;
                let n = trace.cumulative.len();
                Ok(PolicyCurve { policy: trace.policy, mean: trace.cumulative, se2: vec![0.0; n] })
            })
            .collect::<duelbo::Result<Vec<_>>>()?;
        AggregateResult { curves }
    };
    for curve in &result.curves {
        println!(
            "{}\t{}\tfinal regret {:.3} +- {:.3}",
            config.name,
            curve.policy,
            curve.final_mean(),
            curve.final_se2()
        );
    }
    emit_csv(&result, &out)?;
    info!("wrote {}", out.display());
    if let Some(dir) = debug_log {
        std::fs::create_dir_all(dir)?;
        for policy in &config.policies {
            let output = run_single_with(config, policy, config.seed, RunOptions::default())?;
            let path = dir.join(format!("{}_{}_seed{}.csv", config.name, policy.id(), config.seed));
            output.env.write_debug_log_file(&path)?;
            info!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn run_dir(dir: &Path, out: Option<&Path>, common: Common) -> duelbo::Result<()> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Config(format!("no *.json configurations in {}", dir.display())));
    }
    // validate everything before running anything
    let configs = paths.iter().map(|p| load(p, common)).collect::<duelbo::Result<Vec<_>>>()?;
    let out_dir = out.unwrap_or(Path::new("."));
    std::fs::create_dir_all(out_dir)?;
    for config in &configs {
        run_config(config, Some(out_dir.join(format!("{}.csv", config.name))), None, common.jobs)?;
    }
    Ok(())
}

fn verify(only: &[u8], jobs: Option<usize>) -> ExitCode {
    let all: Vec<u8> = (1..=9).collect();
    let selected = if only.is_empty() { &all[..] } else { only };
    let mut failed = 0;
    for &id in selected {
        let report = match id {
            1 => acceptance::criterion_1(),
            2 => acceptance::criterion_2(),
            3 => acceptance::criterion_3(jobs),
            4 => acceptance::criterion_4(jobs),
            5 => acceptance::criterion_5(),
            6 => acceptance::criterion_6(),
            7 => acceptance::criterion_7(jobs),
            8 => acceptance::criterion_8(jobs),
            9 => acceptance::criterion_9(),
            other => {
                eprintln!("error: unknown criterion {other}");
                return ExitCode::from(2);
            }
        };
        println!("{report}");
        if !report.passed {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        eprintln!("{failed} criteria failed");
        ExitCode::from(3)
    }
}
