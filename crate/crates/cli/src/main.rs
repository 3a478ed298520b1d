use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use collapse_cli::config::{parse_config, ExperimentConfig, OutputFormat};
use collapse_cli::oracle::run_checks;
use collapse_cli::output::{emit, ResultRecord};
use collapse_cli::presets::{preset_members, Preset};
use collapse_cli::runner::{run_experiment, Overrides};
use log::info;

/// Stochastic wave-function trajectories of a central spin coupled to a
/// spin environment.
#[derive(Parser)]
#[command(name = "collapse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Run every member of a built-in sweep (fig1, fig2_top, fig2_bottom, fig3).
    Preset { name: Preset },
    /// Check a config file and print it with defaults resolved.
    Validate { config: PathBuf },
    /// Compare every engine against the brute-force oracles.
    OracleCheck,
}

#[derive(Args)]
struct Flags {
    /// Base seed for sampled grid points.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Samples per grid point for the sampled engine.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    samples: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
    /// Record wall-clock seconds in JSON output.
    #[arg(long, global = true)]
    timings: bool,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            samples: self.samples.map(|s| s as usize),
            workers: self.workers.map(|w| w as usize),
        }
    }
}

enum Failure {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Validation)?;
    parse_config(&text)
        .with_context(|| format!("in {}", path.display()))
        .map_err(Failure::Validation)
}

fn run_all(members: Vec<(ExperimentConfig, Vec<String>)>, flags: &Flags) -> Result<(), Failure> {
    let first = members.first().map(|(c, _)| c.clone());
    let mut records: Vec<ResultRecord> = Vec::with_capacity(members.len());
    for (mut cfg, defaults) in members {
        flags.overrides().apply(&mut cfg);
        info!("running N={} {}", cfg.env_size(), cfg.couplings.describe());
        let rec = run_experiment(&cfg, defaults, flags.timings)
            .context("experiment failed")
            .map_err(Failure::Runtime)?;
        records.push(rec);
    }
    let format = flags
        .format
        .or(first.as_ref().map(|c| c.format))
        .unwrap_or(OutputFormat::Csv);
    let path = flags.out.clone().or(first.and_then(|c| c.output));
    emit(&records, format, path.as_deref())
        .context("writing results")
        .map_err(Failure::Runtime)
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Run { config } => run_all(vec![(load(config)?, Vec::new())], &cli.flags),
        Command::Preset { name } => run_all(
            preset_members(*name)
                .into_iter()
                .map(|m| (m.config, m.preset_defaults))
                .collect(),
            &cli.flags,
        ),
        Command::Validate { config } => {
            let mut cfg = load(config)?;
            cli.flags.overrides().apply(&mut cfg);
            print!("{}", cfg.to_text());
            Ok(())
        }
        Command::OracleCheck => {
            let results = run_checks()
                .context("oracle suite aborted")
                .map_err(Failure::Runtime)?;
            for r in &results {
                println!("{}", r.line());
            }
            let failed = results.iter().filter(|r| !r.passed()).count();
            println!("{} checks, {} failed", results.len(), failed);
            if failed > 0 {
                return Err(Failure::Runtime(anyhow::anyhow!("{failed} oracle checks failed")));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
