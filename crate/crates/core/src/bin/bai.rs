//! `bai`: run experiments and the acceptance suite from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use bayes_bai::experiment::{self, ExperimentConfig};
use bayes_bai::validate::{self, ValidateConfig};
use bayes_bai::Result;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bai", version, about = "Bayesian best-arm identification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simple regret of each policy at each horizon (CSV).
    RegretCurve(Common),
    /// Expected Bellman improvement of every arm at the configured states (JSON).
    EbiProbe(Common),
    /// Exact and Monte-Carlo probabilities of the proof events (CSV).
    EventProbe(Common),
    /// Run the acceptance suite; exits nonzero if any check fails.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Comma-separated check ids, e.g. `1,2,9`.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Gauss–Hermite order of the exact recursion.
    #[arg(long)]
    quadrature_order: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    /// Worker threads; results are identical for any value.
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn experiment(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(reps) = self.reps {
            cfg.reps = reps;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        if let Some(m) = self.quadrature_order {
            cfg.dp.quadrature_order = m;
        }
        if let Some(d) = self.max_depth {
            cfg.dp.max_depth = d;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        cfg.dp.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::RegretCurve(c) => {
            let cfg = c.experiment()?;
            experiment::emit(&experiment::regret_curve(&cfg)?, cfg.out.as_deref())?;
        }
        Command::EbiProbe(c) => {
            let cfg = c.experiment()?;
            experiment::emit(&experiment::ebi_probe(&cfg)?, cfg.out.as_deref())?;
        }
        Command::EventProbe(c) => {
            let cfg = c.experiment()?;
            experiment::emit(&experiment::event_probe(&cfg)?, cfg.out.as_deref())?;
        }
        Command::Validate { common, only } => {
            let exp = common.experiment()?;
            let cfg = ValidateConfig {
                dp: exp.dp,
                seed: common.seed.unwrap_or(ValidateConfig::default().seed),
                workers: exp.workers,
                only,
            };
            let report = validate::run_with(&cfg, |c| {
                eprintln!("{} [{:>2}] {} ({:.1}s)", if c.passed { "PASS" } else { "FAIL" }, c.id, c.title, c.seconds);
            });
            experiment::emit(&report.render(), exp.out.as_deref())?;
            return Ok(report.all_passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
