use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coalcost::cli::{self, exit, Command, RunConfig};
use coalcost::verify::{run_suite, VerifyOptions};
use coalcost::Error;

/// Union-Find merging costs under the additive coalescent.
#[derive(Parser, Debug)]
#[command(name = "coalcost", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Monte Carlo cost curves and totals.
    Simulate(Common),
    /// Limit curves phi(alpha) by quadrature.
    Limit(Common),
    /// Exact tables (parking n <= 8, trees n <= 6, partition DP n <= 20).
    Exact(Common),
    /// Run the acceptance suite; prints a JSON report.
    Verify(Common),
    /// Largest-cluster fraction in the sparse and dense regimes.
    Sweep(Common),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Flat `key = value` file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// direct | tree | parking
    #[arg(long)]
    embedding: Option<String>,
    /// qf | qfw | qfb | prey | predator | displacement (repeatable)
    #[arg(long)]
    functional: Vec<String>,
    /// Comma-separated alphas in [0, 1).
    #[arg(long)]
    alpha_grid: Option<String>,
    /// Comma-separated betas >= 0.
    #[arg(long)]
    beta_grid: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    workers: Option<String>,
    /// Directory for per-replication totals.
    #[arg(long)]
    raw_samples: Option<PathBuf>,
    /// pmk | borel | conditional-r | dp | parking | trees
    #[arg(long)]
    oracle: Option<String>,
    /// Comma-separated sizes for `sweep`.
    #[arg(long)]
    n_list: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// Criterion ids for `verify` (repeatable).
    #[arg(long)]
    only: Vec<String>,
    /// Run `verify` against a perturbed p_mk.
    #[arg(long)]
    mutate: bool,
}

impl Common {
    fn into_config(self, command: Command) -> Result<RunConfig, Error> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        config.subcommand = Some(command);
        let path_text = |p: Option<PathBuf>| p.map(|p| p.display().to_string());
        let pairs = [
            ("n", self.n),
            ("reps", self.reps),
            ("seed", self.seed),
            ("embedding", self.embedding),
            (
                "functional",
                (!self.functional.is_empty()).then(|| self.functional.join(",")),
            ),
            ("alpha-grid", self.alpha_grid),
            ("beta-grid", self.beta_grid),
            ("tol", self.tol),
            ("format", self.format),
            ("out", path_text(self.out)),
            ("workers", self.workers),
            ("raw-samples", path_text(self.raw_samples)),
            ("oracle", self.oracle),
            ("n-list", self.n_list),
            ("epsilon", self.epsilon),
            ("only", (!self.only.is_empty()).then(|| self.only.join(","))),
            ("mutate", self.mutate.then(|| "true".to_string())),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                config.set(key, &v)?;
            }
        }
        Ok(config)
    }
}

fn emit(config: &RunConfig, text: &str) -> Result<(), Error> {
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(command: Command, common: Common) -> Result<i32, Error> {
    let config = common.into_config(command)?;
    if command == Command::Verify {
        let opts = VerifyOptions {
            only: config.only.clone(),
            mutate: config.mutate,
            workers: config.workers,
        };
        let report = run_suite(&opts)?;
        for o in &report.outcomes {
            eprintln!("{}", o.line());
        }
        emit(&config, &report.to_json())?;
        return Ok(if report.passed() {
            exit::SUCCESS
        } else {
            exit::VERIFY_FAILED
        });
    }
    emit(&config, &cli::run_table_command(&config)?)?;
    Ok(exit::SUCCESS)
}

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(p) => p,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::SUCCESS
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let (command, common) = match parsed.command {
        Sub::Simulate(c) => (Command::Simulate, c),
        Sub::Limit(c) => (Command::Limit, c),
        Sub::Exact(c) => (Command::Exact, c),
        Sub::Verify(c) => (Command::Verify, c),
        Sub::Sweep(c) => (Command::Sweep, c),
    };
    match run(command, common) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", cli::error_record(&e));
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
