use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};

use qstoch_bench::config::BackendKind;
use qstoch_bench::{run_suite, run_sweep_to_files, ExperimentConfig, Suite, SweepError, SweepOptions};
use qstoch_core::Algorithm;

const EXIT_CHECK: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "qstoch", version, about = "Query-ledger experiments for quantum stochastic optimization")]
struct Cli {
    /// Experiment file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// CSV output; the JSON summary goes next to it with a `.json` extension.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendKind>,
    /// Constant in front of the query cost formula.
    #[arg(long, global = true)]
    cqme: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Variance-reduced mean estimation at the origin.
    Qvr,
    /// Accelerated stochastic approximation on the smoothed objective.
    Acsa,
    /// Stochastic cutting plane followed by the line-search tournament.
    Qscp,
    /// Randomized SGD with variance-reduced gradients.
    Qsgd,
    /// SPIDER with variance-reduced anchors and differences.
    Qspider,
    /// Run the experiment described by `--config`.
    Sweep,
    /// Run a statistical self-check.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
}

enum Failure {
    Config(String),
    Check(String),
}

fn experiment(cli: &Cli, algorithm: Option<Algorithm>) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match (&cli.config, algorithm) {
        (Some(path), _) => ExperimentConfig::load(path).map_err(|e| Failure::Config(e.to_string()))?,
        (None, Some(a)) => ExperimentConfig::preset(a),
        (None, None) => return Err(Failure::Config("sweep needs --config".into())),
    };
    if let Some(a) = algorithm {
        if a != cfg.algorithm {
            warn!("running {a} on a config written for {}", cfg.algorithm);
            cfg.algorithm = a;
        }
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(b) = cli.backend {
        cfg.backend.mode = b;
    }
    if let Some(c) = cli.cqme {
        cfg.backend.c_qme = c;
    }
    if let Some(out) = &cli.out {
        cfg.output.json = Some(out.with_extension("json"));
        cfg.output.csv = Some(out.clone());
    }
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(cfg)
}

fn sweep(cli: &Cli, algorithm: Option<Algorithm>) -> Result<(), Failure> {
    let cfg = experiment(cli, algorithm)?;
    info!(
        "{} on {} with d = {:?}, eps = {:?}, {} trials per cell",
        cfg.algorithm,
        cfg.fixture,
        cfg.dims(),
        cfg.epsilons,
        cfg.trials
    );
    let opts = SweepOptions { jobs: cli.jobs };
    let out = run_sweep_to_files(&cfg, opts, cfg.output.csv.as_deref(), cfg.output.json.as_deref()).map_err(
        |e| match e {
            SweepError::Output { .. } => Failure::Config(e.to_string()),
            other => Failure::Check(other.to_string()),
        },
    )?;
    if cfg.output.csv.is_none() {
        print!("{}", out.csv);
    }
    if cfg.output.json.is_none() {
        eprint!("{}", out.summary.to_json());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Qvr => sweep(cli, Some(Algorithm::Qvr)),
        Command::Acsa => sweep(cli, Some(Algorithm::Acsa)),
        Command::Qscp => sweep(cli, Some(Algorithm::Qscp)),
        Command::Qsgd => sweep(cli, Some(Algorithm::Qsgd)),
        Command::Qspider => sweep(cli, Some(Algorithm::Qspider)),
        Command::Sweep => sweep(cli, None),
        Command::Verify { suite } => {
            let report = qstoch_core::par::with_jobs(cli.jobs, || run_suite(*suite, cli.seed.unwrap_or(0)));
            println!("{report}");
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Check(format!("suite {} failed", suite.name())))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CHECK)
        }
    }
}
