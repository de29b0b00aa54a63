use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tracing::{error, info};
use tracing_subscriber::EnvFilter;

use handoff_core::harness::{run_experiment, validate_config, ExperimentConfig, HarnessError, Scenario};

/// Handoff rate and probability experiments for cellular deployments.
#[derive(Debug, Parser)]
#[command(name = "handoff", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct RunOpts {
    /// Output directory (default: the config's `output`, else `out/`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "HANDOFF_WORKERS")]
    workers: Option<usize>,
    /// Override the replication count.
    #[arg(long)]
    replications: Option<usize>,
    /// Skip the Monte Carlo side.
    #[arg(long)]
    analytical_only: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a config file and print every problem with its location.
    Validate { config: PathBuf },
    /// Run an experiment config; writes `<name>.csv` and `<name>.json`.
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run one of the bundled experiments.
    Figure {
        #[arg(value_enum)]
        name: FigureName,
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
enum FigureName {
    FigRateComparison,
    FigRateVsProbLowV,
    FigProbSingleVsMulti,
}

impl From<FigureName> for Scenario {
    fn from(f: FigureName) -> Self {
        match f {
            FigureName::FigRateComparison => Scenario::FigRateComparison,
            FigureName::FigRateVsProbLowV => Scenario::FigRateVsProbLowV,
            FigureName::FigProbSingleVsMulti => Scenario::FigProbSingleVsMulti,
        }
    }
}

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_GAP: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAILURE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .with_ansi(std::io::IsTerminal::is_terminal(&std::io::stderr()))
        .init();

    match cli.command {
        Command::Validate { config } => {
            let diags = validate_config(&config);
            if diags.is_empty() {
                println!("{}: ok", config.display());
                ExitCode::SUCCESS
            } else {
                for d in &diags {
                    eprintln!("{}:{d}", config.display());
                }
                ExitCode::from(EXIT_INVALID)
            }
        }
        Command::Run { config, opts } => match ExperimentConfig::load(&config) {
            Ok(cfg) => run(cfg, opts),
            Err(e) => report(e),
        },
        Command::Figure { name, opts } => {
            let scenario = Scenario::from(name);
            let text = scenario.bundled_config().unwrap_or_default();
            match ExperimentConfig::from_json(text) {
                Ok(cfg) => run(cfg, opts),
                Err(e) => report(e),
            }
        }
    }
}

fn report(e: HarnessError) -> ExitCode {
    match e {
        HarnessError::Invalid(diags) => {
            for d in &diags {
                eprintln!("{d}");
            }
            ExitCode::from(EXIT_INVALID)
        }
        e => {
            error!("{e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn run(mut cfg: ExperimentConfig, opts: RunOpts) -> ExitCode {
    if let Some(seed) = opts.seed {
        cfg.plan.base_seed = seed;
    }
    if let Some(n) = opts.replications {
        cfg.plan.n_replications = n;
    }
    if opts.analytical_only {
        cfg.simulate = false;
    }
    if let Some(w) = opts.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            error!("cannot start {w} workers: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    }
    let out_dir = opts.out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let started = std::time::Instant::now();
    let summary = match run_experiment(&cfg) {
        Ok(s) => s,
        Err(e) => return report(e),
    };
    let (csv_path, json_path) = match summary.write_files(&out_dir, &cfg.file_stem()) {
        Ok(p) => p,
        Err(e) => return report(e),
    };
    info!(
        elapsed_s = started.elapsed().as_secs_f64(),
        csv = %csv_path.display(),
        json = %json_path.display(),
        "done"
    );
    for c in &summary.checks {
        println!("[{}] {} {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    for n in &summary.notes {
        println!("note: {n}");
    }
    if let Some(g) = summary.max_rel_gap {
        println!("max relative gap: {g:.4}");
    }
    if summary.within_gap {
        ExitCode::SUCCESS
    } else {
        error!(
            max_rel_gap = summary.max_rel_gap,
            assert_gap = summary.assert_gap,
            "analytical/simulated gap exceeds assert_gap"
        );
        ExitCode::from(EXIT_GAP)
    }
}
