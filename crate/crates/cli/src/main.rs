use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use nogolab_core::harness::{run_experiment, Format, RunConfig, CATALOG};
use nogolab_core::Execution;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

/// Run one experiment from the nogolab catalog and write its report.
#[derive(Debug, Parser)]
#[command(name = "nogolab", version, about, after_help = catalog_help())]
struct Cli {
    /// Experiment name (see the list below).
    experiment: String,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    /// Tolerance for exact checks (default 1e-9).
    #[arg(long)]
    tol: Option<f64>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Run trials on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

fn catalog_help() -> String {
    format!("Experiments: {}\nNOGOLAB_CAP raises the largest m accepted for matrix experiments.", CATALOG.join(", "))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = RunConfig::new(cli.experiment, cli.seed);
    cfg.m = cli.m;
    cfg.n = cli.n;
    cfg.trials = cli.trials;
    cfg.k = cli.k;
    cfg.eta = cli.eta;
    cfg.tol = cli.tol;
    cfg.out = cli.out;
    cfg.format = match cli.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    if cli.sequential {
        cfg.exec = Execution::Sequential;
    }

    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = match cfg.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    };
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    eprintln!("{} ({:.0} ms)", report.summary(), report.runtime_ms);
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
