//! Batch front-end: `gngs --config run.json [--output DIR] [--seed N]
//! [--strict]`. The command (exponents | solve | constants | verify |
//! report) is part of the config document.
//!
//! Exit codes: 0 success, 2 config parse error, 3 inadmissible indices,
//! 4 solver failure, 1 anything else. Failures print a machine-readable
//! JSON object to stderr.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use gngs_core::error::Error;

#[derive(Parser, Debug)]
#[command(name = "gngs", version, about = "Ground states and best constants of Sobolev and Gagliardo-Nirenberg inequalities for anisotropic homogeneous operators")]
struct Cli {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory override (defaults to the config's output_dir).
    #[arg(long)]
    output: Option<PathBuf>,

    /// Seed override (defaults to the config's seed).
    #[arg(long)]
    seed: Option<u64>,

    /// Turn report-level warnings (missing run reports) into failures.
    #[arg(long)]
    strict: bool,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Format(_) => 2,
        Error::Inadmissible(_)
        | Error::InvalidStructure(_)
        | Error::SupercriticalOrder(_)
        | Error::DegeneratePair(_)
        | Error::DegenerateInterpolation
        | Error::InfeasibleExponent(_)
        | Error::UnsupportedExponent(_) => 3,
        Error::Diverged { .. } | Error::Numeric(_) | Error::NonFinite => 4,
        _ => 1,
    }
}

fn error_json(err: &Error, code: u8) -> String {
    serde_json::json!({
        "error": {
            "message": err.to_string(),
            "exit_code": code,
        }
    })
    .to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Ok(threads) = std::env::var("GNGS_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }

    let json = match std::fs::read_to_string(&cli.config) {
        Ok(j) => j,
        Err(e) => {
            let err = Error::Format(format!("cannot read config {}: {e}", cli.config.display()));
            eprintln!("{}", error_json(&err, 2));
            return ExitCode::from(2);
        }
    };
    let cfg = match config::RunConfig::from_json(&json) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", error_json(&e, 2));
            return ExitCode::from(2);
        }
    };

    let out_dir = cli.output.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let seed = cli.seed.unwrap_or(cfg.seed);

    match commands::dispatch(&cfg, seed, &out_dir, cli.strict) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code_for(&e);
            // a diverged solve dumps its last iterate for post-mortems
            if let Error::Diverged { iteration, iterate } = &e {
                let dump = out_dir.join(format!("diverged_iter{iteration}.bin"));
                if std::fs::create_dir_all(&out_dir).is_ok() {
                    if let Ok(problem) = cfg.problem_spec() {
                        let _ = gngs_core::io::save_field(&dump, iterate, problem.weights());
                    }
                }
            }
            eprintln!("{}", error_json(&e, code));
            ExitCode::from(code)
        }
    }
}
