//! `verify`: run a named identity suite over a product model (and
//! optionally an immersed hypersurface), emitting a JSON or CSV report.
//!
//! Exit codes: 0 all identities pass, 1 at least one failed, 2 usage or
//! configuration error, 3 I/O error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use cqprod::error::GeomError;
use cqprod::suites::{run, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "verify",
    about = "Verify curvature identities for hypersurfaces in products of complex space forms",
    after_help = "Suites: structure, product-curvature, gauss, codazzi, lemma1, eq20, obstruction, lemma2, umbilic-scan.\n\
                  Model grammar: kind(n,c=value) x kind(n,c=value) with kinds eu, cp, ch, e.g. cp(1,c=0.0625)xch(1,c=-0.0625).\n\
                  Immersion grammar: e1 | e2(r=0.5) | e3(seed=7,amp=0.1)."
)]
struct Cli {
    /// Suite to run
    suite: String,
    /// Product model, e.g. cp(1,c=0.0625)xcp(1,c=0.0625)
    #[arg(long)]
    model: String,
    /// Hypersurface immersion, e.g. e2(r=0.5)
    #[arg(long)]
    immersion: Option<String>,
    /// Number of random samples
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Random seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Tolerance override applied to every pass/fail row
    #[arg(long)]
    tol: Option<f64>,
    /// Finite-difference step (in [1e-6, 1e-3])
    #[arg(long, default_value_t = 1e-4)]
    step: f64,
    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    // VERIFY_THREADS caps internal parallelism; execution is currently
    // serial, but a malformed value is still a configuration error
    if let Ok(v) = std::env::var("VERIFY_THREADS") {
        if v.parse::<usize>().map(|n| n >= 1) != Ok(true) {
            eprintln!("verify: VERIFY_THREADS must be a positive integer, got '{v}'");
            return ExitCode::from(2);
        }
    }

    let config = RunConfig {
        suite: cli.suite,
        model: cli.model,
        immersion: cli.immersion,
        samples: cli.samples,
        seed: cli.seed,
        tol: cli.tol,
        step: cli.step,
    };
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("verify: {e}");
            return match e {
                GeomError::Io(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            };
        }
    };

    let body = match cli.format {
        Format::Json => match report.to_json() {
            Ok(s) => s,
            Err(e) => {
                eprintln!("verify: {e}");
                return ExitCode::from(2);
            }
        },
        Format::Csv => report.to_csv(),
    };

    let write_result = match &cli.out {
        Some(path) => std::fs::write(path, body.as_bytes()),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .and_then(|_| std::io::stdout().write_all(b"\n")),
    };
    if let Err(e) = write_result {
        eprintln!("verify: {e}");
        return ExitCode::from(3);
    }

    if report.overall_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
