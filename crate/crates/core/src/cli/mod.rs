//! The `gse-tail` command.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure,
//! 4 oracle comparison failure.

pub mod config;
pub mod render;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::distributions::RootConvention;
use crate::error::Error;
use crate::oracle::simulate_tail_moments;
use crate::risk_measures::{Measure, RiskReport};
use crate::tail_engine::Method;
pub use config::ScenarioConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Mtce,
    Mtcov,
    Mtcorr,
    Tv,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RootArg {
    Symmetric,
    Cholesky,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Quadrature,
    Qmc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    #[value(name = "json-like", alias = "json")]
    JsonLike,
}

/// Tail risk measures for skew-elliptical scenarios.
#[derive(Debug, Clone, Parser)]
#[command(name = "gse-tail", version)]
pub struct Args {
    /// Scenario file.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub measure: MeasureArg,
    /// Overrides the scenario's root convention.
    #[arg(long, value_enum)]
    pub root: Option<RootArg>,
    /// Overrides the scenario's integration method.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Compare against a Monte Carlo oracle with this many samples.
    #[arg(long)]
    pub oracle_samples: Option<usize>,
    /// Seed for the oracle and for QMC scrambling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Decimals in text output.
    #[arg(long, default_value_t = 4)]
    pub precision: usize,
    /// Run the Monte Carlo comparison after the analytic measures.
    #[arg(long)]
    pub compare: bool,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Domain(_)
        | Error::Parameter(_)
        | Error::Dimension { .. }
        | Error::NotPositiveDefinite(_)
        | Error::MethodUnavailable(_) => EXIT_CONFIG,
        Error::Integration(_)
        | Error::NonFinite { .. }
        | Error::RootFinding(_)
        | Error::DegenerateTail(_)
        | Error::InsufficientTailMass { .. } => EXIT_NUMERIC,
    }
}

const DEFAULT_ORACLE_SEED: u64 = 1;

/// Runs one invocation, writing results to `stdout` (or `--out`) and
/// diagnostics to `stderr`. Returns the exit code.
pub fn run(args: &Args, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let fail = |stderr: &mut dyn Write, prefix: &str, e: &Error, code: i32| {
        let _ = writeln!(stderr, "gse-tail: {prefix}{e}");
        code
    };
    let mut cfg = match ScenarioConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(stderr, "", &e, EXIT_CONFIG),
    };
    if let Some(r) = args.root {
        cfg.distribution.root = match r {
            RootArg::Symmetric => RootConvention::Symmetric,
            RootArg::Cholesky => RootConvention::Cholesky,
        };
    }
    if let Some(m) = args.method {
        cfg.integration.method = match m {
            MethodArg::Quadrature => Method::Quadrature,
            MethodArg::Qmc => Method::Qmc,
        };
    }
    if let Some(s) = args.seed {
        cfg.integration.qmc_seed = s;
    }
    let (dist, req) = match cfg.distribution().and_then(|d| cfg.request().map(|r| (d, r))) {
        Ok(x) => x,
        Err(e) => return fail(stderr, "", &e, EXIT_CONFIG),
    };
    let measure = match args.measure {
        MeasureArg::Mtce => Measure::Mtce,
        MeasureArg::Mtcov => Measure::Mtcov,
        MeasureArg::Mtcorr => Measure::Mtcorr,
        MeasureArg::Tv => Measure::Tv,
        MeasureArg::All => Measure::All,
    };
    let report = match RiskReport::compute(&dist, &req, measure) {
        Ok(r) => r,
        Err(e) => return fail(stderr, "", &e, exit_code(&e)),
    };
    let mut text = match args.format {
        Format::Text => render::text(&report, args.precision),
        Format::Csv => render::csv(&report),
        Format::JsonLike => report.to_json() + "\n",
    };

    let mut code = EXIT_OK;
    if args.compare {
        let samples = args.oracle_samples.or(cfg.oracle.as_ref().and_then(|o| o.samples));
        let Some(samples) = samples else {
            let e = Error::Config("compare mode needs --oracle-samples or [oracle] samples".into());
            return fail(stderr, "", &e, EXIT_CONFIG);
        };
        let seed = args.seed.or(cfg.oracle.as_ref().and_then(|o| o.seed)).unwrap_or(DEFAULT_ORACLE_SEED);
        let oracle = cfg
            .oracle_event(&dist, &req)
            .and_then(|event| simulate_tail_moments(&dist, samples, seed, &event));
        match oracle {
            Ok(o) => {
                let c = render::comparisons(&report, &o);
                if c.iter().any(|x| !x.pass()) {
                    code = EXIT_ORACLE;
                }
                match args.format {
                    Format::Text => text.push_str(&render::comparison_text(&c, &o, args.precision)),
                    _ => {
                        let _ = stderr.write_all(render::comparison_text(&c, &o, args.precision).as_bytes());
                    }
                }
            }
            Err(e) => {
                let _ = stdout.write_all(text.as_bytes());
                return fail(stderr, "oracle: ", &e, EXIT_ORACLE);
            }
        }
    }

    let written = match &args.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(m) = written {
        let _ = writeln!(stderr, "gse-tail: {m}");
        return EXIT_CONFIG;
    }
    code
}

/// Parses `argv` and runs. Usage errors exit through clap with code 2.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::parse_from(argv);
    run(&args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
