//! `gl2dual`: verification harness for the integral duality and the gl2
//! operator identities.

mod config;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gl2dual::contour::{barnes_contour, loops_b, loops_j, LoopOptions};
use gl2dual::integrals::{i_ab, j_ab};
use gl2dual::params::dual_params;
use gl2dual::{make_params, C64};
use serde_json::{json, Value};

use config::{ConfigError, Format, Settings, Suite};

#[derive(Parser)]
#[command(name = "gl2dual", version, about = "Numerical checks of the Barnes/loop integral duality")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and write a report.
    Verify {
        #[arg(value_enum, id = "suite_name", value_name = "SUITE")]
        suite: Option<Suite>,
        #[command(flatten)]
        args: Flags,
    },
    /// Evaluate a single integral I_ab or J_ab.
    Eval {
        #[arg(value_enum, ignore_case = true)]
        which: Integral,
        #[command(flatten)]
        args: Flags,
    },
    /// Write a contour as JSON segments for plotting.
    DumpContour {
        #[arg(value_enum)]
        family: ContourFamily,
        #[command(flatten)]
        args: Flags,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Integral {
    I,
    J,
}

#[derive(Clone, Copy, ValueEnum)]
enum ContourFamily {
    Barnes,
    LoopsJ,
    LoopsB,
}

#[derive(Args, Default)]
struct Flags {
    #[arg(long, value_enum)]
    suite: Option<Suite>,
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    m1: Option<C64>,
    #[arg(long, allow_hyphen_values = true)]
    m2: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    l2: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<C64>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<C64>,
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    /// Relative tolerance of the quadrature.
    #[arg(long, allow_hyphen_values = true)]
    rel_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Flags {
    fn settings(self) -> Result<Settings, ConfigError> {
        let file = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        let flags = Settings {
            suite: self.suite,
            m1: self.m1,
            m2: self.m2,
            l2: self.l2,
            kappa: self.kappa,
            z: self.z,
            mu: self.mu,
            a: self.a,
            b: self.b,
            rel_tol: self.rel_tol,
            seed: self.seed,
            out: self.out,
            format: self.format,
        };
        let s = file.overridden_by(flags);
        s.validate()?;
        Ok(s)
    }
}

/// Failure modes of a run, mapped to exit codes.
enum Failure {
    Config(ConfigError),
    Run(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

fn write_output(s: &Settings, text: &str) -> Result<(), Failure> {
    match &s.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Run(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{text}") {
                // a closed pipe (e.g. `| head`) is not an error of the run
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Run(format!("cannot write to stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn verify(suite: Option<Suite>, args: Flags) -> Result<bool, Failure> {
    let mut s = args.settings()?;
    if suite.is_some() {
        s.suite = suite;
    }
    let suite = s.suite.ok_or_else(|| ConfigError::Invalid("no suite selected".into()))?;
    let start = Instant::now();
    let mut report = suites::run(suite, &s)?;
    report.wall_time = start.elapsed().as_secs_f64();
    for case in report.failures() {
        eprintln!("FAIL {}: residual {:?} > {:e} ({})", case.name, case.residual, case.threshold, case.detail);
    }
    let text = match s.format.unwrap_or_default() {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    write_output(&s, &text)?;
    eprintln!(
        "{}: {} of {} cases passed in {:.1} s",
        suite,
        report.results.iter().filter(|c| c.passed).count(),
        report.results.len(),
        report.wall_time
    );
    Ok(report.passed())
}

fn point(s: &Settings) -> Result<gl2dual::Params, Failure> {
    let d = suites::THEOREM_POINT;
    make_params(
        s.m1.unwrap_or(d.m1),
        s.m2.unwrap_or(1),
        s.l2.unwrap_or(1),
        s.kappa.unwrap_or(d.kappa),
        s.z.unwrap_or(d.z),
        s.mu.unwrap_or(d.mu),
    )
    .map_err(|e| Failure::Config(ConfigError::Invalid(e.to_string())))
}

fn eval(which: Integral, args: Flags) -> Result<bool, Failure> {
    let s = args.settings()?;
    let p = point(&s)?;
    let (a, b) = (s.a.unwrap_or(0), s.b.unwrap_or(0));
    let quad = s.quad_or(1e-8)?;
    let (name, result) = match which {
        Integral::I => ("I", i_ab(&p, a, b, &quad)),
        Integral::J => ("J", j_ab(&dual_params(&p), a, b, &quad)),
    };
    let r = result.map_err(|e| Failure::Run(e.to_string()))?;
    let out = json!({
        "integral": name,
        "a": a,
        "b": b,
        "params": serde_json::to_value(p).expect("params serialize"),
        "value": [r.value.re, r.value.im],
        "err_estimate": r.err_estimate,
        "n_evals": r.n_evals,
        "warnings": r.warnings,
    });
    write_output(&s, &serde_json::to_string_pretty(&out).expect("json"))?;
    Ok(true)
}

fn dump_contour(family: ContourFamily, args: Flags) -> Result<bool, Failure> {
    let s = args.settings()?;
    let p = point(&s)?;
    let b = s.b.unwrap_or(0);
    let run = |e: gl2dual::Error| Failure::Run(e.to_string());
    let dump: Value = match family {
        ContourFamily::Barnes => {
            let (contour, poles) = barnes_contour(&p, b, s.rel_tol.unwrap_or(1e-8)).map_err(run)?;
            let mut v = contour.to_json();
            v["poles"] = serde_json::to_value(poles).expect("pole report serializes");
            v
        }
        ContourFamily::LoopsJ => loops_j(&dual_params(&p), b, &LoopOptions::default()).map_err(run)?.to_json(),
        ContourFamily::LoopsB => loops_b(s.m2.unwrap_or(2) as usize, 40.0).map_err(run)?.to_json(),
    };
    write_output(&s, &serde_json::to_string_pretty(&dump).expect("json"))?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify { suite, args } => verify(suite, args),
        Command::Eval { which, args } => eval(which, args),
        Command::DumpContour { family, args } => dump_contour(family, args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
    }
}
