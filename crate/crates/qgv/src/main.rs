//! qgv: verification driver for the quantum dilogarithm calculus.
//!
//! Exit codes: 0 all executed checks pass, 1 any failure (the report file is
//! still written), 2 usage/configuration errors.

use clap::{Parser, Subcommand};
use qgv::modular::ModularParameter;
use qgv::report::{emit_report, SuiteConfig, SuiteId};
use qgv::rewrite::{load_scripts, replay};
use qgv::sample::{sample_csv, RangeSpec, SampleWhat};
use qgv::suites::{calibrated_rule_context, run_suite};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qgv", version, about = "quantum group / quantum dilogarithm verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and print one line per check.
    Verify {
        #[arg(long)]
        suite: String,
        /// modular parameter b (default 0.75; env QGV_B)
        #[arg(long)]
        b: Option<f64>,
        /// working precision in bits (default 192; env QGV_PREC)
        #[arg(long)]
        prec: Option<u32>,
        /// override the default tolerance of the suite's primary checks
        #[arg(long)]
        tol: Option<f64>,
        /// write the JSON report here
        #[arg(long)]
        out: Option<PathBuf>,
        /// seed for the pseudo-random sample points
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Replay one derivation script by name.
    Replay {
        #[arg(long)]
        script: String,
    },
    /// Sample a function to CSV: gb-line or phi-lambda.
    Sample {
        what: String,
        /// start:stop[:imag]
        #[arg(long)]
        range: String,
        #[arg(long)]
        step: f64,
        #[arg(long)]
        csv: PathBuf,
        /// lambda parameter for phi-lambda
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        prec: Option<u32>,
    },
}

fn run() -> Result<u8, qgv::Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify {
            suite,
            b,
            prec,
            tol,
            out,
            seed,
        } => {
            let mut cfg = SuiteConfig::new(SuiteId::parse(&suite)?);
            if let Some(b) = b {
                cfg.b = b;
            }
            if let Some(p) = prec {
                cfg.prec = p;
            }
            cfg.tol_override = tol;
            cfg.out = out;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let reports = run_suite(&cfg)?;
            let mut failed = 0usize;
            for r in &reports {
                println!("{r}");
                if !r.passed() {
                    failed += 1;
                }
            }
            println!(
                "{}: {} checks, {} failed",
                cfg.suite.name(),
                reports.len(),
                failed
            );
            if let Some(path) = &cfg.out {
                emit_report(&cfg, &reports, path)?;
            }
            Ok(if failed > 0 { 1 } else { 0 })
        }
        Command::Replay { script } => {
            let (ctx, _) = calibrated_rule_context(0.75)?;
            let scripts = load_scripts(&ctx)?;
            let found = scripts.iter().find(|s| s.name() == script);
            match found {
                None => {
                    eprintln!(
                        "unknown script {script}; available: {}",
                        scripts
                            .iter()
                            .map(|s| s.name().to_string())
                            .collect::<Vec<_>>()
                            .join(", ")
                    );
                    Ok(2)
                }
                Some(s) => {
                    let outcome = replay(&ctx, s);
                    for step in &outcome.steps {
                        println!(
                            "step {:3} {:20} @ {:3} {}",
                            step.index,
                            step.rule,
                            step.pos,
                            if step.ok { "ok" } else { "FAILED" }
                        );
                    }
                    println!(
                        "{}: {}",
                        outcome.name,
                        if outcome.passed { "replayed" } else { "FAILED" }
                    );
                    if !outcome.passed {
                        println!("{}", outcome.detail);
                    }
                    Ok(if outcome.passed { 0 } else { 1 })
                }
            }
        }
        Command::Sample {
            what,
            range,
            step,
            csv,
            lambda,
            b,
            prec,
        } => {
            let what = SampleWhat::parse(&what)?;
            let range = RangeSpec::parse(&range)?;
            let b = b
                .or_else(|| std::env::var("QGV_B").ok().and_then(|v| v.parse().ok()))
                .unwrap_or(0.75);
            let prec = prec
                .or_else(|| std::env::var("QGV_PREC").ok().and_then(|v| v.parse().ok()))
                .unwrap_or(192);
            let mp = ModularParameter::new(b, prec)?;
            let mut fh = std::fs::File::create(&csv)?;
            let rows = sample_csv(&mp, what, range, step, lambda, &mut fh)?;
            println!("wrote {rows} rows to {}", csv.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                qgv::Error::Usage(_) | qgv::Error::Unknown(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
