//! `moulds`: batch verification of mould-calculus identities over exact rationals.
//!
//! Exit codes: 0 when every check passes, 1 when any check fails, 2 for
//! usage, configuration or input errors.

mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use moulds::braid::{self, BraidAlgebra};
use moulds::mould::{paj, pic, Mould};
use moulds::ncseries::NCSeries;
use moulds::words::{Alphabet, AlphabetRef};
use moulds::FamilyTag;
use serde_json::{json, Value};
use thiserror::Error;

use report::{CheckReport, ConfigEcho, Report, Status};
use suites::{Ctx, Verdict};

/// Hard caps: larger bounds are refused rather than left to run for hours.
const MAX_LENGTH_CAP: usize = 6;
const MAX_DEGREE_CAP: usize = 8;
const GAMMA_CAP: usize = 4;
const GRT_HARD_CAP: usize = 6;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Maximal mould length L.
    #[arg(long, default_value_t = 4)]
    max_length: usize,
    /// Maximal series degree N.
    #[arg(long, default_value_t = 6)]
    max_degree: usize,
    /// Label alphabet: trivial, z2, z3, …
    #[arg(long, default_value = "trivial")]
    gamma: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Reject unreduced rationals and other non-canonical input.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Parser)]
#[command(name = "moulds", version, about = "Exact verification of mould-calculus identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run verification suites.
    Run {
        #[command(flatten)]
        common: Common,
        /// Suite to run (repeatable); `all` runs every suite.
        #[arg(long = "suite", default_value = "all")]
        suites: Vec<String>,
        /// Record per-check wall time (makes reports run-dependent).
        #[arg(long)]
        timings: bool,
    },
    /// Solve the linearized pentagon degree by degree and cross-check each solution.
    GrtSolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        degree: usize,
        /// Largest degree accepted.
        #[arg(long, default_value_t = 4)]
        cap: usize,
    },
    /// Export a named object as JSON.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(value_enum)]
        object: Object,
    },
    /// Validate a JSON mould, series or braid element and print its canonical form.
    Import {
        #[command(flatten)]
        common: Common,
        file: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Object {
    Paj,
    Pic,
    Unit,
    /// The degree-3 pentagon solution `exp^⊛(σ)`.
    GrtPhi,
}

struct Config {
    max_length: usize,
    max_degree: usize,
    gamma: AlphabetRef,
    seed: u64,
}

impl Config {
    fn from(c: &Common) -> Result<Self, CliError> {
        if c.max_length > MAX_LENGTH_CAP {
            return Err(CliError::Usage(format!("--max-length {} exceeds the cap {MAX_LENGTH_CAP}", c.max_length)));
        }
        if c.max_degree > MAX_DEGREE_CAP {
            return Err(CliError::Usage(format!("--max-degree {} exceeds the cap {MAX_DEGREE_CAP}", c.max_degree)));
        }
        let gamma = match Alphabet::parse(&c.gamma) {
            Some(g) if g.has_group() => g,
            _ => return Err(CliError::Usage(format!("unknown alphabet {:?} (expected trivial, z2, z3, …)", c.gamma))),
        };
        if gamma.len() > GAMMA_CAP {
            return Err(CliError::Usage(format!("alphabets larger than z{GAMMA_CAP} are refused")));
        }
        Ok(Config { max_length: c.max_length, max_degree: c.max_degree, gamma: Arc::new(gamma), seed: c.seed })
    }

    fn echo(&self, suites: Vec<String>) -> ConfigEcho {
        ConfigEcho { max_length: self.max_length, max_degree: self.max_degree, gamma: self.gamma.name(), seed: self.seed, suites }
    }
}

fn workers() -> usize {
    std::env::var("MOULDS_WORKERS")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&n: &usize| n >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn to_report(suite: &str, name: &str, anchor: &str, outcome: suites::Outcome, wall_ms: Option<u64>) -> CheckReport {
    let (status, witness, reason) = match outcome {
        Ok(()) => (Status::Pass, None, None),
        Err(Verdict::Fail(w)) => (Status::Fail, Some(w), None),
        Err(Verdict::Skip(r)) => (Status::Skipped, None, Some(r)),
    };
    CheckReport { suite: suite.into(), name: name.into(), anchor: anchor.into(), status, witness, reason, wall_ms }
}

fn run_suites(cfg: &Config, names: &[String], timings: bool) -> Result<Report, CliError> {
    let mut wanted: Vec<String> = vec![];
    for n in names {
        if n == "all" {
            wanted.extend(suites::SUITES.iter().map(|s| s.to_string()));
        } else if suites::SUITES.contains(&n.as_str()) {
            wanted.push(n.clone());
        } else {
            return Err(CliError::Usage(format!("unknown suite {n:?}; known: {}, all", suites::SUITES.join(", "))));
        }
    }
    wanted.sort();
    wanted.dedup();
    // the RNG stream of a check is its registry index, so results do not
    // depend on which suites run or on scheduling
    let checks: Vec<(u64, suites::Check)> =
        suites::registry().into_iter().enumerate().map(|(i, c)| (i as u64, c)).filter(|(_, c)| wanted.iter().any(|w| w == c.suite)).collect();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<CheckReport>> = Mutex::new(vec![]);
    std::thread::scope(|s| {
        for _ in 0..workers().min(checks.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((stream, check)) = checks.get(i) else { break };
                let mut ctx = Ctx::new(cfg.max_length, cfg.max_degree, cfg.gamma.clone(), cfg.seed, *stream);
                let t = Instant::now();
                let outcome = (check.run)(&mut ctx);
                let ms = timings.then(|| t.elapsed().as_millis() as u64);
                let r = to_report(check.suite, check.name, check.anchor, outcome, ms);
                results.lock().expect("no panics while holding the lock").push(r);
            });
        }
    });
    let results = results.into_inner().expect("workers finished");
    Ok(Report::new("run", cfg.echo(wanted), results, None))
}

fn grt_solve(cfg: &Config, degree: usize, cap: usize) -> Result<Report, CliError> {
    let cap = cap.min(GRT_HARD_CAP);
    if degree > cap {
        return Err(CliError::Usage(format!("degree {degree} exceeds the cap {cap}")));
    }
    let alg = BraidAlgebra::new(4, degree.max(1)).map_err(|e| CliError::Usage(e.to_string()))?;
    let one = NCSeries::one(Arc::new(Alphabet::trivial()), 1);
    let mut checks = vec![];
    let mut graded = vec![];
    for d in 1..=degree {
        let sol = braid::grt_solve(d, &one, &alg).map_err(|e| CliError::Usage(e.to_string()))?;
        let rep = sol.representative(d);
        graded.push(json!({
            "degree": d,
            "dimension": sol.dimension(),
            "representative": if sol.dimension() > 0 { rep.to_json() } else { Value::Null },
        }));
        if sol.dimension() > 0 {
            for (name, outcome) in suites::grt_cross_checks(&rep, d) {
                checks.push(to_report("grt", &name, "pentagon solution cross-checked against balance and double shuffle", outcome, None));
            }
        }
    }
    let data = json!({ "degree": degree, "graded": graded });
    Ok(Report::new("grt-solve", cfg.echo(vec!["grt".into()]), checks, Some(data)))
}

fn export(cfg: &Config, object: Object) -> Result<Value, CliError> {
    let l = cfg.max_length;
    Ok(match object {
        Object::Paj => paj(cfg.gamma.clone(), l).to_json(),
        Object::Pic => pic(cfg.gamma.clone(), l).to_json(),
        Object::Unit => Mould::unit1(FamilyTag::Rat, cfg.gamma.clone(), l).to_json(),
        Object::GrtPhi => {
            let alg = BraidAlgebra::new(4, 3).map_err(|e| CliError::Usage(e.to_string()))?;
            let sol = braid::grt_solve(3, &NCSeries::one(Arc::new(Alphabet::trivial()), 1), &alg).map_err(|e| CliError::Usage(e.to_string()))?;
            let phi = sol.representative(cfg.max_degree.max(3)).exp_circledast().map_err(|e| CliError::Usage(e.to_string()))?;
            phi.to_json()
        }
    })
}

/// Recognizes the object kind by its keys and returns its canonical JSON.
fn import(path: &PathBuf, strict: bool) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(e.to_string()))?;
    let bad = |e: &dyn std::fmt::Display| CliError::Input(e.to_string());
    if v.get("components").is_some() {
        let m = Mould::from_json(&v, strict).map_err(|e| bad(&e))?;
        Ok(json!({ "kind": "mould", "value": m.to_json() }))
    } else if let Some(n) = v.get("n").and_then(Value::as_u64) {
        let deg = v.get("max_degree").and_then(Value::as_u64).ok_or_else(|| CliError::Input("missing max_degree".into()))?;
        let alg = BraidAlgebra::new(n as usize, deg as usize).map_err(|e| bad(&e))?;
        let w = braid::BraidElement::from_json(&alg, &v).map_err(|e| bad(&e))?;
        Ok(json!({ "kind": "braid", "value": w.to_json() }))
    } else if v.get("terms").is_some() {
        let s = NCSeries::from_json(&v, strict).map_err(|e| bad(&e))?;
        Ok(json!({ "kind": "series", "value": s.to_json() }))
    } else {
        Err(CliError::Input("expected a mould, series or braid element".into()))
    }
}

fn emit(common: &Common, text: &str) -> Result<(), CliError> {
    match &common.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_report(common: &Common, r: &Report) -> Result<ExitCode, CliError> {
    let text = match common.format {
        Format::Json => r.to_json(),
        Format::Text => r.to_text(),
    };
    emit(common, &text)?;
    Ok(if r.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run { common, suites, timings } => {
            let cfg = Config::from(&common)?;
            emit_report(&common, &run_suites(&cfg, &suites, timings)?)
        }
        Command::GrtSolve { common, degree, cap } => {
            let cfg = Config::from(&common)?;
            emit_report(&common, &grt_solve(&cfg, degree, cap)?)
        }
        Command::Export { common, object } => {
            let cfg = Config::from(&common)?;
            let v = export(&cfg, object)?;
            emit(&common, &(serde_json::to_string_pretty(&v).expect("json") + "\n"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Import { common, file } => {
            let v = import(&file, common.strict)?;
            emit(&common, &(serde_json::to_string_pretty(&v).expect("json") + "\n"))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("moulds: {e}");
            ExitCode::from(2)
        }
    }
}
