//! The `bendsat` command line.
//!
//! Exit codes: 0 SAT (or a certificate that checks), 1 UNSAT (or one that
//! does not), 2 malformed input, 3 disagreement with the brute-force oracle.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::certify::check::{check_witness, read_refutation, refutation_problem, write_refutation};
use crate::certify::fuzz::{generate, FuzzConfig};
use crate::certify::oracle::{brute_force_sat, OracleAnswer};
use crate::eliminate::{solve_with, SolveOptions, SolveResult};
use crate::error::Error;
use crate::formula::BijunctiveFormula;
use crate::frontend::json::{parse_witness, sat_json, unsat_json, witness_json};
use crate::frontend::parse::parse_named;
use crate::frontend::print::pretty_print;

pub const EXIT_SAT: i32 = 0;
pub const EXIT_UNSAT: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_DISAGREE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "bendsat", version, about = "Decide conjunctions of bends over the rationals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide satisfiability of a .bnd file.
    Solve(SolveArgs),
    /// Verify a witness or refutation certificate against a .bnd file.
    Check(CheckArgs),
    /// Run the solver against the oracle on seeded random instances.
    Fuzz(FuzzArgs),
}

#[derive(Args, Debug)]
struct SolveArgs {
    file: PathBuf,
    /// Print the satisfying assignment.
    #[arg(long)]
    witness: bool,
    /// Print a handcuff refutation when one is found.
    #[arg(long)]
    certificate: bool,
    /// Cross-check the answer with the brute-force oracle.
    #[arg(long)]
    oracle: bool,
    /// Issue search probes concurrently.
    #[arg(long)]
    parallel: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("evidence").required(true).multiple(false)))]
struct CheckArgs {
    file: PathBuf,
    /// JSON witness file.
    #[arg(long, group = "evidence")]
    witness: Option<PathBuf>,
    /// Refutation certificate file.
    #[arg(long, group = "evidence")]
    certificate: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct FuzzArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 5)]
    vars: usize,
    #[arg(long, default_value_t = 8)]
    bends: usize,
    /// Only two-variable inequalities and bounds.
    #[arg(long)]
    tvpi: bool,
    #[arg(long)]
    parallel: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn load(path: &Path) -> Result<BijunctiveFormula, Error> {
    parse_named(&read(path)?, &path.display().to_string())
}

fn emit_json(out: &mut dyn Write, v: &Value) -> std::io::Result<()> {
    writeln!(out, "{v}")
}

fn solve_cmd(a: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    let phi = load(&a.file)?;
    let opts = SolveOptions {
        certify: a.certificate,
        parallel: a.parallel,
        ..SolveOptions::default()
    };
    let result = solve_with(&phi, &opts)?;
    if a.oracle {
        match brute_force_sat(&phi) {
            Ok(answer) if answer.is_sat() != result.is_sat() => {
                let _ = writeln!(
                    err,
                    "oracle disagrees: solver says {}, oracle says {}",
                    if result.is_sat() { "SAT" } else { "UNSAT" },
                    if answer.is_sat() { "SAT" } else { "UNSAT" }
                );
                return Ok(EXIT_DISAGREE);
            }
            Ok(_) => {}
            Err(e) => {
                let _ = writeln!(err, "oracle skipped: {e}");
            }
        }
    }
    let io = |e: std::io::Error| Error::Io { path: "<stdout>".into(), message: e.to_string() };
    match result {
        SolveResult::Sat(w) => {
            match a.format {
                Format::Json => emit_json(out, &sat_json(&phi, a.witness.then_some(&w))).map_err(io)?,
                Format::Text => {
                    writeln!(out, "SAT").map_err(io)?;
                    if a.witness {
                        for (v, q) in w.iter() {
                            writeln!(out, "{} = {q}", phi.name(v)).map_err(io)?;
                        }
                    }
                }
            }
            Ok(EXIT_SAT)
        }
        SolveResult::Unsat { refutation, .. } => {
            let cert = match (&refutation, a.certificate) {
                (Some(r), true) => Some(write_refutation(r, &phi)?),
                _ => None,
            };
            match a.format {
                Format::Json => emit_json(out, &unsat_json(a.certificate.then_some(cert))).map_err(io)?,
                Format::Text => {
                    writeln!(out, "UNSAT").map_err(io)?;
                    if a.certificate {
                        match cert {
                            Some(c) => write!(out, "{c}").map_err(io)?,
                            None => writeln!(out, "# no handcuff refutation within the search limits").map_err(io)?,
                        }
                    }
                }
            }
            Ok(EXIT_UNSAT)
        }
    }
}

fn check_cmd(a: &CheckArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let phi = load(&a.file)?;
    let (ok, reason) = if let Some(path) = &a.witness {
        let w = parse_witness(&read(path)?, &phi)?;
        let ok = check_witness(&phi, &w);
        (ok, (!ok).then(|| "the assignment does not satisfy every bend".to_string()))
    } else {
        let path = a.certificate.as_ref().expect("clap requires one of the two");
        let text = read(path)?;
        let text = match serde_json::from_str::<Value>(&text) {
            Ok(v) => v
                .get("certificate")
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| Error::Certificate("no \"certificate\" string in JSON".into()))?,
            Err(_) => text,
        };
        match read_refutation(&text, &phi) {
            Ok(cert) => {
                let problem = refutation_problem(&cert, &phi);
                (problem.is_none(), problem)
            }
            Err(e) => (false, Some(e.to_string())),
        }
    };
    let written = match a.format {
        Format::Json => emit_json(out, &json!({ "valid": ok, "reason": reason })),
        Format::Text => match &reason {
            None => writeln!(out, "VALID"),
            Some(r) => writeln!(out, "INVALID: {r}"),
        },
    };
    written.map_err(|e| Error::Io { path: "<stdout>".into(), message: e.to_string() })?;
    Ok(if ok { EXIT_SAT } else { EXIT_UNSAT })
}

fn fuzz_cmd(a: &FuzzArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let cfg = FuzzConfig {
        max_vars: a.vars,
        max_bends: a.bends,
        tvpi_only: a.tvpi,
        ..FuzzConfig::default()
    };
    let opts = SolveOptions {
        certify: false,
        parallel: a.parallel,
        ..SolveOptions::default()
    };
    let mut rows = Vec::new();
    let (mut sat, mut disagreements) = (0usize, 0usize);
    for (i, phi) in generate(a.seed, a.count, &cfg).iter().enumerate() {
        let result = solve_with(phi, &opts)?;
        let oracle = match brute_force_sat(phi) {
            Ok(OracleAnswer::Sat(_)) => Some(true),
            Ok(OracleAnswer::Unsat) => Some(false),
            Err(_) => None,
        };
        let agree = oracle.is_none_or(|o| o == result.is_sat());
        sat += usize::from(result.is_sat());
        disagreements += usize::from(!agree);
        let mut row = json!({
            "index": i,
            "formula": pretty_print(phi),
            "status": if result.is_sat() { "sat" } else { "unsat" },
            "oracle": oracle.map(|o| if o { "sat" } else { "unsat" }),
        });
        if let Some(w) = result.witness() {
            row["witness"] = witness_json(phi, w);
        }
        rows.push(row);
    }
    let io = |e: std::io::Error| Error::Io { path: "<stdout>".into(), message: e.to_string() };
    match a.format {
        Format::Json => emit_json(
            out,
            &json!({
                "seed": a.seed,
                "count": a.count,
                "sat": sat,
                "unsat": a.count - sat,
                "disagreements": disagreements,
                "instances": rows,
            }),
        )
        .map_err(io)?,
        Format::Text => writeln!(
            out,
            "{} instances, {sat} SAT, {} UNSAT, {disagreements} disagreements",
            a.count,
            a.count - sat
        )
        .map_err(io)?,
    }
    Ok(if disagreements == 0 { EXIT_SAT } else { EXIT_DISAGREE })
}

/// Runs the command line given by `args` (including the program name) and
/// returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_SAT };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => solve_cmd(a, out, err),
        Command::Check(a) => check_cmd(a, out),
        Command::Fuzz(a) => fuzz_cmd(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}
