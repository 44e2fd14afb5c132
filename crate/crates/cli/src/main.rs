//! `thomae`: validate covers, enumerate non-special divisors, print Thomae
//! exponent tables and Dedekind sums.
//!
//! Exit codes: 0 success, 1 unreadable or malformed document, 2 invalid
//! input (cover, key, or divisor selector), 3 search cap exceeded, 4 self-test
//! failure.

mod document;
mod selftest;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use thomae_core::dedekind::{phi_exact, PhiKey};
use thomae_core::divisors::orbit_labels;
use thomae_core::exponents::ExponentTable;
use thomae_core::{Cover, InvariantDivisor, SearchOptions};

use document::{read_document, ParseError};

#[derive(Parser, Debug)]
#[command(name = "thomae", version, about = "Exact Thomae exponents for abelian covers of the line")]
struct Cli {
    /// Emit JSON
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV (enumerate and exponents)
    #[arg(long, global = true)]
    csv: bool,
    /// Node budget for the divisor search
    #[arg(long, global = true, default_value_t = 100_000_000)]
    cap: u64,
    /// Worker threads; output does not depend on this
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Run the bundled worked examples
    #[arg(long)]
    selftest: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a cover document and print n, m, the genus and the t table
    Validate { path: String },
    /// List every non-special invariant divisor with its orbit
    Enumerate { path: String },
    /// Exponent table for one divisor
    Exponents {
        path: String,
        /// Position in the `enumerate` listing
        #[arg(long, conflicts_with = "beta", required_unless_present = "beta")]
        divisor: Option<usize>,
        /// Coefficients in canonical point order, comma separated
        #[arg(long, value_delimiter = ',')]
        beta: Option<Vec<u64>>,
    },
    /// Exact generalized Dedekind sum phi_{h+dZ}(s)
    Dedekind {
        d: u64,
        #[arg(allow_negative_numbers = true)]
        h: i64,
        #[arg(allow_negative_numbers = true)]
        s: i64,
    },
    /// Same as --selftest
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Error)]
enum Failure {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Core(#[from] thomae_core::Error),
    #[error("{0}")]
    Selector(String),
    #[error("{0} self-test check(s) failed")]
    Selftest(usize),
    #[error("output: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 1,
            Failure::Core(thomae_core::Error::SearchCapExceeded { .. }) => 3,
            Failure::Core(_) | Failure::Selector(_) => 2,
            Failure::Selftest(_) => 4,
            Failure::Io(_) | Failure::Csv(_) | Failure::Json(_) => 1,
        }
    }

    fn reason(&self) -> &'static str {
        match self {
            Failure::Parse(_) => "parse",
            Failure::Core(e) => e.reason(),
            Failure::Selector(_) => "selector",
            Failure::Selftest(_) => "selftest",
            Failure::Io(_) | Failure::Csv(_) | Failure::Json(_) => "output",
        }
    }
}

type Out<'a> = &'a mut dyn Write;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = if cli.json {
        Format::Json
    } else if cli.csv {
        Format::Csv
    } else {
        Format::Text
    };
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let opts = SearchOptions { cap: cli.cap, workers };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match (&cli.command, cli.selftest) {
        (Some(Command::Selftest), _) | (None, true) => cmd_selftest(&mut out, format, &opts),
        (Some(cmd), false) => run(cmd, &mut out, format, &opts),
        (Some(_), true) => Err(Failure::Selector("--selftest cannot be combined with a command".into())),
        (None, false) => {
            eprintln!("no command given; try `thomae --help`");
            return ExitCode::from(2);
        }
    };
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if format == Format::Json {
                let report = serde_json::json!({ "ok": false, "reason": e.reason(), "message": e.to_string() });
                let _ = writeln!(out, "{report}");
            }
            eprintln!("error[{}]: {e}", e.reason());
            ExitCode::from(e.code())
        }
    }
}

fn run(cmd: &Command, out: Out, format: Format, opts: &SearchOptions) -> Result<(), Failure> {
    match cmd {
        Command::Validate { path } => cmd_validate(out, format, path),
        Command::Enumerate { path } => cmd_enumerate(out, format, path, opts),
        Command::Exponents { path, divisor, beta } => {
            cmd_exponents(out, format, path, *divisor, beta.as_deref(), opts)
        }
        Command::Dedekind { d, h, s } => cmd_dedekind(out, format, *d, *h, *s),
        Command::Selftest => cmd_selftest(out, format, opts),
    }
}

fn load(path: &str) -> Result<Cover, Failure> {
    let doc = read_document(path)?;
    Ok(doc.to_spec()??.validate()?)
}

#[derive(Serialize)]
struct PointRow {
    element_rank: usize,
    occurrence: usize,
    element: Vec<u64>,
    order: u64,
    lambda: String,
}

#[derive(Serialize)]
struct CharacterRow {
    character: Vec<u64>,
    t: u64,
}

#[derive(Serialize)]
struct ValidateReport {
    ok: bool,
    fingerprint: String,
    n: u64,
    m: u64,
    genus: u64,
    points: Vec<PointRow>,
    t: Vec<CharacterRow>,
}

fn cmd_validate(out: Out, format: Format, path: &str) -> Result<(), Failure> {
    let c = load(path)?;
    let report = ValidateReport {
        ok: true,
        fingerprint: c.fingerprint().to_string(),
        n: c.n(),
        m: c.m(),
        genus: c.genus(),
        points: c
            .points()
            .iter()
            .map(|p| PointRow {
                element_rank: p.index.element_rank,
                occurrence: p.index.occurrence,
                element: p.element.residues().to_vec(),
                order: p.order,
                lambda: p.lambda.to_string(),
            })
            .collect(),
        t: c
            .characters()
            .iter()
            .enumerate()
            .map(|(k, chi)| CharacterRow { character: chi.residues().to_vec(), t: c.t(k) })
            .collect(),
    };
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(&report)?)?,
        _ => {
            writeln!(out, "valid")?;
            writeln!(out, "fingerprint {}", report.fingerprint)?;
            writeln!(out, "n {}", report.n)?;
            writeln!(out, "m {}", report.m)?;
            writeln!(out, "genus {}", report.genus)?;
            writeln!(out, "points (canonical order)")?;
            for p in &report.points {
                writeln!(out, "  ({},{}) {:?} order {} lambda {}", p.element_rank, p.occurrence, p.element, p.order, p.lambda)?;
            }
            writeln!(out, "t")?;
            for row in &report.t {
                writeln!(out, "  {:?} {}", row.character, row.t)?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct DivisorRow {
    index: usize,
    orbit: usize,
    orbit_fingerprint: String,
    beta: Vec<u64>,
    pole: i64,
}

#[derive(Serialize)]
struct EnumerateReport {
    ok: bool,
    cover: String,
    genus: u64,
    count: usize,
    orbits: usize,
    empty: bool,
    divisors: Vec<DivisorRow>,
}

fn join(beta: &[u64]) -> String {
    beta.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn enumerate(c: &Cover, opts: &SearchOptions) -> Result<Vec<InvariantDivisor>, Failure> {
    Ok(c.enumerate_nonspecial(opts)?)
}

fn cmd_enumerate(out: Out, format: Format, path: &str, opts: &SearchOptions) -> Result<(), Failure> {
    let c = load(path)?;
    let all = enumerate(&c, opts)?;
    let labels = orbit_labels(&c, &all)?;
    let mut rows = Vec::with_capacity(all.len());
    for (k, (d, &orbit)) in all.iter().zip(&labels).enumerate() {
        rows.push(DivisorRow {
            index: k,
            orbit,
            orbit_fingerprint: c.orbit_fingerprint(d)?.to_string(),
            beta: d.beta().to_vec(),
            pole: d.pole(),
        });
    }
    let report = EnumerateReport {
        ok: true,
        cover: c.fingerprint().to_string(),
        genus: c.genus(),
        count: rows.len(),
        orbits: labels.iter().max().map_or(0, |m| m + 1),
        empty: rows.is_empty(),
        divisors: rows,
    };
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(&report)?)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["index", "orbit", "orbit_fingerprint", "beta", "pole"])?;
            for r in &report.divisors {
                w.write_record([
                    r.index.to_string(),
                    r.orbit.to_string(),
                    r.orbit_fingerprint.clone(),
                    join(&r.beta),
                    r.pole.to_string(),
                ])?;
            }
            w.flush()?;
            if report.empty {
                eprintln!("empty");
            }
        }
        Format::Text => {
            if report.empty {
                writeln!(out, "empty: no non-special invariant divisors (genus {})", report.genus)?;
            } else {
                writeln!(out, "{} divisors, {} orbits", report.count, report.orbits)?;
                writeln!(out, "index orbit beta")?;
                for r in &report.divisors {
                    writeln!(out, "{} {} {}", r.index, r.orbit, join(&r.beta))?;
                }
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ExponentRow {
    sigma_rank: usize,
    j: usize,
    rho_rank: usize,
    i: usize,
    lambda_a: String,
    lambda_b: String,
    exponent: i64,
}

#[derive(Serialize)]
struct ExponentReport {
    ok: bool,
    cover: String,
    divisor_fingerprint: String,
    beta: Vec<u64>,
    theta_exponent: u64,
    detc_exponent: u64,
    total_degree: i64,
    rows: Vec<ExponentRow>,
}

fn exponent_report(c: &Cover, d: &InvariantDivisor, t: &ExponentTable) -> Result<ExponentReport, Failure> {
    let mut rows = Vec::with_capacity(t.entries.len());
    for e in &t.entries {
        let (a, b) = (e.pair.first(), e.pair.second());
        rows.push(ExponentRow {
            sigma_rank: a.element_rank,
            j: a.occurrence,
            rho_rank: b.element_rank,
            i: b.occurrence,
            lambda_a: c.points()[c.position(a)?].lambda.to_string(),
            lambda_b: c.points()[c.position(b)?].lambda.to_string(),
            exponent: e.exponent,
        });
    }
    Ok(ExponentReport {
        ok: true,
        cover: t.cover.to_string(),
        divisor_fingerprint: t.divisor_fingerprint.to_string(),
        beta: d.beta().to_vec(),
        theta_exponent: t.theta_exponent,
        detc_exponent: t.detc_exponent,
        total_degree: t.total_degree(),
        rows,
    })
}

fn cmd_exponents(
    out: Out,
    format: Format,
    path: &str,
    index: Option<usize>,
    beta: Option<&[u64]>,
    opts: &SearchOptions,
) -> Result<(), Failure> {
    let c = load(path)?;
    let d = match (index, beta) {
        (Some(k), _) => {
            let all = enumerate(&c, opts)?;
            let len = all.len();
            all.into_iter()
                .nth(k)
                .ok_or_else(|| Failure::Selector(format!("divisor index {k} out of range, there are {len}")))?
        }
        (None, Some(beta)) => {
            let d = c.divisor(beta.to_vec(), 1)?;
            if !c.is_nonspecial(&d)? {
                return Err(Failure::Selector(format!("beta {} is not non-special", join(beta))));
            }
            d
        }
        (None, None) => return Err(Failure::Selector("give --divisor or --beta".into())),
    };
    let table = c.exponent_table(&d, opts.workers)?;
    let report = exponent_report(&c, &d, &table)?;
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(&report)?)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            for r in &report.rows {
                w.serialize(r)?;
            }
            if report.rows.is_empty() {
                w.write_record(["sigma_rank", "j", "rho_rank", "i", "lambda_a", "lambda_b", "exponent"])?;
            }
            w.flush()?;
        }
        Format::Text => {
            writeln!(out, "beta {}", join(&report.beta))?;
            writeln!(out, "theta_exponent {}", report.theta_exponent)?;
            writeln!(out, "detc_exponent {}", report.detc_exponent)?;
            writeln!(out, "total_degree {}", report.total_degree)?;
            writeln!(out, "sigma_rank j rho_rank i lambda_a lambda_b exponent")?;
            for r in &report.rows {
                writeln!(
                    out,
                    "{} {} {} {} {} {} {}",
                    r.sigma_rank, r.j, r.rho_rank, r.i, r.lambda_a, r.lambda_b, r.exponent
                )?;
            }
        }
    }
    Ok(())
}

fn cmd_dedekind(out: Out, format: Format, d: u64, h: i64, s: i64) -> Result<(), Failure> {
    let key = PhiKey::new(d, h, s)?;
    let value = phi_exact(key);
    match format {
        Format::Json => {
            let report = serde_json::json!({
                "ok": true, "d": key.d(), "h": key.h(), "s": key.s(), "value": value.to_string()
            });
            writeln!(out, "{report}")?;
        }
        _ => writeln!(out, "{value}")?,
    }
    Ok(())
}

fn cmd_selftest(out: Out, format: Format, opts: &SearchOptions) -> Result<(), Failure> {
    let outcomes = selftest::run(opts);
    let failed = outcomes.iter().filter(|o| o.result.is_err()).count();
    match format {
        Format::Json => {
            let checks: Vec<_> = outcomes
                .iter()
                .map(|o| serde_json::json!({ "name": o.name, "ok": o.result.is_ok(), "detail": o.result.as_ref().err() }))
                .collect();
            writeln!(out, "{}", serde_json::json!({ "ok": failed == 0, "checks": checks }))?;
        }
        _ => {
            for o in &outcomes {
                match &o.result {
                    Ok(()) => writeln!(out, "ok   {}", o.name)?,
                    Err(msg) => writeln!(out, "FAIL {}: {msg}", o.name)?,
                }
            }
        }
    }
    if failed > 0 {
        return Err(Failure::Selftest(failed));
    }
    Ok(())
}
