//! `nearsq` command-line front end.
//!
//! Exit status: 0 when the command completed with no anomalies, 1 when
//! anomalies were recorded, 2 on usage or configuration errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use nearsq::arith::{factorize, ArithError, Factorization};
use nearsq::pell::{
    family_census_check, pell_family_upto, theorem_log_threshold, turk_log_bound,
    FamilyCensusCheck, PellError, PellExample,
};
use nearsq::search::{
    scan_with_records, verify_instance, InstanceReport, ScanOptions, ScanReport, SearchError,
    SCHEMA_VERSION,
};
use nearsq::window::{window_census, Coeff, WindowError, WindowParams};
use num_bigint::BigUint;
use serde::Serialize;

/// Directory for scan checkpoints when `--checkpoint` is not given.
pub const CHECKPOINT_DIR_ENV: &str = "NEARSQ_CHECKPOINT_DIR";

#[derive(Debug, Parser)]
#[command(name = "nearsq", version, about = "Divisors of perfect squares near the square root")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
    Jsonl,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Divisors of N² in [N − c√N, N + c√N] and their pairing.
    Census {
        #[arg(long = "n")]
        n: BigUint,
        #[arg(long, value_parser = parse_window_coeff)]
        c: Coeff,
        /// File with one "prime exponent" pair per line factoring N.
        #[arg(long)]
        factors: Option<PathBuf>,
    },
    /// Run the full verification chain on one N.
    Verify {
        #[arg(long = "n")]
        n: BigUint,
        #[arg(long, value_parser = parse_window_coeff)]
        c: Coeff,
        #[arg(long)]
        factors: Option<PathBuf>,
    },
    /// Verify every N in [from, to] and report records.
    Scan {
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        #[arg(long, value_parser = parse_window_coeff)]
        c: Coeff,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Log instances with at least this many pairs.
        #[arg(long, default_value_t = 3)]
        min_pairs: usize,
        #[arg(long, default_value_t = 1000)]
        batch_size: u64,
    },
    /// Members of the family built from X² − 2Y² = 2.
    PellFamily {
        #[arg(long)]
        k_max: u32,
        #[arg(long, value_parser = parse_window_coeff, default_value = "5")]
        c: Coeff,
        /// Compare each member against a window census of N = (X − 2)(X + 2).
        #[arg(long)]
        cross_check: bool,
    },
    /// Log-space bound and threshold for a window coefficient.
    Bounds {
        #[arg(long, value_parser = parse_window_coeff)]
        c: Coeff,
        /// The unspecified absolute constant in both formulas.
        #[arg(long, default_value_t = 1.0)]
        constant: f64,
    },
}

fn parse_window_coeff(s: &str) -> Result<Coeff, String> {
    let c = Coeff::from_str(s).map_err(|e| e.to_string())?;
    if !c.is_at_least_one() {
        return Err(format!("c = {c} must be at least 1"));
    }
    Ok(c)
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(io::Error),
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

fn budget_hint(e: impl std::fmt::Display, arith: Option<&ArithError>) -> CliError {
    match arith {
        Some(ArithError::SizeBudgetExceeded { .. }) => CliError::Config(format!(
            "{e}\nhint: pass --factors FILE with one \"prime exponent\" pair per line"
        )),
        _ => CliError::Config(e.to_string()),
    }
}

impl From<WindowError> for CliError {
    fn from(e: WindowError) -> Self {
        let arith = match &e {
            WindowError::Arith(a) => Some(a.clone()),
            _ => None,
        };
        budget_hint(e, arith.as_ref())
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        let arith = match &e {
            SearchError::Arith(a) | SearchError::Window(WindowError::Arith(a)) => Some(a.clone()),
            _ => None,
        };
        budget_hint(e, arith.as_ref())
    }
}

impl From<PellError> for CliError {
    fn from(e: PellError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Parses `argv`, runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(&cli, &mut out) {
        Ok(code) => code,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Census { n, c, factors } => census(cli.format, n, c, factors.as_deref(), out),
        Command::Verify { n, c, factors } => verify(cli.format, n, c, factors.as_deref(), out),
        Command::Scan {
            from,
            to,
            c,
            jobs,
            checkpoint,
            min_pairs,
            batch_size,
        } => {
            let checkpoint = checkpoint.clone().or_else(|| {
                std::env::var_os(CHECKPOINT_DIR_ENV).map(|dir| {
                    PathBuf::from(dir).join(format!(
                        "scan-{from}-{to}-c{}_{}.json",
                        c.numer(),
                        c.denom()
                    ))
                })
            });
            let opts = ScanOptions {
                min_pairs_to_log: *min_pairs,
                checkpoint_path: checkpoint,
                parallelism: *jobs,
                batch_size: *batch_size,
                ..ScanOptions::default()
            };
            scan(cli.format, *from, *to, c, &opts, out)
        }
        Command::PellFamily {
            k_max,
            c,
            cross_check,
        } => pell_family(cli.format, *k_max, c, *cross_check, out),
        Command::Bounds { c, constant } => bounds(cli.format, c, *constant, out),
    }
}

/// Reads a factorization file: one `prime exponent` pair per line; blank
/// lines and `#` comments are ignored.
pub fn read_factors_file(path: &Path, n: &BigUint) -> Result<Factorization, CliError> {
    let text = fs::read_to_string(path)?;
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || CliError::Config(format!("{}:{}: expected \"prime exponent\"", path.display(), idx + 1));
        let mut parts = line.split_whitespace();
        let p = parts.next().and_then(|s| BigUint::from_str(s).ok()).ok_or_else(bad)?;
        let e = parts.next().and_then(|s| s.parse::<u32>().ok()).ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        entries.push((p, e));
    }
    let f = Factorization::from_prime_powers(entries)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if f.value() != n {
        return Err(CliError::Config(format!(
            "{}: factors multiply to {}, not {n}",
            path.display(),
            f.value()
        )));
    }
    Ok(f)
}

fn load_factors(path: Option<&Path>, n: &BigUint) -> Result<Option<Factorization>, CliError> {
    path.map(|p| read_factors_file(p, n)).transpose()
}

fn write_json<T: Serialize>(format: Format, value: &T, out: &mut dyn Write) -> io::Result<()> {
    let text = if format == Format::Json {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .expect("report serializes");
    writeln!(out, "{text}")
}

fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(sep)
}

#[derive(Serialize)]
struct PairOut {
    d: String,
    e: String,
    l: String,
    low: String,
    high: String,
}

#[derive(Serialize)]
struct CensusOut {
    schema_version: u32,
    #[serde(rename = "N")]
    n: String,
    c: Coeff,
    factorization: String,
    window: (String, String),
    census_size: usize,
    r: usize,
    divisors: Vec<String>,
    pairs: Vec<PairOut>,
    unpaired_low: Vec<String>,
    unpaired_high: Vec<String>,
}

fn census(
    format: Format,
    n: &BigUint,
    c: &Coeff,
    factors: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let params = WindowParams::new(n.clone(), c.clone())?;
    let factors = match load_factors(factors, n)? {
        Some(f) => f,
        None => factorize(n).map_err(|e| budget_hint(&e, Some(&e)))?,
    };
    let cen = window_census(&params, Some(&factors))?;
    let (lo, hi) = params.bounds();
    let strs = |v: &[BigUint]| v.iter().map(|q| q.to_string()).collect::<Vec<_>>();
    let report = CensusOut {
        schema_version: SCHEMA_VERSION,
        n: n.to_string(),
        c: c.clone(),
        factorization: factors.to_string(),
        window: (lo.to_string(), hi.to_string()),
        census_size: cen.size(),
        r: cen.r(),
        divisors: strs(&cen.divisors),
        pairs: cen
            .pairs
            .iter()
            .map(|w| PairOut {
                d: w.d().to_string(),
                e: w.e().to_string(),
                l: w.l().to_string(),
                low: w.low().to_string(),
                high: w.high().to_string(),
            })
            .collect(),
        unpaired_low: strs(&cen.unpaired_low),
        unpaired_high: strs(&cen.unpaired_high),
    };
    match format {
        Format::Json | Format::Jsonl => write_json(format, &report, out)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["q", "side", "paired"])?;
            for q in &cen.divisors {
                let side = match q.cmp(n) {
                    std::cmp::Ordering::Less => "low",
                    std::cmp::Ordering::Equal => "center",
                    std::cmp::Ordering::Greater => "high",
                };
                let unpaired = cen.unpaired_low.contains(q) || cen.unpaired_high.contains(q);
                let paired = if q == n { "-" } else if unpaired { "no" } else { "yes" };
                w.write_record([q.to_string().as_str(), side, paired])?;
            }
            w.flush()?;
        }
        Format::Human => {
            let mut s = String::new();
            let _ = writeln!(s, "N = {n}  c = {c}  window = [{lo}, {hi}]");
            let _ = writeln!(s, "factorization: {}", report.factorization);
            let _ = writeln!(s, "census size {}  pairs r = {}", cen.size(), cen.r());
            let _ = writeln!(s, "divisors: {}", join(&cen.divisors, " "));
            if !cen.pairs.is_empty() {
                let _ = writeln!(s, "{:>12} {:>12} {:>8}", "d", "e", "l");
                for w in &cen.pairs {
                    let _ = writeln!(s, "{:>12} {:>12} {:>8}", w.d(), w.e(), w.l());
                }
            }
            if !cen.unpaired_low.is_empty() || !cen.unpaired_high.is_empty() {
                let _ = writeln!(
                    s,
                    "unpaired: low [{}]  high [{}]",
                    join(&cen.unpaired_low, ", "),
                    join(&cen.unpaired_high, ", ")
                );
            }
            out.write_all(s.as_bytes())?;
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

fn verify(
    format: Format,
    n: &BigUint,
    c: &Coeff,
    factors: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let factors = load_factors(factors, n)?;
    let rep = verify_instance(n, c, factors.as_ref())?;
    match format {
        Format::Json | Format::Jsonl => write_json(
            format,
            &Versioned {
                schema_version: SCHEMA_VERSION,
                body: &rep,
            },
            out,
        )?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            write_instance_csv_header(&mut w)?;
            write_instance_csv(&mut w, &rep)?;
            w.flush()?;
        }
        Format::Human => {
            let mut s = String::new();
            let yes = |b: bool| if b { "ok" } else { "FAIL" };
            let _ = writeln!(s, "N = {}  c = {}", rep.n, rep.c);
            let _ = writeln!(s, "census size {}  pairs r = {}", rep.census_size, rep.r);
            let _ = writeln!(s, "canonical mu: [{}]", join(&rep.mu_list, ", "));
            let _ = writeln!(s, "pipeline        {}", yes(rep.pipeline_ok));
            let _ = writeln!(s, "mu c^2 distinct {}", yes(rep.lemma1_ok));
            let _ = writeln!(
                s,
                "mu distinct     {} (N > 32c^6: {})",
                yes(rep.mu_distinct_ok),
                rep.mu_gate_met
            );
            let _ = writeln!(
                s,
                "mu~ distinct    {} (N > 512c^10: {})",
                yes(rep.mu_tilde_distinct_ok),
                rep.mu_tilde_gate_met
            );
            if let Some(sys) = &rep.pell_system {
                for j in [2, 3] {
                    let (t1, tj) = (&sys.terms[0], &sys.terms[j - 1]);
                    let _ = writeln!(
                        s,
                        "pell {}: {}*{}^2 - {}*{}^2 = {}",
                        j - 1,
                        t1.mu,
                        t1.base,
                        tj.mu,
                        tj.base,
                        sys.rhs(j)
                    );
                }
            }
            for a in &rep.anomalies {
                let _ = writeln!(s, "anomaly {:?}: {}", a.kind, a.detail);
            }
            out.write_all(s.as_bytes())?;
        }
    }
    Ok(if rep.anomalies.is_empty() { 0 } else { 1 })
}

fn write_instance_csv_header<W: Write>(w: &mut csv::Writer<W>) -> csv::Result<()> {
    w.write_record([
        "N",
        "c",
        "census_size",
        "r",
        "mu_list",
        "pipeline_ok",
        "lemma1_ok",
        "mu_distinct_ok",
        "mu_tilde_distinct_ok",
        "pell_system",
        "anomalies",
    ])
}

fn write_instance_csv<W: Write>(w: &mut csv::Writer<W>, rep: &InstanceReport) -> csv::Result<()> {
    w.write_record([
        rep.n.to_string(),
        rep.c.to_string(),
        rep.census_size.to_string(),
        rep.r.to_string(),
        join(&rep.mu_list, " "),
        rep.pipeline_ok.to_string(),
        rep.lemma1_ok.to_string(),
        rep.mu_distinct_ok.to_string(),
        rep.mu_tilde_distinct_ok.to_string(),
        rep.pell_system.is_some().to_string(),
        rep.anomalies.len().to_string(),
    ])
}

fn scan(
    format: Format,
    from: u64,
    to: u64,
    c: &Coeff,
    opts: &ScanOptions,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let mut io_err: Option<io::Error> = None;
    let report: ScanReport = match format {
        Format::Jsonl => scan_with_records(from, to, c, opts, |inst| {
            if io_err.is_none() {
                let line = serde_json::to_string(&inst.record()).expect("record serializes");
                if let Err(e) = writeln!(out, "{line}") {
                    io_err = Some(e);
                }
            }
        })?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            write_instance_csv_header(&mut w)?;
            let mut csv_err = None;
            let report = scan_with_records(from, to, c, opts, |inst| {
                if csv_err.is_none() {
                    if let Err(e) = write_instance_csv(&mut w, inst) {
                        csv_err = Some(e);
                    }
                }
            })?;
            if let Some(e) = csv_err {
                return Err(e.into());
            }
            w.flush()?;
            report
        }
        _ => scan_with_records(from, to, c, opts, |_| {})?,
    };
    if let Some(e) = io_err {
        return Err(e.into());
    }
    match format {
        Format::Json => write_json(format, &report, out)?,
        Format::Jsonl => {
            #[derive(Serialize)]
            struct Summary<'a> {
                kind: &'static str,
                #[serde(flatten)]
                report: &'a ScanReport,
            }
            write_json(
                format,
                &Summary {
                    kind: "scan_report",
                    report: &report,
                },
                out,
            )?
        }
        Format::Csv => {}
        Format::Human => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "scanned N in [{}, {}]  c = {}  ({} instances, {} pairs)",
                report.range.0, report.range.1, report.c, report.instances, report.pairs_total
            );
            let _ = writeln!(
                s,
                "max census size {} at N = {}",
                report.max_census_size,
                join(&report.max_census_argmax, ", ")
            );
            let _ = writeln!(s, "max r {} at N = {}", report.max_r, join(&report.max_r_argmax, ", "));
            for (t, list) in &report.instances_with_r_at_least {
                let _ = writeln!(s, "r >= {t}: {} instances", list.len());
            }
            let _ = writeln!(s, "shared mu c^2: {}", report.lemma1_violations);
            let _ = writeln!(
                s,
                "shared mu: {} above gate, {} below",
                report.raw_mu_collisions.above_gate, report.raw_mu_collisions.below_gate
            );
            let _ = writeln!(
                s,
                "shared mu~: {} above gate, {} below",
                report.squarefree_mu_collisions.above_gate,
                report.squarefree_mu_collisions.below_gate
            );
            let _ = writeln!(s, "pell systems {}", report.pell_systems);
            let _ = writeln!(s, "anomalies {}", report.anomaly_count);
            if !report.is_complete_through(to) {
                let _ = writeln!(s, "stopped early; resume from N = {}", report.next_n);
            }
            out.write_all(s.as_bytes())?;
        }
    }
    Ok(if report.anomaly_count == 0 { 0 } else { 1 })
}

#[derive(Serialize)]
struct FamilyLine<'a> {
    #[serde(flatten)]
    example: &'a PellExample,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_check: Option<CrossCheckOut<'a>>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum CrossCheckOut<'a> {
    Done(&'a FamilyCensusCheck),
    Skipped { skipped: String },
}

fn pell_family(
    format: Format,
    k_max: u32,
    c: &Coeff,
    cross_check: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let members = pell_family_upto(k_max)?;
    let mut checks: Vec<Option<Result<FamilyCensusCheck, String>>> = Vec::new();
    for ex in &members {
        if !cross_check {
            checks.push(None);
            continue;
        }
        match family_census_check(ex, c) {
            Ok(chk) => checks.push(Some(Ok(chk))),
            Err(PellError::Arith(e)) | Err(PellError::Window(WindowError::Arith(e))) => {
                eprintln!("k = {}: cross-check skipped: {e}", ex.k);
                checks.push(Some(Err(e.to_string())));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let mismatches = checks
        .iter()
        .filter(|c| matches!(c, Some(Ok(chk)) if !chk.matches))
        .count();
    let lines: Vec<FamilyLine> = members
        .iter()
        .zip(&checks)
        .map(|(ex, chk)| FamilyLine {
            example: ex,
            cross_check: chk.as_ref().map(|r| match r {
                Ok(chk) => CrossCheckOut::Done(chk),
                Err(msg) => CrossCheckOut::Skipped {
                    skipped: msg.clone(),
                },
            }),
        })
        .collect();
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct FamilyOut<'a> {
                schema_version: u32,
                c: &'a Coeff,
                members: &'a [FamilyLine<'a>],
            }
            write_json(
                format,
                &FamilyOut {
                    schema_version: SCHEMA_VERSION,
                    c,
                    members: &lines,
                },
                out,
            )?;
        }
        Format::Jsonl => {
            for line in &lines {
                write_json(format, line, out)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["k", "X", "Y", "n", "div1", "div2", "div3", "cross_check"])?;
            for line in &lines {
                let ex = line.example;
                let chk = match &line.cross_check {
                    None => String::new(),
                    Some(CrossCheckOut::Done(c)) => c.matches.to_string(),
                    Some(CrossCheckOut::Skipped { .. }) => "skipped".into(),
                };
                w.write_record([
                    ex.k.to_string(),
                    ex.x.to_string(),
                    ex.y.to_string(),
                    ex.n.to_string(),
                    ex.window_divisors[0].to_string(),
                    ex.window_divisors[1].to_string(),
                    ex.window_divisors[2].to_string(),
                    chk,
                ])?;
            }
            w.flush()?;
        }
        Format::Human => {
            let mut s = String::new();
            for line in &lines {
                let ex = line.example;
                let _ = write!(
                    s,
                    "k={} X={} Y={} n={} window=[{}]",
                    ex.k,
                    ex.x,
                    ex.y,
                    ex.n,
                    join(&ex.window_divisors, ", ")
                );
                match &line.cross_check {
                    Some(CrossCheckOut::Done(chk)) => {
                        if chk.matches {
                            s.push_str(" census=ok");
                        } else {
                            let _ = write!(s, " census=extra[{}]", join(&chk.extra, ", "));
                        }
                    }
                    Some(CrossCheckOut::Skipped { .. }) => {
                        let _ = write!(s, " census=skipped");
                    }
                    None => {}
                }
                s.push('\n');
            }
            out.write_all(s.as_bytes())?;
        }
    }
    Ok(if mismatches == 0 { 0 } else { 1 })
}

#[derive(Serialize)]
struct BoundsOut<'a> {
    schema_version: u32,
    c: &'a Coeff,
    constant: f64,
    ln_turk_bound: f64,
    /// Absent for `c = 1`, where `ln c` vanishes.
    ln_theorem_threshold: Option<f64>,
}

fn bounds(format: Format, c: &Coeff, constant: f64, out: &mut dyn Write) -> Result<i32, CliError> {
    if !(constant > 0.0 && constant.is_finite()) {
        return Err(CliError::Config(format!("constant {constant} must be positive")));
    }
    let rep = BoundsOut {
        schema_version: SCHEMA_VERSION,
        c,
        constant,
        ln_turk_bound: turk_log_bound(c, constant),
        ln_theorem_threshold: theorem_log_threshold(c, constant).ok(),
    };
    match format {
        Format::Json | Format::Jsonl => write_json(format, &rep, out)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["c", "constant", "ln_turk_bound", "ln_theorem_threshold"])?;
            w.write_record([
                c.to_string(),
                constant.to_string(),
                rep.ln_turk_bound.to_string(),
                rep.ln_theorem_threshold.map(|t| t.to_string()).unwrap_or_default(),
            ])?;
            w.flush()?;
        }
        Format::Human => {
            let threshold = rep
                .ln_theorem_threshold
                .map(|t| format!("{t:.6}"))
                .unwrap_or_else(|| "undefined (c must exceed 1)".into());
            writeln!(out, "c = {c}  C = {constant}")?;
            writeln!(out, "ln threshold (C c^6 (ln c)^5)  = {threshold}")?;
            writeln!(out, "ln Turk bound                  = {:.6e}", rep.ln_turk_bound)?;
        }
    }
    Ok(0)
}
