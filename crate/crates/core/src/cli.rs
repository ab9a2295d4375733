//! Command-line front end for the `genprob` binary.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::json;

use crate::bounds::{self, BoundName, BoundReport, BoundSpec, Check, Observation, Verdict};
use crate::error::{Error, Result};
use crate::estimate::{self, Estimate, DEFAULT_LEVEL};
use crate::exact::{self, ExactConfig, ExactStats, DEFAULT_EXACT_MAX, SLOW_EXACT_MAX};
use crate::group::PairOutcome;
use crate::perm::GroupKind;
use crate::rational::round_half_even;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// More rows than this in a verification report are summarised.
const DETAIL_ROWS: usize = 200;

/// Inclusive range of degrees, written `a..b` or `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NRange {
    pub start: u64,
    pub end: u64,
}

impl NRange {
    pub fn single(n: u64) -> Self {
        NRange { start: n, end: n }
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<u64> {
        self.start..=self.end
    }

    fn clamp_from(&self, from: u64) -> Option<NRange> {
        let start = self.start.max(from);
        (start <= self.end).then_some(NRange { start, end: self.end })
    }
}

impl FromStr for NRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| err("expected an integer"));
        let range = match s.split_once("..") {
            Some((a, b)) => NRange {
                start: num(a)?,
                end: num(b.trim_start_matches('='))?,
            },
            None => NRange::single(num(s)?),
        };
        if range.start > range.end {
            return Err(err("empty range"));
        }
        Ok(range)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Group {
    Alt,
    Sym,
}

impl From<Group> for GroupKind {
    fn from(g: Group) -> Self {
        match g {
            Group::Alt => GroupKind::Alt,
            Group::Sym => GroupKind::Sym,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Md,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "genprob",
    version,
    about = "Probability that two random elements of Sym(n) or Alt(n) generate a group containing Alt(n)"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "md")]
    pub format: Format,

    /// Exact-result cache (newline-delimited JSON).
    #[arg(long, global = true, env = "GENPROB_CACHE")]
    pub cache: Option<PathBuf>,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "GENPROB_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct SamplingArgs {
    /// Monte Carlo samples for degrees beyond exact reach.
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Confidence level of the Wilson intervals.
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    pub level: f64,
    /// Permit exact computation at n = 10.
    #[arg(long)]
    pub allow_slow: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact outcome probabilities by conjugacy-class reduction.
    Exact {
        #[arg(long, value_enum)]
        group: Group,
        #[arg(long)]
        n: NRange,
        #[arg(long)]
        allow_slow: bool,
    },
    /// Seeded Monte Carlo estimate.
    Estimate {
        #[arg(long, value_enum)]
        group: Group,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_LEVEL)]
        level: f64,
    },
    /// Evaluate closed-form bounds exactly.
    Bounds {
        /// Bound name, or `all`.
        #[arg(long, default_value = "all")]
        name: String,
        #[arg(long)]
        n: NRange,
    },
    /// Run a verification suite; exit status 1 if any check fails.
    Verify {
        /// Check name, or `all`.
        #[arg(long, default_value = "all")]
        check: String,
        #[arg(long)]
        n: NRange,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// Probability table with the main bounds, three decimals.
    Table {
        #[arg(long)]
        n: NRange,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
}

/// Settings shared by every command.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub cache: Option<PathBuf>,
    pub threads: Option<usize>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub status: i32,
    pub text: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return RunOutput {
                status,
                text: e.to_string(),
            };
        }
    };
    let config = RunConfig {
        cache: cli.cache,
        threads: cli.threads,
        format: cli.format,
    };
    match run(&cli.command, &config) {
        Ok(out) => out,
        Err(e) => RunOutput {
            status: exit_code(&e),
            text: format!("error: {e}\n"),
        },
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::OutOfRange { .. } | Error::Parse { .. } | Error::InvalidArgument(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

pub fn run(command: &Command, config: &RunConfig) -> Result<RunOutput> {
    match command {
        Command::Exact { group, n, allow_slow } => {
            let stats = exact_range((*group).into(), *n, *allow_slow, config)?;
            ok(render_exact(&stats, config.format))
        }
        Command::Estimate {
            group,
            n,
            samples,
            seed,
            level,
        } => {
            let e = estimate::estimate_with_threads(
                (*group).into(),
                *n as usize,
                *samples,
                *seed,
                *level,
                config.threads,
            )?;
            ok(render_estimate(&e, config.format))
        }
        Command::Bounds { name, n } => {
            let names: Vec<BoundName> = if name.eq_ignore_ascii_case("all") {
                BoundName::ALL.to_vec()
            } else {
                vec![name.parse()?]
            };
            ok(render_bounds(&names, *n, config.format)?)
        }
        Command::Verify { check, n, sampling } => verify(check, *n, sampling, config),
        Command::Table { n, sampling } => ok(table(*n, sampling, config)?),
    }
}

fn ok(text: String) -> Result<RunOutput> {
    Ok(RunOutput {
        status: EXIT_OK,
        text,
    })
}

fn exact_config(allow_slow: bool, config: &RunConfig) -> ExactConfig {
    let mut c = ExactConfig::default();
    if allow_slow {
        c = c.allow_slow();
    }
    c.threads = config.threads;
    c
}

fn exact_max(allow_slow: bool) -> u64 {
    if allow_slow {
        SLOW_EXACT_MAX as u64
    } else {
        DEFAULT_EXACT_MAX as u64
    }
}

/// Cached exact stats: cache first, compute and store on a miss.
pub fn exact_cached(kind: GroupKind, n: usize, allow_slow: bool, config: &RunConfig) -> Result<ExactStats> {
    let cfg = exact_config(allow_slow, config);
    if n < 2 || n > cfg.max_n {
        return Err(Error::out_of_range(
            format!("exact ({kind})"),
            n as u64,
            format!("2..={}", cfg.max_n),
        ));
    }
    if let Some(path) = &config.cache {
        if let Some(hit) = exact::cache_load(kind, n, path)? {
            return Ok(hit);
        }
    }
    let stats = exact::exact_stats(kind, n, &cfg)?;
    if let Some(path) = &config.cache {
        exact::cache_store(&stats, path)?;
    }
    Ok(stats)
}

fn exact_range(kind: GroupKind, n: NRange, allow_slow: bool, config: &RunConfig) -> Result<Vec<ExactStats>> {
    n.iter()
        .map(|n| exact_cached(kind, n as usize, allow_slow, config))
        .collect()
}

fn dec(r: &BigRational) -> String {
    round_half_even(r, 3)
}

fn render_exact(stats: &[ExactStats], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Md => {
            out.push_str("| group | n | p_giant | p_intrans | p_trans | p_giant (3 dp) |\n");
            out.push_str("|---|---|---|---|---|---|\n");
            for s in stats {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} |",
                    s.kind,
                    s.n,
                    s.p_giant,
                    s.p_intrans,
                    s.p_trans,
                    dec(&s.p_giant)
                );
            }
        }
        Format::Csv => {
            out.push_str("kind,n,method,p_giant,p_intrans,p_trans,p_giant_3dp\n");
            for s in stats {
                let _ = writeln!(
                    out,
                    "{},{},{:?},{},{},{},{}",
                    s.kind,
                    s.n,
                    s.method,
                    s.p_giant,
                    s.p_intrans,
                    s.p_trans,
                    dec(&s.p_giant)
                );
            }
        }
        Format::Json => {
            let rows: Vec<_> = stats
                .iter()
                .map(|s| {
                    json!({
                        "kind": s.kind,
                        "n": s.n,
                        "method": s.method,
                        "p_giant": s.p_giant.to_string(),
                        "p_intrans": s.p_intrans.to_string(),
                        "p_trans": s.p_trans.to_string(),
                        "p_giant_3dp": dec(&s.p_giant),
                    })
                })
                .collect();
            out = serde_json::to_string_pretty(&rows).expect("json");
            out.push('\n');
        }
    }
    out
}

fn render_estimate(e: &Estimate, format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", e.to_json()),
        Format::Csv => format!("{}\n{}\n", Estimate::CSV_HEADER, e.to_csv_row()),
        Format::Md => {
            let mut out = format!(
                "{}({}), {} samples, seed {}, chunk {}, {}% Wilson intervals\n\n",
                e.kind,
                e.n,
                e.samples,
                e.seed,
                e.chunk_size,
                e.level * 100.0
            );
            out.push_str("| outcome | count | estimate | interval |\n|---|---|---|---|\n");
            for o in PairOutcome::ALL {
                let ci = e.interval(o);
                let _ = writeln!(
                    out,
                    "| {} | {} | {:.6} | [{:.6}, {:.6}] |",
                    o,
                    e.counts.get(o),
                    e.point(o),
                    ci.lo,
                    ci.hi
                );
            }
            out
        }
    }
}

fn render_bounds(names: &[BoundName], ns: NRange, format: Format) -> Result<String> {
    let mut rows = Vec::new();
    for &name in names {
        for n in ns.iter() {
            let in_range = BoundSpec::new(name, n).in_range();
            match bounds::eval_formula(name, n) {
                Ok(v) => rows.push((name, n, Some(v), in_range)),
                Err(_) if names.len() > 1 => {}
                Err(e) => return Err(e),
            }
        }
    }
    let mut out = String::new();
    match format {
        Format::Md => {
            out.push_str("| bound | n | value | decimal | note |\n|---|---|---|---|---|\n");
            for (name, n, v, in_range) in &rows {
                let v = v.as_ref().expect("value");
                let note = if *in_range {
                    String::new()
                } else {
                    format!("outside stated range n >= {}", name.valid_from())
                };
                let _ = writeln!(out, "| {name} | {n} | {v} | {} | {note} |", round_half_even(v, 6));
            }
        }
        Format::Csv => {
            out.push_str("bound,n,value,decimal,in_range\n");
            for (name, n, v, in_range) in &rows {
                let v = v.as_ref().expect("value");
                let _ = writeln!(out, "{name},{n},{v},{},{in_range}", round_half_even(v, 6));
            }
        }
        Format::Json => {
            let arr: Vec<_> = rows
                .iter()
                .map(|(name, n, v, in_range)| {
                    let v = v.as_ref().expect("value");
                    json!({
                        "bound": name.as_str(),
                        "n": n,
                        "formula": name.formula(),
                        "value": v.to_string(),
                        "decimal": round_half_even(v, 6),
                        "in_range": in_range,
                    })
                })
                .collect();
            out = serde_json::to_string_pretty(&arr).expect("json");
            out.push('\n');
        }
    }
    Ok(out)
}

/// Exact observation where feasible, Monte Carlo otherwise.
fn observe(kind: GroupKind, n: u64, sampling: &SamplingArgs, config: &RunConfig) -> Result<Observation> {
    if n <= exact_max(sampling.allow_slow) {
        let s = exact_cached(kind, n as usize, sampling.allow_slow, config)?;
        Ok(Observation::from(&s))
    } else {
        let e = estimate::estimate_with_threads(
            kind,
            n as usize,
            sampling.samples,
            sampling.seed,
            sampling.level,
            config.threads,
        )?;
        Ok(Observation::from(&e))
    }
}

fn verify(check: &str, ns: NRange, sampling: &SamplingArgs, config: &RunConfig) -> Result<RunOutput> {
    let all = check.eq_ignore_ascii_case("all");
    let checks: Vec<Check> = if all {
        Check::ALL.to_vec()
    } else {
        vec![check.parse()?]
    };
    let mut observations = Vec::new();
    if checks.iter().any(|c| c.needs_observations()) {
        let from = ns.start.max(2);
        for n in from..=ns.end {
            for kind in GroupKind::ALL {
                observations.push(observe(kind, n, sampling, config)?);
            }
        }
    }
    let mut reports: Vec<BoundReport> = Vec::new();
    for &c in &checks {
        let range = if all && !c.needs_observations() {
            // Under `all`, sweeps only visit the degrees they are stated for.
            let from = match c {
                Check::BinomialTail => 9,
                Check::Lemma22 | Check::Lemma23 | Check::HBounds | Check::Dixon => 14,
                _ => ns.start,
            };
            match ns.clamp_from(from) {
                Some(r) => r,
                None if c == Check::Constants => ns,
                None => continue,
            }
        } else {
            ns
        };
        reports.extend(bounds::verify(c, range.iter(), &observations));
    }
    let failed = reports.iter().any(BoundReport::is_failure);
    let mut text = render_reports(&reports, config.format);
    if config.format == Format::Md {
        if let Some((n, slack)) = bounds::cor13_tightest(&observations) {
            let _ = writeln!(
                text,
                "\ntightest exact case of 1 - 2.468/n < p(alt): n = {n}, slack {} ({})",
                slack,
                round_half_even(&slack, 6)
            );
        }
    }
    Ok(RunOutput {
        status: if failed { EXIT_CHECK_FAILED } else { EXIT_OK },
        text,
    })
}

fn verdict_str(r: &BoundReport) -> String {
    match (&r.verdict, &r.error) {
        (_, Some(e)) => format!("error: {e}"),
        (Some(v), None) if r.informational => format!("{v} (informational)"),
        (Some(v), None) => v.to_string(),
        (None, None) if r.informational => "informational".into(),
        (None, None) => "-".into(),
    }
}

pub fn render_reports(reports: &[BoundReport], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Json => {
            out = serde_json::to_string_pretty(reports).expect("json");
            out.push('\n');
        }
        Format::Csv => {
            out.push_str("check,kind,n,label,verdict,value,witness\n");
            for r in reports {
                let _ = writeln!(
                    out,
                    "{},{},{},\"{}\",{},{},\"{}\"",
                    r.check,
                    r.kind.map(|k| k.to_string()).unwrap_or_default(),
                    r.n,
                    r.label,
                    verdict_str(r),
                    r.value.as_ref().map(|v| v.to_string()).unwrap_or_default(),
                    r.witness.clone().unwrap_or_default()
                );
            }
        }
        Format::Md => {
            let detailed = reports.len() <= DETAIL_ROWS;
            let mut checks: Vec<Check> = reports.iter().map(|r| r.check).collect();
            checks.dedup();
            out.push_str("| check | items | pass | equality | inconclusive | fail | errors |\n");
            out.push_str("|---|---|---|---|---|---|---|\n");
            for c in &checks {
                let rs: Vec<&BoundReport> = reports.iter().filter(|r| r.check == *c).collect();
                let count = |v: Verdict| rs.iter().filter(|r| r.verdict == Some(v) && r.error.is_none()).count();
                let errors = rs.iter().filter(|r| r.error.is_some()).count();
                let _ = writeln!(
                    out,
                    "| {c} | {} | {} | {} | {} | {} | {errors} |",
                    rs.len(),
                    count(Verdict::Pass),
                    count(Verdict::Equality),
                    count(Verdict::Inconclusive),
                    count(Verdict::Fail)
                );
            }
            let rows: Vec<&BoundReport> = reports
                .iter()
                .filter(|r| detailed || r.verdict != Some(Verdict::Pass))
                .collect();
            if !rows.is_empty() {
                out.push_str("\n| check | group | n | item | verdict | witness |\n|---|---|---|---|---|---|\n");
                for r in rows {
                    let _ = writeln!(
                        out,
                        "| {} | {} | {} | {} | {} | {} |",
                        r.check,
                        r.kind.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
                        r.n,
                        r.label,
                        verdict_str(r),
                        r.witness.clone().unwrap_or_default()
                    );
                }
            }
        }
    }
    out
}

/// One column of the probability table.
struct TableColumn {
    n: u64,
    alt: (BigRational, bool),
    sym: (BigRational, bool),
    lower: BigRational,
    upper: BigRational,
}

fn table_value(kind: GroupKind, n: u64, sampling: &SamplingArgs, config: &RunConfig) -> Result<(BigRational, bool)> {
    if n <= exact_max(sampling.allow_slow) {
        Ok((exact_cached(kind, n as usize, sampling.allow_slow, config)?.p_giant, true))
    } else {
        let e = estimate::estimate_with_threads(
            kind,
            n as usize,
            sampling.samples,
            sampling.seed,
            sampling.level,
            config.threads,
        )?;
        let p = BigRational::new(BigInt::from(e.counts.giant), BigInt::from(e.samples));
        Ok((p, false))
    }
}

fn table(ns: NRange, sampling: &SamplingArgs, config: &RunConfig) -> Result<String> {
    let from = BoundName::Thm1Lower.valid_from();
    if ns.start < from {
        return Err(Error::out_of_range("table", ns.start, format!("n >= {from}")));
    }
    let mut cols = Vec::new();
    for n in ns.iter() {
        cols.push(TableColumn {
            n,
            alt: table_value(GroupKind::Alt, n, sampling, config)?,
            sym: table_value(GroupKind::Sym, n, sampling, config)?,
            lower: bounds::eval_bound(BoundSpec::new(BoundName::Thm1Lower, n))?,
            upper: bounds::eval_bound(BoundSpec::new(BoundName::Thm1Upper, n))?,
        });
    }
    let cell = |(v, exact): &(BigRational, bool)| {
        if *exact {
            dec(v)
        } else {
            format!("~{}", dec(v))
        }
    };
    let mut out = String::new();
    match config.format {
        Format::Md => {
            let header: Vec<String> = cols.iter().map(|c| c.n.to_string()).collect();
            let _ = writeln!(out, "| n | {} |", header.join(" | "));
            let _ = writeln!(out, "|---|{}", "---|".repeat(cols.len()));
            let mut row = |label: &str, f: &dyn Fn(&TableColumn) -> String| {
                let cells: Vec<String> = cols.iter().map(f).collect();
                let _ = writeln!(out, "| {label} | {} |", cells.join(" | "));
            };
            row("p(Alt(n))", &|c| cell(&c.alt));
            row("p(Sym(n))", &|c| cell(&c.sym));
            row("thm1 lower", &|c| dec(&c.lower));
            row("thm1 upper", &|c| dec(&c.upper));
            if cols.iter().any(|c| !c.alt.1 || !c.sym.1) {
                let _ = writeln!(
                    out,
                    "\n~ Monte Carlo estimate: {} samples, seed {}",
                    sampling.samples, sampling.seed
                );
            }
        }
        Format::Csv => {
            out.push_str("n,p_alt,p_sym,thm1_lower,thm1_upper,alt_exact,sym_exact\n");
            for c in &cols {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    c.n,
                    dec(&c.alt.0),
                    dec(&c.sym.0),
                    dec(&c.lower),
                    dec(&c.upper),
                    c.alt.1,
                    c.sym.1
                );
            }
        }
        Format::Json => {
            let arr: Vec<_> = cols
                .iter()
                .map(|c| {
                    json!({
                        "n": c.n,
                        "p_alt": dec(&c.alt.0),
                        "p_sym": dec(&c.sym.0),
                        "p_alt_exact": c.alt.0.to_string(),
                        "p_sym_exact": c.sym.0.to_string(),
                        "alt_exact": c.alt.1,
                        "sym_exact": c.sym.1,
                        "thm1_lower": dec(&c.lower),
                        "thm1_upper": dec(&c.upper),
                    })
                })
                .collect();
            out = serde_json::to_string_pretty(&arr).expect("json");
            out.push('\n');
        }
    }
    Ok(out)
}
