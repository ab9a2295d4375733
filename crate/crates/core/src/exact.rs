//! Exact outcome probabilities for `Sym(n)` and `Alt(n)`.
//!
//! The number of `y` with `<x, y>` giant (or intransitive, or transitive
//! non-giant) depends only on the cycle type of `x`: conjugating both
//! generators by any `g` in `Sym(n)` preserves the outcome and permutes `X`
//! onto itself. So it is enough to enumerate `y` against one representative
//! per cycle type and weight the counts by class size. For `Alt(n)` the
//! weights are the `Sym(n)` class sizes of the even cycle types; the split of
//! some of those classes in `Alt(n)` does not matter because the count is a
//! `Sym(n)` class function.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::Classifier;
use crate::perm::{CycleType, GroupKind, Permutation};
use crate::rational::factorial;

/// Default largest `n` for [`exact_stats`].
pub const DEFAULT_EXACT_MAX: usize = 9;
/// Ceiling once slow runs are explicitly allowed.
pub const SLOW_EXACT_MAX: usize = 10;
/// Largest `n` for [`brute_force_stats`].
pub const BRUTE_FORCE_MAX: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClassReduced,
    BruteForce,
}

impl Method {
    fn as_str(self) -> &'static str {
        match self {
            Method::ClassReduced => "class_reduced",
            Method::BruteForce => "brute_force",
        }
    }
}

/// Exact probabilities of the three pair outcomes for one group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactStats {
    pub kind: GroupKind,
    pub n: usize,
    pub p_giant: BigRational,
    pub p_intrans: BigRational,
    pub p_trans: BigRational,
    pub method: Method,
}

impl ExactStats {
    fn from_counts(kind: GroupKind, n: usize, counts: [BigUint; 3], method: Method) -> Self {
        let order = group_size(kind, n);
        let total = BigInt::from(&order * &order);
        let p = |c: &BigUint| BigRational::new(BigInt::from(c.clone()), total.clone());
        ExactStats {
            kind,
            n,
            p_giant: p(&counts[0]),
            p_intrans: p(&counts[1]),
            p_trans: p(&counts[2]),
            method,
        }
    }

    /// `p_giant + p_intrans + p_trans == 1`, each in `[0, 1]`, and every
    /// denominator divides `|X|²`.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let probs = [&self.p_giant, &self.p_intrans, &self.p_trans];
        let sum: BigRational = probs.iter().copied().sum();
        if !sum.is_one() {
            return Err(format!("probabilities sum to {sum}, not 1"));
        }
        let order = group_size(self.kind, self.n);
        let total = BigInt::from(&order * &order);
        for p in probs {
            if *p < BigRational::zero() || *p > BigRational::one() {
                return Err(format!("probability {p} outside [0, 1]"));
            }
            if !(&total % p.denom()).is_zero() {
                return Err(format!("denominator of {p} does not divide |X|^2 = {total}"));
            }
        }
        Ok(())
    }
}

/// `|Sym(n)|` or `|Alt(n)|`.
pub fn group_size(kind: GroupKind, n: usize) -> BigUint {
    let f = factorial(n as u64);
    match kind {
        GroupKind::Sym => f,
        GroupKind::Alt if n >= 2 => f / 2u32,
        GroupKind::Alt => f,
    }
}

/// One conjugacy class of `Sym(n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDatum {
    pub ctype: CycleType,
    pub size: BigUint,
    pub representative: Permutation,
    pub even: bool,
}

/// Integer partitions of `n`, parts descending, in reverse lexicographic
/// order (`[n]` first).
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=max_part.min(remaining)).rev() {
            prefix.push(part);
            rec(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Class size `n! / prod_k (k^{m_k} m_k!)`.
pub fn class_size(ctype: &CycleType) -> BigUint {
    let mut denom = BigUint::one();
    for (len, mult) in ctype.multiplicities() {
        denom *= BigUint::from(len).pow(mult as u32) * factorial(mult as u64);
    }
    factorial(ctype.degree() as u64) / denom
}

pub fn enumerate_classes(n: usize) -> Result<Vec<ClassDatum>> {
    if n == 0 {
        return Err(Error::ZeroDegree);
    }
    Ok(partitions(n)
        .into_iter()
        .map(|parts| {
            let ctype = CycleType::new(parts);
            ClassDatum {
                size: class_size(&ctype),
                representative: ctype.representative(),
                even: ctype.is_even(),
                ctype,
            }
        })
        .collect())
}

/// Limits and parallelism for [`exact_stats`].
#[derive(Debug, Clone)]
pub struct ExactConfig {
    pub max_n: usize,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            max_n: DEFAULT_EXACT_MAX,
            threads: None,
        }
    }
}

impl ExactConfig {
    pub fn allow_slow(mut self) -> Self {
        self.max_n = self.max_n.max(SLOW_EXACT_MAX);
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }
}

pub(crate) fn run_with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Exact probabilities by conjugacy-class reduction over the first
/// generator.
pub fn exact_stats(kind: GroupKind, n: usize, config: &ExactConfig) -> Result<ExactStats> {
    if n < 2 || n > config.max_n {
        return Err(Error::out_of_range(
            format!("exact_stats({kind})"),
            n as u64,
            format!("2..={}", config.max_n),
        ));
    }
    let classes: Vec<ClassDatum> = enumerate_classes(n)?
        .into_iter()
        .filter(|c| kind == GroupKind::Sym || c.even)
        .collect();
    // Work items: (class, first image of y). Counts are integers, so the
    // reduction is order-insensitive and the result does not depend on the
    // number of workers.
    let items: Vec<(usize, usize)> = (0..classes.len())
        .flat_map(|c| (0..n).map(move |first| (c, first)))
        .collect();
    let reps: Vec<Vec<u8>> = classes
        .iter()
        .map(|c| c.representative.images().iter().map(|&i| i as u8).collect())
        .collect();
    let partial: Vec<[u64; 3]> = run_with_threads(config.threads, || {
        items
            .par_iter()
            .map(|&(c, first)| count_with_first_image(&reps[c], first, kind))
            .collect()
    });
    let mut totals = [BigUint::zero(), BigUint::zero(), BigUint::zero()];
    for (&(c, _), counts) in items.iter().zip(&partial) {
        for (t, &k) in totals.iter_mut().zip(counts) {
            *t += &classes[c].size * k;
        }
    }
    Ok(ExactStats::from_counts(kind, n, totals, Method::ClassReduced))
}

/// Tallies outcomes of `<x, y>` over all `y` in the group with `y(0) = first`.
fn count_with_first_image(x: &[u8], first: usize, kind: GroupKind) -> [u64; 3] {
    let n = x.len();
    let mut classifier = Classifier::new(n);
    let mut y: Vec<u8> = Vec::with_capacity(n);
    y.push(first as u8);
    y.extend((0..n as u8).filter(|&p| p as usize != first));
    let mut counts = [0u64; 3];
    loop {
        if kind == GroupKind::Sym || is_even(&y) {
            counts[classifier.classify(x, &y).index()] += 1;
        }
        if !next_permutation(&mut y[1..]) {
            break;
        }
    }
    counts
}

fn is_even(p: &[u8]) -> bool {
    let n = p.len();
    let mut seen = [false; crate::group::ENGINE_MAX_DEGREE];
    let mut cycles = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut q = start;
        while !seen[q] {
            seen[q] = true;
            q = p[q] as usize;
        }
    }
    (n - cycles).is_multiple_of(2)
}

/// Advances to the next permutation in lexicographic order; false after the
/// last one.
fn next_permutation(a: &mut [u8]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

fn all_elements(kind: GroupKind, n: usize) -> Vec<Vec<u8>> {
    let mut p: Vec<u8> = (0..n as u8).collect();
    let mut out = Vec::new();
    loop {
        if kind == GroupKind::Sym || is_even(&p) {
            out.push(p.clone());
        }
        if !next_permutation(&mut p) {
            break;
        }
    }
    out
}

/// Classifies every pair in `X × X`. Independent of the class reduction;
/// used as its oracle.
pub fn brute_force_stats(kind: GroupKind, n: usize) -> Result<ExactStats> {
    if !(2..=BRUTE_FORCE_MAX).contains(&n) {
        return Err(Error::out_of_range(
            format!("brute_force_stats({kind})"),
            n as u64,
            format!("2..={BRUTE_FORCE_MAX}"),
        ));
    }
    let elems = all_elements(kind, n);
    let counts: [u64; 3] = elems
        .par_iter()
        .map(|x| {
            let mut classifier = Classifier::new(n);
            let mut c = [0u64; 3];
            for y in &elems {
                c[classifier.classify(x, y).index()] += 1;
            }
            c
        })
        .reduce(|| [0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    Ok(ExactStats::from_counts(
        kind,
        n,
        counts.map(BigUint::from),
        Method::BruteForce,
    ))
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheRecord {
    kind: GroupKind,
    n: usize,
    method: Method,
    p_giant_num: String,
    p_giant_den: String,
    p_intrans_num: String,
    p_intrans_den: String,
    p_trans_num: String,
    p_trans_den: String,
    timestamp: u64,
}

impl CacheRecord {
    fn from_stats(s: &ExactStats) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        CacheRecord {
            kind: s.kind,
            n: s.n,
            method: s.method,
            p_giant_num: s.p_giant.numer().to_string(),
            p_giant_den: s.p_giant.denom().to_string(),
            p_intrans_num: s.p_intrans.numer().to_string(),
            p_intrans_den: s.p_intrans.denom().to_string(),
            p_trans_num: s.p_trans.numer().to_string(),
            p_trans_den: s.p_trans.denom().to_string(),
            timestamp,
        }
    }

    fn into_stats(self) -> std::result::Result<ExactStats, String> {
        fn parse(num: &str, den: &str) -> std::result::Result<BigRational, String> {
            let n: BigInt = num.parse().map_err(|_| format!("bad numerator {num:?}"))?;
            let d: BigInt = den.parse().map_err(|_| format!("bad denominator {den:?}"))?;
            if d.is_zero() {
                return Err("zero denominator".into());
            }
            Ok(BigRational::new(n, d))
        }
        if self.n < 2 {
            return Err(format!("n = {} below 2", self.n));
        }
        let stats = ExactStats {
            kind: self.kind,
            n: self.n,
            p_giant: parse(&self.p_giant_num, &self.p_giant_den)?,
            p_intrans: parse(&self.p_intrans_num, &self.p_intrans_den)?,
            p_trans: parse(&self.p_trans_num, &self.p_trans_den)?,
            method: self.method,
        };
        stats.validate()?;
        Ok(stats)
    }
}

/// Appends one JSON line for `stats` to the cache at `path`.
pub fn cache_store(stats: &ExactStats, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let line = serde_json::to_string(&CacheRecord::from_stats(stats))
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(f, "{line}")?;
    Ok(())
}

/// Latest record for `(kind, n)`, if any. A missing file is an empty cache.
/// Every line is parsed and validated, so corruption anywhere is reported.
pub fn cache_load(kind: GroupKind, n: usize, path: &Path) -> Result<Option<ExactStats>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let cache_err = |line: usize, reason: String| Error::Cache {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut found = None;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CacheRecord =
            serde_json::from_str(&line).map_err(|e| cache_err(idx + 1, e.to_string()))?;
        let stats = record.into_stats().map_err(|r| cache_err(idx + 1, r))?;
        if stats.kind == kind && stats.n == n {
            found = Some(stats);
        }
    }
    Ok(found)
}

impl std::fmt::Display for ExactStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}({}) [{}]: giant {}, intransitive {}, transitive non-giant {}",
            self.kind,
            self.n,
            self.method.as_str(),
            self.p_giant,
            self.p_intrans,
            self.p_trans
        )
    }
}
