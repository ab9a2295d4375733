//! Closed-form bounds on the giant-generation probability, evaluated in
//! exact rational arithmetic, and verdicts comparing them with exact or
//! estimated probabilities.
//!
//! Decimal constants are stored as exact fractions (8.8 = 44/5 and so on);
//! no floating point reaches a verdict on exact inputs.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::estimate::{Estimate, Interval};
use crate::exact::ExactStats;
use crate::group::orbits;
use crate::perm::{GroupKind, Permutation};
use crate::rational::{binomial, factorial, from_biguint, int, ratio, round_half_even, to_f64};

/// 8.8
pub fn c_thm1_lower() -> BigRational {
    ratio(44, 5)
}
/// 0.93
pub fn c_thm1_upper() -> BigRational {
    ratio(93, 100)
}
/// 7.5
pub fn c_thm1_refined() -> BigRational {
    ratio(15, 2)
}
/// 2.7
pub fn c_lemma22() -> BigRational {
    ratio(27, 10)
}
/// 4.8
pub fn c_ptrans() -> BigRational {
    ratio(24, 5)
}
/// 2.468
pub fn c_cor13() -> BigRational {
    ratio(617, 250)
}

/// Coefficients of `n^-1 .. n^-6` in the asymptotic series for `p(Sym(n))`.
pub const DIXON_COEFFICIENTS: [i64; 6] = [1, 1, 4, 23, 171, 1542];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BoundName {
    DixonSeries,
    MTLower,
    MTUpper,
    Thm1Lower,
    Thm1Upper,
    Thm1LowerRefined,
    Lemma22RHS,
    Lemma22Target,
    Lemma23Expression,
    Lemma23Simplified,
    Lemma23Target,
    PTransBound,
    HLower,
    HUpper,
    Cor13Lower,
    Cor13Upper,
}

impl BoundName {
    pub const ALL: [BoundName; 16] = [
        BoundName::DixonSeries,
        BoundName::MTLower,
        BoundName::MTUpper,
        BoundName::Thm1Lower,
        BoundName::Thm1Upper,
        BoundName::Thm1LowerRefined,
        BoundName::Lemma22RHS,
        BoundName::Lemma22Target,
        BoundName::Lemma23Expression,
        BoundName::Lemma23Simplified,
        BoundName::Lemma23Target,
        BoundName::PTransBound,
        BoundName::HLower,
        BoundName::HUpper,
        BoundName::Cor13Lower,
        BoundName::Cor13Upper,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundName::DixonSeries => "dixon-series",
            BoundName::MTLower => "mt-lower",
            BoundName::MTUpper => "mt-upper",
            BoundName::Thm1Lower => "thm1-lower",
            BoundName::Thm1Upper => "thm1-upper",
            BoundName::Thm1LowerRefined => "thm1-lower-refined",
            BoundName::Lemma22RHS => "lemma22-rhs",
            BoundName::Lemma22Target => "lemma22-target",
            BoundName::Lemma23Expression => "lemma23-expression",
            BoundName::Lemma23Simplified => "lemma23-simplified",
            BoundName::Lemma23Target => "lemma23-target",
            BoundName::PTransBound => "ptrans-bound",
            BoundName::HLower => "h-lower",
            BoundName::HUpper => "h-upper",
            BoundName::Cor13Lower => "cor13-lower",
            BoundName::Cor13Upper => "cor13-upper",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            BoundName::DixonSeries => "1 - 1/n - 1/n^2 - 4/n^3 - 23/n^4 - 171/n^5 - 1542/n^6",
            BoundName::MTLower => "1 - 1/n - 13/n^2",
            BoundName::MTUpper => "1 - 1/n + 2/(3n^2)",
            BoundName::Thm1Lower => "1 - 1/n - 8.8/n^2",
            BoundName::Thm1Upper => "1 - 1/n - 0.93/n^2",
            BoundName::Thm1LowerRefined => "1 - 1/n - 7.5/n^2",
            BoundName::Lemma22RHS => {
                "1/n + 3/(2n(n-1)) + 13/(3n(n-1)(n-2)) + 12(n-7)/(n(n-1)(n-2)(n-3))"
            }
            BoundName::Lemma22Target => "1/n + 2.7/n^2",
            BoundName::Lemma23Expression => "depth-2 inclusion-exclusion, five terms",
            BoundName::Lemma23Simplified => "1/n + (8n^2 - 52n + 75)/(8n(n-1)(n-2)(n-3))",
            BoundName::Lemma23Target => "1/n + 0.93/n^2",
            BoundName::PTransBound => "4.8/n^2",
            BoundName::HLower => "(1 - 1/n - 7.5/n^2) n!/4",
            BoundName::HUpper => "(1 - 1/n - 0.93/n^2) n!/4",
            BoundName::Cor13Lower => "1 - 2.468/n",
            BoundName::Cor13Upper => "1 - 1/n",
        }
    }

    /// Smallest `n` covered by the hypotheses the bound is stated under.
    pub fn valid_from(self) -> u64 {
        match self {
            BoundName::Thm1LowerRefined
            | BoundName::Lemma22Target
            | BoundName::Lemma23Target
            | BoundName::HLower
            | BoundName::HUpper => 14,
            BoundName::Lemma22RHS => 8,
            _ => 5,
        }
    }

    /// Smallest `n` at which the formula itself is defined.
    pub fn defined_from(self) -> u64 {
        match self {
            BoundName::Lemma22RHS => 8,
            BoundName::Lemma23Expression | BoundName::Lemma23Simplified => 5,
            _ => 1,
        }
    }
}

impl fmt::Display for BoundName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        BoundName::ALL
            .into_iter()
            .find(|b| b.as_str() == key)
            .ok_or_else(|| Error::Parse {
                input: s.to_string(),
                reason: format!(
                    "unknown bound; expected one of {}",
                    BoundName::ALL.map(|b| b.as_str()).join(", ")
                ),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BoundSpec {
    pub name: BoundName,
    pub n: u64,
}

impl BoundSpec {
    pub fn new(name: BoundName, n: u64) -> Self {
        BoundSpec { name, n }
    }

    pub fn in_range(&self) -> bool {
        self.n >= self.name.valid_from()
    }
}

fn range_error(name: BoundName, n: u64, from: u64) -> Error {
    Error::out_of_range(name.as_str(), n, format!("n >= {from}"))
}

/// Evaluates a bound, refusing `n` outside the range its statement covers.
pub fn eval_bound(spec: BoundSpec) -> Result<BigRational> {
    if !spec.in_range() {
        return Err(range_error(spec.name, spec.n, spec.name.valid_from()));
    }
    eval_formula(spec.name, spec.n)
}

/// Evaluates the formula wherever it is defined, ignoring the stated range.
pub fn eval_formula(name: BoundName, n: u64) -> Result<BigRational> {
    if n < name.defined_from() {
        return Err(range_error(name, n, name.defined_from()));
    }
    let inv = |k: u32| BigRational::new(BigInt::one(), BigInt::from(n).pow(k));
    let one_minus_inv = BigRational::one() - inv(1);
    Ok(match name {
        BoundName::DixonSeries => {
            let mut v = BigRational::one();
            for (k, &c) in DIXON_COEFFICIENTS.iter().enumerate() {
                v -= inv(k as u32 + 1) * int(c as u64);
            }
            v
        }
        BoundName::MTLower => one_minus_inv - int(13) * inv(2),
        BoundName::MTUpper => one_minus_inv + ratio(2, 3) * inv(2),
        BoundName::Thm1Lower => one_minus_inv - c_thm1_lower() * inv(2),
        BoundName::Thm1Upper => one_minus_inv - c_thm1_upper() * inv(2),
        BoundName::Thm1LowerRefined => one_minus_inv - c_thm1_refined() * inv(2),
        BoundName::Lemma22RHS => inv(1) + lemma22_tail(n)?,
        BoundName::Lemma22Target => inv(1) + c_lemma22() * inv(2),
        BoundName::Lemma23Expression => ie2_expression(n)?,
        BoundName::Lemma23Simplified => ie2_simplified(n)?,
        BoundName::Lemma23Target => inv(1) + c_thm1_upper() * inv(2),
        BoundName::PTransBound => c_ptrans() * inv(2),
        BoundName::HLower => {
            (one_minus_inv - c_thm1_refined() * inv(2)) * from_biguint(&factorial(n)) / int(4)
        }
        BoundName::HUpper => {
            (one_minus_inv - c_thm1_upper() * inv(2)) * from_biguint(&factorial(n)) / int(4)
        }
        BoundName::Cor13Lower => BigRational::one() - c_cor13() * inv(1),
        BoundName::Cor13Upper => one_minus_inv,
    })
}

fn frac(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// `3/(2n(n-1)) + 13/(3n(n-1)(n-2)) + 12(n-7)/(n(n-1)(n-2)(n-3))`: the
/// bound on intransitive pairs with an orbit of size 2, 3, or 4 to
/// `(n-1)/2`, beyond the fixed-point term `1/n`.
pub fn lemma22_tail(n: u64) -> Result<BigRational> {
    if n < 8 {
        return Err(Error::out_of_range("lemma22_tail", n, "n >= 8"));
    }
    let n = BigInt::from(n);
    let one = BigInt::one();
    let n1 = &n - &one;
    let n2 = &n - 2;
    let n3 = &n - 3;
    let two_orbit = frac(BigInt::from(3), 2 * &n * &n1);
    let three_orbit = frac(BigInt::from(13), 3 * &n * &n1 * &n2);
    let tail = frac(12 * (&n - 7), &n * &n1 * &n2 * &n3);
    Ok(two_orbit + three_orbit + tail)
}

/// Sum of `1/C(n,k)` over `4 <= k <= (n-1)/2`, and the majorant
/// `12(n-7)/(n(n-1)(n-2)(n-3))` obtained by replacing each term with
/// `1/C(n,4)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinomialTail {
    pub n: u64,
    pub terms: u64,
    pub sum: BigRational,
    pub majorant: BigRational,
}

impl BinomialTail {
    pub fn holds(&self) -> bool {
        self.sum <= self.majorant
    }
}

/// For `n <= 8` the sum is empty; `sum` is then 0 and `terms` is 0.
pub fn binomial_tail_bound(n: u64) -> BinomialTail {
    let top = n.saturating_sub(1) / 2;
    let mut sum = BigRational::zero();
    let mut terms = 0;
    for k in 4..=top {
        sum += BigRational::new(BigInt::one(), BigInt::from(binomial(n, k)));
        terms += 1;
    }
    let majorant = if n >= 4 {
        let nb = BigInt::from(n);
        frac(
            12 * (&nb - 7),
            &nb * (&nb - 1) * (&nb - 2) * (&nb - 3),
        )
    } else {
        BigRational::zero()
    };
    BinomialTail {
        n,
        terms,
        sum,
        majorant,
    }
}

/// Probability that two uniform elements of `Sym(k)` generate a transitive
/// subgroup, by enumerating all `(k!)^2` pairs.
pub fn transitive_constant(k: usize) -> Result<BigRational> {
    if !(1..=5).contains(&k) {
        return Err(Error::out_of_range("transitive_constant", k as u64, "1..=5"));
    }
    let elems = sym_elements(k);
    let mut transitive = 0u64;
    for x in &elems {
        for y in &elems {
            if orbits(k, &[x.clone(), y.clone()])?.is_transitive() {
                transitive += 1;
            }
        }
    }
    let total = (elems.len() * elems.len()) as u64;
    Ok(BigRational::new(BigInt::from(transitive), BigInt::from(total)))
}

fn sym_elements(k: usize) -> Vec<Permutation> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
        if prefix.len() == used.len() {
            out.push(Permutation::new(prefix.clone()).expect("bijection"));
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Depth-2 inclusion-exclusion lower bound on the probability that a random
/// pair fixes a point or has an orbit of size 2, evaluated term by term:
///
/// `1/n + (3/4)·2(n-2)!/n! - (n-2)!/(2·n!)
///  - (3/4)·n·C(n-1,2)·(2(n-3)!/n!)^2
///  - (3/4)^2·(C(n,2)·C(n-2,2)/2)·(4(n-4)!/n!)^2`
pub fn ie2_expression(n: u64) -> Result<BigRational> {
    if n < 5 {
        return Err(Error::out_of_range("ie2_expression", n, "n >= 5"));
    }
    let f = |m: u64| from_biguint(&factorial(m));
    let b = |a: u64, k: u64| from_biguint(&binomial(a, k));
    let nf = f(n);
    let three_quarters = ratio(3, 4);
    let fixed = BigRational::new(BigInt::one(), BigInt::from(n));
    let two_orbit = &three_quarters * int(2) * f(n - 2) / &nf;
    let both_fixed = f(n - 2) / (int(2) * &nf);
    let fixed_and_two = {
        let p = int(2) * f(n - 3) / &nf;
        &three_quarters * int(n) * b(n - 1, 2) * &p * &p
    };
    let two_two = {
        let p = int(4) * f(n - 4) / &nf;
        &three_quarters * &three_quarters * (b(n, 2) * b(n - 2, 2) / int(2)) * &p * &p
    };
    Ok(fixed + two_orbit - both_fixed - fixed_and_two - two_two)
}

/// `1/n + (8n^2 - 52n + 75)/(8n(n-1)(n-2)(n-3))`.
pub fn ie2_simplified(n: u64) -> Result<BigRational> {
    if n < 5 {
        return Err(Error::out_of_range("ie2_simplified", n, "n >= 5"));
    }
    let nb = BigInt::from(n);
    let num = 8 * &nb * &nb - 52 * &nb + 75;
    let den = 8 * &nb * (&nb - 1) * (&nb - 2) * (&nb - 3);
    Ok(BigRational::new(BigInt::one(), nb) + frac(num, den))
}

/// `(Thm1LowerRefined(n)·n!/4, Thm1Upper(n)·n!/4)`.
pub fn h_bounds(n: u64) -> Result<(BigRational, BigRational)> {
    Ok((
        eval_bound(BoundSpec::new(BoundName::HLower, n))?,
        eval_bound(BoundSpec::new(BoundName::HUpper, n))?,
    ))
}

/// A probability supplied to [`verify`], exact or estimated.
#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    Exact(BigRational),
    Estimated { point: f64, interval: Interval },
}

impl Evidence {
    pub fn describe(&self) -> String {
        match self {
            Evidence::Exact(r) => format!("{} ({})", r, round_half_even(r, 6)),
            Evidence::Estimated { point, interval } => {
                format!("~{point:.6} [{:.6}, {:.6}]", interval.lo, interval.hi)
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Evidence::Exact(_))
    }
}

/// Probabilities for one `(kind, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub kind: GroupKind,
    pub n: u64,
    pub p_giant: Evidence,
    pub p_intrans: Evidence,
    pub p_trans: Evidence,
}

impl From<&ExactStats> for Observation {
    fn from(s: &ExactStats) -> Self {
        Observation {
            kind: s.kind,
            n: s.n as u64,
            p_giant: Evidence::Exact(s.p_giant.clone()),
            p_intrans: Evidence::Exact(s.p_intrans.clone()),
            p_trans: Evidence::Exact(s.p_trans.clone()),
        }
    }
}

impl From<&Estimate> for Observation {
    fn from(e: &Estimate) -> Self {
        use crate::group::PairOutcome::*;
        let ev = |o| Evidence::Estimated {
            point: e.point(o),
            interval: e.interval(o),
        };
        Observation {
            kind: e.kind,
            n: e.n as u64,
            p_giant: ev(Giant),
            p_intrans: ev(Intransitive),
            p_trans: ev(TransitiveNonGiant),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    /// The non-strict lower bound is attained exactly.
    Equality,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Equality => "equality",
        })
    }
}

/// Named verification suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Lower and upper bound of the main theorem, equality exactly at n = 6.
    Thm1,
    /// `1 - 2.468/n < p(Alt(n)) < 1 - 1/n`.
    Cor13,
    /// `p_trans <= 4.8/n^2`.
    PTrans,
    /// `1 - p_giant = p_intrans + p_trans`.
    Decomposition,
    /// `lemma22_tail(n) < 2.7/n^2`.
    Lemma22,
    /// Expression = simplification, and it exceeds `1/n + 0.93/n^2`.
    Lemma23,
    /// Reciprocal-binomial sum is at most its majorant.
    BinomialTail,
    /// Transitivity constants 3/4 and 13/18.
    Constants,
    /// `h(Alt(n))` bounds ordered and positive.
    HBounds,
    /// Asymptotic series between the main lower bound and the older upper bound.
    Dixon,
}

impl Check {
    pub const ALL: [Check; 10] = [
        Check::Thm1,
        Check::Cor13,
        Check::PTrans,
        Check::Decomposition,
        Check::Lemma22,
        Check::Lemma23,
        Check::BinomialTail,
        Check::Constants,
        Check::HBounds,
        Check::Dixon,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Check::Thm1 => "thm1",
            Check::Cor13 => "cor13",
            Check::PTrans => "ptrans",
            Check::Decomposition => "decomposition",
            Check::Lemma22 => "lemma22",
            Check::Lemma23 => "lemma23",
            Check::BinomialTail => "binomial-tail",
            Check::Constants => "constants",
            Check::HBounds => "h-bounds",
            Check::Dixon => "dixon",
        }
    }

    /// Whether the check consumes probabilities (as opposed to sweeping `n`).
    pub fn needs_observations(self) -> bool {
        matches!(
            self,
            Check::Thm1 | Check::Cor13 | Check::PTrans | Check::Decomposition
        )
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Check::ALL
            .into_iter()
            .find(|c| c.as_str() == key)
            .ok_or_else(|| Error::Parse {
                input: s.to_string(),
                reason: format!(
                    "unknown check; expected all or one of {}",
                    Check::ALL.map(|c| c.as_str()).join(", ")
                ),
            })
    }
}

fn ser_rational<S: Serializer>(v: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_some(&r.to_string()),
        None => s.serialize_none(),
    }
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub check: Check,
    pub label: String,
    pub kind: Option<GroupKind>,
    pub n: u64,
    pub spec: Option<BoundSpec>,
    #[serde(serialize_with = "ser_rational")]
    pub value: Option<BigRational>,
    pub verdict: Option<Verdict>,
    /// Outside the range the statement covers; shown but not counted.
    pub informational: bool,
    pub witness: Option<String>,
    pub error: Option<String>,
}

impl BoundReport {
    fn new(check: Check, label: impl Into<String>, n: u64) -> Self {
        BoundReport {
            check,
            label: label.into(),
            kind: None,
            n,
            spec: None,
            value: None,
            verdict: None,
            informational: false,
            witness: None,
            error: None,
        }
    }

    fn errored(check: Check, label: impl Into<String>, n: u64, err: Error) -> Self {
        let mut r = BoundReport::new(check, label, n);
        r.error = Some(err.to_string());
        r
    }

    /// A failed verdict on an in-range item.
    pub fn is_failure(&self) -> bool {
        self.verdict == Some(Verdict::Fail) && !self.informational
    }
}

/// Relation a probability must satisfy against a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relation {
    /// `p > bound`
    Above,
    /// `p >= bound`
    AtLeast,
    /// `p < bound`
    Below,
    /// `p <= bound`
    AtMost,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Above => ">",
            Relation::AtLeast => ">=",
            Relation::Below => "<",
            Relation::AtMost => "<=",
        }
    }

    fn holds(self, ord: Ordering) -> bool {
        match self {
            Relation::Above => ord == Ordering::Greater,
            Relation::AtLeast => ord != Ordering::Less,
            Relation::Below => ord == Ordering::Less,
            Relation::AtMost => ord != Ordering::Greater,
        }
    }
}

/// Exact inputs compare exactly. Estimates pass only if the whole interval
/// satisfies the relation, fail only if the whole interval violates it.
fn compare(evidence: &Evidence, rel: Relation, bound: &BigRational) -> Verdict {
    match evidence {
        Evidence::Exact(p) => {
            if rel.holds(p.cmp(bound)) {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        }
        Evidence::Estimated { interval, .. } => {
            let b = to_f64(bound);
            let ok = |v: f64| rel.holds(v.partial_cmp(&b).unwrap_or(Ordering::Equal));
            match (ok(interval.lo), ok(interval.hi)) {
                (true, true) => Verdict::Pass,
                (false, false) => Verdict::Fail,
                _ => Verdict::Inconclusive,
            }
        }
    }
}

fn bound_report(
    check: Check,
    obs: &Observation,
    evidence: &Evidence,
    name: BoundName,
    rel: Relation,
) -> BoundReport {
    let spec = BoundSpec::new(name, obs.n);
    let label = format!("p {} {}", rel.symbol(), name.as_str());
    let mut r = match eval_bound(spec) {
        Ok(value) => {
            let mut r = BoundReport::new(check, label, obs.n);
            r.verdict = Some(compare(evidence, rel, &value));
            r.witness = Some(format!(
                "observed {} vs bound {}",
                evidence.describe(),
                round_half_even(&value, 6)
            ));
            r.value = Some(value);
            r
        }
        Err(e) => BoundReport::errored(check, label, obs.n, e),
    };
    r.kind = Some(obs.kind);
    r.spec = Some(spec);
    r
}

/// Exact number of the degree at which the main lower bound is attained.
pub const THM1_EQUALITY_DEGREE: u64 = 6;

fn thm1_lower_report(obs: &Observation) -> BoundReport {
    let mut r = bound_report(
        Check::Thm1,
        obs,
        &obs.p_giant,
        BoundName::Thm1Lower,
        Relation::AtLeast,
    );
    if let (Some(Verdict::Pass), Evidence::Exact(p), Some(bound)) =
        (r.verdict, &obs.p_giant, r.value.as_ref())
    {
        let equal = p == bound;
        r.verdict = Some(match (equal, obs.n == THM1_EQUALITY_DEGREE) {
            (true, true) => Verdict::Equality,
            (false, false) => Verdict::Pass,
            // Equality is claimed exactly at n = 6 and nowhere else.
            _ => Verdict::Fail,
        });
    } else if obs.n == THM1_EQUALITY_DEGREE && r.verdict == Some(Verdict::Pass) {
        // An interval cannot certify equality.
        r.verdict = Some(Verdict::Inconclusive);
    }
    r
}

fn observation_reports(check: Check, obs: &Observation) -> Vec<BoundReport> {
    match check {
        Check::Thm1 => vec![
            thm1_lower_report(obs),
            bound_report(check, obs, &obs.p_giant, BoundName::Thm1Upper, Relation::Below),
        ],
        Check::Cor13 => {
            if obs.kind != GroupKind::Alt {
                return Vec::new();
            }
            let mut lower =
                bound_report(check, obs, &obs.p_giant, BoundName::Cor13Lower, Relation::Above);
            if let (Evidence::Exact(p), Some(b)) = (&obs.p_giant, lower.value.as_ref()) {
                let slack = p - b;
                lower.witness = Some(format!(
                    "{}; slack {} ({})",
                    lower.witness.unwrap_or_default(),
                    slack,
                    round_half_even(&slack, 6)
                ));
            }
            vec![
                lower,
                bound_report(check, obs, &obs.p_giant, BoundName::Cor13Upper, Relation::Below),
            ]
        }
        Check::PTrans => {
            let mut r =
                bound_report(check, obs, &obs.p_trans, BoundName::PTransBound, Relation::AtMost);
            r.informational = obs.n < BoundName::Lemma22Target.valid_from();
            vec![r]
        }
        Check::Decomposition => {
            let mut r = BoundReport::new(check, "1 - p_giant = p_intrans + p_trans", obs.n);
            r.kind = Some(obs.kind);
            match (&obs.p_giant, &obs.p_intrans, &obs.p_trans) {
                (Evidence::Exact(g), Evidence::Exact(i), Evidence::Exact(t)) => {
                    let lhs = BigRational::one() - g;
                    let rhs = i + t;
                    r.verdict = Some(if lhs == rhs { Verdict::Pass } else { Verdict::Fail });
                    r.witness = Some(format!("{lhs} vs {rhs}"));
                    r.value = Some(lhs);
                }
                _ => {
                    r.informational = true;
                    r.witness = Some("estimated counts sum to the sample size by construction".into());
                }
            }
            vec![r]
        }
        _ => Vec::new(),
    }
}

fn sweep_reports(check: Check, n: u64) -> Vec<BoundReport> {
    let strict = |check: Check, label: &str, name: BoundName, lhs: Result<BigRational>, rel: Relation| {
        let spec = BoundSpec::new(name, n);
        let mut r = match (lhs, eval_bound(spec)) {
            (Ok(l), Ok(target)) => {
                let mut r = BoundReport::new(check, label, n);
                r.verdict = Some(if rel.holds(l.cmp(&target)) {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                });
                r.witness = Some(format!("slack {}", round_half_even(&(&target - &l).abs(), 9)));
                r.value = Some(l);
                r
            }
            (Err(e), _) | (_, Err(e)) => BoundReport::errored(check, label, n, e),
        };
        r.spec = Some(spec);
        r
    };
    match check {
        Check::Lemma22 => vec![strict(
            check,
            "lemma22_tail < 2.7/n^2",
            BoundName::Lemma22Target,
            lemma22_tail(n).map(|t| t + BigRational::new(BigInt::one(), BigInt::from(n))),
            Relation::Below,
        )],
        Check::Lemma23 => {
            let mut out = Vec::new();
            let mut ident = BoundReport::new(check, "expression = simplified", n);
            ident.spec = Some(BoundSpec::new(BoundName::Lemma23Expression, n));
            match (ie2_expression(n), ie2_simplified(n)) {
                (Ok(a), Ok(b)) => {
                    ident.verdict = Some(if a == b { Verdict::Pass } else { Verdict::Fail });
                    ident.witness = Some(format!("{a} vs {b}"));
                    ident.value = Some(a);
                }
                (Err(e), _) | (_, Err(e)) => ident.error = Some(e.to_string()),
            }
            out.push(ident);
            out.push(strict(
                check,
                "simplified > 1/n + 0.93/n^2",
                BoundName::Lemma23Target,
                ie2_simplified(n),
                Relation::Above,
            ));
            out
        }
        Check::BinomialTail => {
            let mut r = BoundReport::new(check, "sum 1/C(n,k) <= 12(n-7)/(n(n-1)(n-2)(n-3))", n);
            if n < 9 {
                r.error = Some(Error::out_of_range("binomial_tail_bound", n, "n >= 9").to_string());
            } else {
                let t = binomial_tail_bound(n);
                r.verdict = Some(if t.holds() { Verdict::Pass } else { Verdict::Fail });
                r.witness = Some(format!("{} terms, majorant {}", t.terms, t.majorant));
                r.value = Some(t.sum);
            }
            vec![r]
        }
        Check::HBounds => {
            let mut r = BoundReport::new(check, "0 < h_lower < h_upper", n);
            r.spec = Some(BoundSpec::new(BoundName::HLower, n));
            match h_bounds(n) {
                Ok((lo, hi)) => {
                    let ok = lo.is_positive() && lo < hi;
                    r.verdict = Some(if ok { Verdict::Pass } else { Verdict::Fail });
                    r.witness = Some(format!(
                        "n!/4 = {}, upper {}",
                        from_biguint(&factorial(n)) / int(4),
                        hi
                    ));
                    r.value = Some(lo);
                }
                Err(e) => r.error = Some(e.to_string()),
            }
            vec![r]
        }
        Check::Dixon => {
            let mut r = BoundReport::new(check, "thm1-lower < dixon-series < mt-upper", n);
            r.spec = Some(BoundSpec::new(BoundName::DixonSeries, n));
            if n < 14 {
                r.error = Some(Error::out_of_range("dixon consistency", n, "n >= 14").to_string());
            } else {
                let d = eval_formula(BoundName::DixonSeries, n).expect("defined");
                let lo = eval_formula(BoundName::Thm1Lower, n).expect("defined");
                let hi = eval_formula(BoundName::MTUpper, n).expect("defined");
                r.verdict = Some(if lo < d && d < hi { Verdict::Pass } else { Verdict::Fail });
                r.value = Some(d);
            }
            vec![r]
        }
        _ => Vec::new(),
    }
}

fn constant_reports() -> Vec<BoundReport> {
    [(2usize, ratio(3, 4)), (3, ratio(13, 18))]
        .into_iter()
        .map(|(k, expected)| {
            let label = format!("transitive_constant({k}) = {expected}");
            match transitive_constant(k) {
                Ok(v) => {
                    let mut r = BoundReport::new(Check::Constants, label, k as u64);
                    r.verdict = Some(if v == expected { Verdict::Pass } else { Verdict::Fail });
                    r.witness = Some(format!("enumerated {v}"));
                    r.value = Some(v);
                    r
                }
                Err(e) => BoundReport::errored(Check::Constants, label, k as u64, e),
            }
        })
        .collect()
}

/// Runs `check` over `ns` (for sweeps) or over the observations whose `n`
/// lies in `ns` (for probability checks). Out-of-range items come back as
/// per-item errors. The result is sorted by `(check, n, kind, label)`.
pub fn verify(check: Check, ns: std::ops::RangeInclusive<u64>, observations: &[Observation]) -> Vec<BoundReport> {
    let mut reports: Vec<BoundReport> = if check == Check::Constants {
        constant_reports()
    } else if check.needs_observations() {
        observations
            .iter()
            .filter(|o| ns.contains(&o.n))
            .flat_map(|o| observation_reports(check, o))
            .collect()
    } else {
        ns.into_par_iter().flat_map_iter(|n| sweep_reports(check, n)).collect()
    };
    reports.sort_by(|a, b| {
        (a.check, a.n, a.kind, &a.label).cmp(&(b.check, b.n, b.kind, &b.label))
    });
    reports
}

/// The `n` among exact Alt observations where `p - (1 - 2.468/n)` is
/// smallest, with that slack.
pub fn cor13_tightest(observations: &[Observation]) -> Option<(u64, BigRational)> {
    observations
        .iter()
        .filter(|o| o.kind == GroupKind::Alt && o.n >= 5)
        .filter_map(|o| match &o.p_giant {
            Evidence::Exact(p) => {
                let bound = eval_bound(BoundSpec::new(BoundName::Cor13Lower, o.n)).ok()?;
                Some((o.n, p - bound))
            }
            _ => None,
        })
        .min_by(|a, b| a.1.cmp(&b.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(name: BoundName, n: u64) -> BigRational {
        eval_bound(BoundSpec::new(name, n)).unwrap()
    }

    #[test]
    fn decimal_constants_are_exact() {
        assert_eq!(c_thm1_lower(), ratio(88, 10));
        assert_eq!(c_thm1_upper(), ratio(93, 100));
        assert_eq!(c_lemma22(), ratio(27, 10));
        assert_eq!(c_thm1_refined(), ratio(75, 10));
        assert_eq!(c_ptrans(), ratio(48, 10));
        assert_eq!(c_cor13(), ratio(2468, 1000));
    }

    #[test]
    fn bound_examples() {
        assert_eq!(b(BoundName::Thm1Lower, 6), ratio(53, 90));
        assert_eq!(b(BoundName::MTUpper, 10), ratio(68, 75));
        // 1 - 0.1 - 0.01 - 0.004 - 0.0023 - 0.00171 - 0.001542
        assert_eq!(b(BoundName::DixonSeries, 10), ratio(880_448, 1_000_000));
        assert_eq!(b(BoundName::Thm1Lower, 5), ratio(448, 1000));
        assert_eq!(b(BoundName::Thm1Upper, 5), ratio(7628, 10000));
        assert_eq!(b(BoundName::Cor13Lower, 5), ratio(5064, 10000));
    }

    #[test]
    fn range_errors_name_the_range() {
        let e = eval_bound(BoundSpec::new(BoundName::Thm1LowerRefined, 13)).unwrap_err();
        assert!(e.to_string().contains("n >= 14"), "{e}");
        assert!(eval_bound(BoundSpec::new(BoundName::Thm1Lower, 4)).is_err());
        assert!(eval_formula(BoundName::Thm1LowerRefined, 13).is_ok());
        assert!(eval_formula(BoundName::Lemma22RHS, 7).is_err());
        assert!("thm1_lower".parse::<BoundName>().is_ok());
        assert!("nope".parse::<BoundName>().is_err());
    }

    #[test]
    fn lemma22_tail_terms() {
        // n = 20, each printed term evaluated on its own.
        let expected = ratio(3, 760) + ratio(13, 20520) + ratio(156, 116_280);
        assert_eq!(lemma22_tail(20).unwrap(), expected);
        assert_eq!(expected, ratio(1033, 174_420));
        assert!(lemma22_tail(14).unwrap() < ratio(27, 1960));
        assert!(lemma22_tail(7).is_err());
    }

    #[test]
    fn binomial_tail_examples() {
        let t9 = binomial_tail_bound(9);
        assert_eq!(t9.terms, 1);
        assert_eq!(t9.sum, ratio(1, 126));
        assert_eq!(t9.majorant, ratio(24, 3024));
        assert!(t9.holds());
        let t14 = binomial_tail_bound(14);
        assert_eq!(t14.sum, ratio(1, 1001) + ratio(1, 2002) + ratio(1, 3003));
        assert_eq!(t14.majorant, ratio(12 * 7, 14 * 13 * 12 * 11));
        assert!(t14.holds());
        let t8 = binomial_tail_bound(8);
        assert_eq!(t8.terms, 0);
        assert!(t8.sum.is_zero());
    }

    #[test]
    fn transitive_constants() {
        assert_eq!(transitive_constant(1).unwrap(), BigRational::one());
        assert_eq!(transitive_constant(2).unwrap(), ratio(3, 4));
        assert_eq!(transitive_constant(3).unwrap(), ratio(13, 18));
        assert!(transitive_constant(0).is_err());
        assert!(transitive_constant(6).is_err());
    }

    #[test]
    fn ie2_examples() {
        let simplified = ratio(1, 14) + ratio(915, 192_192);
        assert_eq!(ie2_simplified(14).unwrap(), simplified);
        assert_eq!(ie2_expression(14).unwrap(), simplified);
        assert_eq!(ie2_expression(100).unwrap(), ie2_simplified(100).unwrap());
        assert!(ie2_simplified(14).unwrap() > ratio(1, 14) + ratio(93, 19_600));
        assert_eq!(ie2_expression(5).unwrap(), ratio(69, 320));
        assert!(ie2_expression(4).is_err());
        assert!(ie2_simplified(4).is_err());
    }

    #[test]
    fn h_bounds_at_14() {
        let quarter = from_biguint(&factorial(14)) / int(4);
        assert_eq!(quarter, int(21_794_572_800));
        let (lo, hi) = h_bounds(14).unwrap();
        assert_eq!(lo, (BigRational::one() - ratio(1, 14) - ratio(15, 2 * 196)) * &quarter);
        assert!(lo < hi);
        assert!(h_bounds(13).is_err());
        let (lo, hi) = h_bounds(20).unwrap();
        let q = from_biguint(&factorial(20)) / int(4);
        assert!(lo.is_positive() && hi < q && lo > &q * ratio(9, 10));
    }

    #[test]
    fn ordering_of_lower_bounds() {
        for n in 14..2000 {
            let lo = b(BoundName::Thm1Lower, n);
            let refined = b(BoundName::Thm1LowerRefined, n);
            let hi = b(BoundName::Thm1Upper, n);
            assert!(lo < refined && refined < hi, "n = {n}");
        }
    }

    #[test]
    fn thm1_verdicts_on_exact_inputs() {
        let obs = |n: u64, p: BigRational| Observation {
            kind: GroupKind::Alt,
            n,
            p_giant: Evidence::Exact(p),
            p_intrans: Evidence::Exact(BigRational::zero()),
            p_trans: Evidence::Exact(BigRational::zero()),
        };
        let r = verify(Check::Thm1, 5..=6, &[obs(6, ratio(53, 90)), obs(5, ratio(19, 30))]);
        assert_eq!(r.len(), 4);
        assert_eq!(r[0].n, 5);
        let lower6 = r.iter().find(|x| x.n == 6 && x.label.contains("thm1-lower")).unwrap();
        assert_eq!(lower6.verdict, Some(Verdict::Equality));
        assert!(r.iter().filter(|x| x.n == 5).all(|x| x.verdict == Some(Verdict::Pass)));
        // Equality away from n = 6 is a failure.
        let at7 = b(BoundName::Thm1Lower, 7);
        let r = verify(Check::Thm1, 7..=7, &[obs(7, at7)]);
        let lower7 = r.iter().find(|x| x.label.contains("thm1-lower")).unwrap();
        assert_eq!(lower7.verdict, Some(Verdict::Fail));
    }

    #[test]
    fn interval_logic() {
        let est = |lo: f64, hi: f64| Evidence::Estimated {
            point: (lo + hi) / 2.0,
            interval: Interval { lo, hi },
        };
        let bound = ratio(1, 2);
        assert_eq!(compare(&est(0.6, 0.7), Relation::Above, &bound), Verdict::Pass);
        assert_eq!(compare(&est(0.3, 0.4), Relation::Above, &bound), Verdict::Fail);
        assert_eq!(compare(&est(0.4, 0.6), Relation::Above, &bound), Verdict::Inconclusive);
        assert_eq!(compare(&est(0.3, 0.4), Relation::Below, &bound), Verdict::Pass);
    }

    #[test]
    fn out_of_range_items_are_per_item_errors() {
        let r = verify(Check::Lemma22, 12..=15, &[]);
        assert_eq!(r.len(), 4);
        assert!(r[0].error.is_some() && r[1].error.is_some());
        assert_eq!(r[2].verdict, Some(Verdict::Pass));
        assert!(!r.iter().any(BoundReport::is_failure));
    }
}
