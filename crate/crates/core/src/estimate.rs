//! Seeded Monte Carlo estimates of the outcome probabilities.
//!
//! Samples are split into fixed chunks of [`CHUNK_SIZE`]. Chunk `i` draws
//! from ChaCha8 seeded with the master seed (via `seed_from_u64`) on stream
//! `i`, so every chunk has its own reproducible substream and the tallies
//! do not depend on how chunks are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::exact::run_with_threads;
use crate::group::{Classifier, PairOutcome, ENGINE_MAX_DEGREE};
use crate::perm::{random_permutation, GroupKind};

pub const CHUNK_SIZE: u64 = 65_536;

pub const DEFAULT_LEVEL: f64 = 0.99;

/// Two-sided standard normal quantile for 99% confidence.
pub const Z_99: f64 = 2.575_829_303_548_901;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub giant: u64,
    pub intransitive: u64,
    pub transitive_non_giant: u64,
}

impl OutcomeCounts {
    pub fn total(&self) -> u64 {
        self.giant + self.intransitive + self.transitive_non_giant
    }

    pub fn get(&self, outcome: PairOutcome) -> u64 {
        match outcome {
            PairOutcome::Giant => self.giant,
            PairOutcome::Intransitive => self.intransitive,
            PairOutcome::TransitiveNonGiant => self.transitive_non_giant,
        }
    }

    fn bump(&mut self, outcome: PairOutcome) {
        match outcome {
            PairOutcome::Giant => self.giant += 1,
            PairOutcome::Intransitive => self.intransitive += 1,
            PairOutcome::TransitiveNonGiant => self.transitive_non_giant += 1,
        }
    }

    fn merge(self, other: OutcomeCounts) -> OutcomeCounts {
        OutcomeCounts {
            giant: self.giant + other.giant,
            intransitive: self.intransitive + other.intransitive,
            transitive_non_giant: self.transitive_non_giant + other.transitive_non_giant,
        }
    }
}

/// Tallies of `samples` random pairs with a Wilson interval per outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub kind: GroupKind,
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub chunk_size: u64,
    pub level: f64,
    pub counts: OutcomeCounts,
    pub giant_ci: Interval,
    pub intrans_ci: Interval,
    pub trans_ci: Interval,
}

impl Estimate {
    pub fn point(&self, outcome: PairOutcome) -> f64 {
        self.counts.get(outcome) as f64 / self.samples as f64
    }

    pub fn interval(&self, outcome: PairOutcome) -> Interval {
        match outcome {
            PairOutcome::Giant => self.giant_ci,
            PairOutcome::Intransitive => self.intrans_ci,
            PairOutcome::TransitiveNonGiant => self.trans_ci,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("estimate serialises")
    }

    pub const CSV_HEADER: &'static str = "kind,n,samples,seed,chunk_size,level,giant,intransitive,transitive_non_giant,p_giant,giant_lo,giant_hi,p_intrans,intrans_lo,intrans_hi,p_trans,trans_lo,trans_hi";

    pub fn to_csv_row(&self) -> String {
        let mut fields = vec![
            self.kind.to_string(),
            self.n.to_string(),
            self.samples.to_string(),
            self.seed.to_string(),
            self.chunk_size.to_string(),
            self.level.to_string(),
            self.counts.giant.to_string(),
            self.counts.intransitive.to_string(),
            self.counts.transitive_non_giant.to_string(),
        ];
        for outcome in PairOutcome::ALL {
            let ci = self.interval(outcome);
            fields.push(format!("{:.6}", self.point(outcome)));
            fields.push(format!("{:.6}", ci.lo));
            fields.push(format!("{:.6}", ci.hi));
        }
        fields.join(",")
    }
}

/// Two-sided normal quantile for confidence `level`.
pub fn z_value(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence level {level} must lie in (0, 1)"
        )));
    }
    if level == DEFAULT_LEVEL {
        return Ok(Z_99);
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(normal.inverse_cdf(1.0 - (1.0 - level) / 2.0))
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, level: f64) -> Result<Interval> {
    if trials == 0 {
        return Err(Error::InvalidArgument("wilson_interval needs trials >= 1".into()));
    }
    if successes > trials {
        return Err(Error::InvalidArgument(format!(
            "successes {successes} exceed trials {trials}"
        )));
    }
    let z = z_value(level)?;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let mut lo = (center - half).clamp(0.0, 1.0).min(p);
    let mut hi = (center + half).clamp(0.0, 1.0).max(p);
    if successes == 0 {
        lo = 0.0;
    }
    if successes == trials {
        hi = 1.0;
    }
    Ok(Interval { lo, hi })
}

/// Monte Carlo estimate on the ambient rayon pool.
pub fn estimate(kind: GroupKind, n: usize, samples: u64, seed: u64, level: f64) -> Result<Estimate> {
    estimate_with_threads(kind, n, samples, seed, level, None)
}

pub fn estimate_with_threads(
    kind: GroupKind,
    n: usize,
    samples: u64,
    seed: u64,
    level: f64,
    threads: Option<usize>,
) -> Result<Estimate> {
    if !(2..=ENGINE_MAX_DEGREE).contains(&n) {
        return Err(Error::out_of_range(
            "estimate",
            n as u64,
            format!("2..={ENGINE_MAX_DEGREE}"),
        ));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    z_value(level)?;
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let counts = run_with_threads(threads, || {
        (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let len = CHUNK_SIZE.min(samples - chunk * CHUNK_SIZE);
                run_chunk(kind, n, seed, chunk, len)
            })
            .reduce(OutcomeCounts::default, OutcomeCounts::merge)
    });
    debug_assert_eq!(counts.total(), samples);
    Ok(Estimate {
        kind,
        n,
        samples,
        seed,
        chunk_size: CHUNK_SIZE,
        level,
        counts,
        giant_ci: wilson_interval(counts.giant, samples, level)?,
        intrans_ci: wilson_interval(counts.intransitive, samples, level)?,
        trans_ci: wilson_interval(counts.transitive_non_giant, samples, level)?,
    })
}

fn run_chunk(kind: GroupKind, n: usize, seed: u64, chunk: u64, len: u64) -> OutcomeCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut classifier = Classifier::new(n);
    let mut counts = OutcomeCounts::default();
    let mut x = vec![0u8; n];
    let mut y = vec![0u8; n];
    for _ in 0..len {
        for buf in [&mut x, &mut y] {
            let p = random_permutation(&mut rng, n, kind).expect("n >= 2");
            for (b, &i) in buf.iter_mut().zip(p.images()) {
                *b = i as u8;
            }
        }
        counts.bump(classifier.classify(&x, &y));
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_edge_cases() {
        let i = wilson_interval(0, 100, 0.95).unwrap();
        assert_eq!(i.lo, 0.0);
        assert!(i.hi > 0.0 && i.hi < 0.1);
        let i = wilson_interval(100, 100, 0.95).unwrap();
        assert_eq!(i.hi, 1.0);
        let i = wilson_interval(50, 100, 0.95).unwrap();
        assert!(((i.lo + i.hi) / 2.0 - 0.5).abs() < 1e-12);
        assert!(wilson_interval(0, 0, 0.95).is_err());
        assert!(wilson_interval(5, 4, 0.95).is_err());
        assert!(wilson_interval(1, 4, 1.0).is_err());
    }

    #[test]
    fn wilson_ninety_of_hundred() {
        // Reference values from 30-digit evaluation of the Wilson formula.
        let i = wilson_interval(90, 100, 0.95).unwrap();
        assert!((i.lo - 0.825_634_338).abs() < 1e-8, "{i:?}");
        assert!((i.hi - 0.944_770_863).abs() < 1e-8, "{i:?}");
    }

    #[test]
    fn z_constants() {
        assert_eq!(z_value(0.99).unwrap(), Z_99);
        assert!((z_value(0.95).unwrap() - 1.959_963_984_540_054).abs() < 1e-9);
        let recomputed = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.995);
        assert!((recomputed - Z_99).abs() < 1e-9);
    }

    #[test]
    fn sym2_estimate_covers_three_quarters() {
        let e = estimate(GroupKind::Sym, 2, 100_000, 11, 0.99).unwrap();
        assert_eq!(e.counts.total(), 100_000);
        assert!(e.giant_ci.contains(0.75), "{e:?}");
        assert_eq!(e.counts.transitive_non_giant, 0);
    }

    #[test]
    fn estimate_guards() {
        assert!(estimate(GroupKind::Sym, 1, 10, 0, 0.99).is_err());
        assert!(estimate(GroupKind::Sym, 5, 0, 0, 0.99).is_err());
        assert!(estimate(GroupKind::Sym, 65, 10, 0, 0.99).is_err());
    }

    #[test]
    fn partial_last_chunk() {
        let e = estimate(GroupKind::Alt, 5, CHUNK_SIZE + 17, 3, 0.99).unwrap();
        assert_eq!(e.counts.total(), CHUNK_SIZE + 17);
        for o in PairOutcome::ALL {
            assert!(e.interval(o).contains(e.point(o)));
        }
    }

    #[test]
    fn csv_row_has_header_arity() {
        let e = estimate(GroupKind::Alt, 5, 100, 3, 0.99).unwrap();
        let cols = Estimate::CSV_HEADER.split(',').count();
        assert_eq!(e.to_csv_row().split(',').count(), cols);
        let back: Estimate = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(back, e);
    }
}
