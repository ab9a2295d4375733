//! Subgroups generated by a few permutations: orbits, order, and the
//! three-way classification of a generating pair.
//!
//! Orders come from a deterministic Schreier–Sims construction in the form
//! given by Knuth ("Efficient representation of perm groups", 1991). Level
//! `k` stores, for every point `j` in the orbit of `k` under the pointwise
//! stabiliser of `{k+1, .., n-1}`, one element mapping `k` to `j`. The group
//! order is the product of the level sizes.
//!
//! At every stage of the construction each stored element really lies in the
//! group, so the running product of level sizes is a lower bound on the
//! order. [`Classifier`] uses that to stop as soon as the bound reaches
//! `n!/2`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Largest degree the order engine handles (points are stored as `u8`, and
/// stack buffers are this wide).
pub const ENGINE_MAX_DEGREE: usize = 64;

/// Default ceiling for [`group_order`].
pub const DEFAULT_ORDER_MAX_DEGREE: usize = 16;

/// Three-way classification of `<x, y>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairOutcome {
    /// Contains `Alt(n)`.
    Giant,
    /// More than one orbit.
    Intransitive,
    /// Transitive, but of order below `n!/2`.
    TransitiveNonGiant,
}

impl PairOutcome {
    pub const ALL: [PairOutcome; 3] = [
        PairOutcome::Giant,
        PairOutcome::Intransitive,
        PairOutcome::TransitiveNonGiant,
    ];

    pub fn index(self) -> usize {
        match self {
            PairOutcome::Giant => 0,
            PairOutcome::Intransitive => 1,
            PairOutcome::TransitiveNonGiant => 2,
        }
    }
}

impl fmt::Display for PairOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairOutcome::Giant => "giant",
            PairOutcome::Intransitive => "intransitive",
            PairOutcome::TransitiveNonGiant => "transitive_non_giant",
        })
    }
}

/// Orbits of a permutation group, each block sorted, blocks ordered by
/// their smallest point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitPartition {
    blocks: Vec<Vec<usize>>,
}

impl OrbitPartition {
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn is_transitive(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }
}

fn common_degree(gens: &[Permutation]) -> Result<Option<usize>> {
    let Some(first) = gens.first() else {
        return Ok(None);
    };
    let n = first.degree();
    for g in &gens[1..] {
        if g.degree() != n {
            return Err(Error::DegreeMismatch {
                left: n,
                right: g.degree(),
            });
        }
    }
    Ok(Some(n))
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Orbits of `<gens>` on `0..degree`. An empty generator list gives all
/// singletons.
pub fn orbits(degree: usize, gens: &[Permutation]) -> Result<OrbitPartition> {
    if let Some(n) = common_degree(gens)? {
        if n != degree {
            return Err(Error::DegreeMismatch {
                left: degree,
                right: n,
            });
        }
    }
    let mut parent: Vec<usize> = (0..degree).collect();
    for g in gens {
        for i in 0..degree {
            let a = find(&mut parent, i);
            let b = find(&mut parent, g.apply(i));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); degree];
    for i in 0..degree {
        let r = find(&mut parent, i);
        by_root[r].push(i);
    }
    Ok(OrbitPartition {
        blocks: by_root.into_iter().filter(|b| !b.is_empty()).collect(),
    })
}

/// Exact order of `<gens>`, refusing degrees above
/// [`DEFAULT_ORDER_MAX_DEGREE`].
pub fn group_order(gens: &[Permutation]) -> Result<BigUint> {
    group_order_with_limit(gens, DEFAULT_ORDER_MAX_DEGREE)
}

pub fn group_order_with_limit(gens: &[Permutation], max_degree: usize) -> Result<BigUint> {
    let Some(n) = common_degree(gens)? else {
        return Ok(BigUint::one());
    };
    let max = max_degree.min(ENGINE_MAX_DEGREE);
    if n > max {
        return Err(Error::DegreeTooLarge { degree: n, max });
    }
    let mut chain = StabChain::new(n);
    for g in gens {
        chain.add_generator(&to_bytes(g));
    }
    Ok(chain.order())
}

/// Classifies `<x, y>` as giant, intransitive or transitive non-giant.
pub fn classify_pair(x: &Permutation, y: &Permutation) -> Result<PairOutcome> {
    if x.degree() != y.degree() {
        return Err(Error::DegreeMismatch {
            left: x.degree(),
            right: y.degree(),
        });
    }
    let n = x.degree();
    if n < 2 {
        return Err(Error::out_of_range("classify_pair", n as u64, "2..=64"));
    }
    if n > ENGINE_MAX_DEGREE {
        return Err(Error::DegreeTooLarge {
            degree: n,
            max: ENGINE_MAX_DEGREE,
        });
    }
    Ok(Classifier::new(n).classify(&to_bytes(x), &to_bytes(y)))
}

pub(crate) fn to_bytes(p: &Permutation) -> Vec<u8> {
    p.images().iter().map(|&i| i as u8).collect()
}

/// Reusable classification workspace for one degree. Hot loops keep one per
/// worker so the stabiliser chain storage is allocated once.
#[derive(Debug, Clone)]
pub struct Classifier {
    n: usize,
    chain: StabChain,
    half_factorial: Threshold,
}

impl Classifier {
    /// # Panics
    /// If `n` is 0 or exceeds [`ENGINE_MAX_DEGREE`].
    pub fn new(n: usize) -> Self {
        assert!(
            (1..=ENGINE_MAX_DEGREE).contains(&n),
            "degree {n} outside 1..={ENGINE_MAX_DEGREE}"
        );
        let fact: BigUint = (1..=n as u64).fold(BigUint::one(), |a, k| a * k);
        let half = fact / 2u32;
        Classifier {
            n,
            chain: StabChain::new(n),
            half_factorial: Threshold::new(half),
        }
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// `x` and `y` are image arrays of length `n`.
    pub fn classify(&mut self, x: &[u8], y: &[u8]) -> PairOutcome {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        if !is_transitive(x, y) {
            return PairOutcome::Intransitive;
        }
        self.chain.reset(Some(self.half_factorial.clone()));
        for g in [x, y] {
            if !is_identity(g) {
                self.chain.add_generator(g);
            }
            if self.chain.reached {
                return PairOutcome::Giant;
            }
        }
        if self.chain.reached {
            PairOutcome::Giant
        } else {
            PairOutcome::TransitiveNonGiant
        }
    }
}

fn is_identity(g: &[u8]) -> bool {
    g.iter().enumerate().all(|(i, &p)| i == p as usize)
}

/// Transitivity of `<x, y>` by graph search from point 0.
fn is_transitive(x: &[u8], y: &[u8]) -> bool {
    let n = x.len();
    let mut seen = [false; ENGINE_MAX_DEGREE];
    let mut stack = [0u8; ENGINE_MAX_DEGREE];
    let mut top = 1;
    seen[0] = true;
    let mut count = 1;
    while top > 0 {
        top -= 1;
        let p = stack[top] as usize;
        for q in [x[p], y[p]] {
            if !seen[q as usize] {
                seen[q as usize] = true;
                stack[top] = q;
                top += 1;
                count += 1;
            }
        }
    }
    count == n
}

/// Order threshold, kept as `u128` while that is wide enough.
#[derive(Debug, Clone)]
enum Threshold {
    Small(u128),
    Big(BigUint),
}

impl Threshold {
    fn new(v: BigUint) -> Self {
        match u128::try_from(&v) {
            Ok(small) => Threshold::Small(small),
            Err(_) => Threshold::Big(v),
        }
    }

    fn reached_by(&self, counts: &[u32]) -> bool {
        match self {
            Threshold::Small(t) => {
                let mut prod: u128 = 1;
                for &c in counts {
                    prod = match prod.checked_mul(c as u128) {
                        Some(p) => p,
                        None => return true,
                    };
                }
                prod >= *t
            }
            Threshold::Big(t) => {
                let prod = counts.iter().fold(BigUint::one(), |a, &c| a * c);
                prod >= *t
            }
        }
    }
}

type Buf = [u8; ENGINE_MAX_DEGREE];

/// Knuth-style stabiliser chain with base `n-1, n-2, .., 1`.
#[derive(Debug, Clone)]
struct StabChain {
    n: usize,
    /// Level `k`, slot `j`: element mapping `k` to `j` and fixing every
    /// point above `k`. Stored flat at `(k * n + j) * n`.
    table: Vec<u8>,
    table_inv: Vec<u8>,
    present: Vec<bool>,
    counts: Vec<u32>,
    /// Strong generators per level, flattened.
    strong: Vec<Vec<u8>>,
    target: Option<Threshold>,
    reached: bool,
}

impl StabChain {
    fn new(n: usize) -> Self {
        let mut chain = StabChain {
            n,
            table: vec![0; n * n * n],
            table_inv: vec![0; n * n * n],
            present: vec![false; n * n],
            counts: vec![1; n],
            strong: vec![Vec::new(); n],
            target: None,
            reached: false,
        };
        chain.reset(None);
        chain
    }

    fn reset(&mut self, target: Option<Threshold>) {
        let n = self.n;
        self.present.iter_mut().for_each(|p| *p = false);
        self.counts.iter_mut().for_each(|c| *c = 1);
        self.strong.iter_mut().for_each(Vec::clear);
        for k in 0..n {
            self.present[k * n + k] = true;
            let off = (k * n + k) * n;
            for i in 0..n {
                self.table[off + i] = i as u8;
                self.table_inv[off + i] = i as u8;
            }
        }
        self.reached = match &target {
            Some(t) => t.reached_by(&self.counts),
            None => false,
        };
        self.target = target;
    }

    fn add_generator(&mut self, g: &[u8]) {
        if self.n < 2 {
            return;
        }
        let mut buf: Buf = [0; ENGINE_MAX_DEGREE];
        buf[..self.n].copy_from_slice(g);
        self.extend(self.n - 1, &buf);
    }

    fn order(&self) -> BigUint {
        self.counts.iter().fold(BigUint::one(), |a, &c| a * c)
    }

    #[inline]
    fn slot(&self, k: usize, j: usize) -> usize {
        (k * self.n + j) * self.n
    }

    /// Sifts `pi`, which fixes every point above `k`, through levels
    /// `k, .., 1`. True iff it lies in the group the tables describe.
    fn contains(&self, k: usize, pi: &Buf) -> bool {
        let n = self.n;
        let mut buf = *pi;
        for level in (1..=k).rev() {
            let j = buf[level] as usize;
            if !self.present[level * n + j] {
                return false;
            }
            let inv = &self.table_inv[self.slot(level, j)..][..n];
            for p in buf[..n].iter_mut() {
                *p = inv[*p as usize];
            }
        }
        true
    }

    /// Knuth's procedure A: add `pi` (fixing every point above `k`) to the
    /// generators of level `k` and close the tables under it.
    fn extend(&mut self, k: usize, pi: &Buf) {
        if self.reached || k == 0 || self.contains(k, pi) {
            return;
        }
        let n = self.n;
        self.strong[k].extend_from_slice(&pi[..n]);
        let mut existing = [0u8; ENGINE_MAX_DEGREE];
        let mut m = 0;
        for j in 0..=k {
            if self.present[k * n + j] {
                existing[m] = j as u8;
                m += 1;
            }
        }
        for &j in &existing[..m] {
            let mut tau: Buf = [0; ENGINE_MAX_DEGREE];
            let sigma = &self.table[self.slot(k, j as usize)..][..n];
            for i in 0..n {
                tau[i] = pi[sigma[i] as usize];
            }
            self.absorb(k, &tau);
            if self.reached {
                return;
            }
        }
    }

    /// Knuth's procedure B: `tau` fixes every point above `k`. Either it
    /// opens a new slot on level `k`, or its residue is pushed one level down.
    fn absorb(&mut self, k: usize, tau: &Buf) {
        let n = self.n;
        let j = tau[k] as usize;
        if self.present[k * n + j] {
            let mut rho: Buf = [0; ENGINE_MAX_DEGREE];
            let inv = &self.table_inv[self.slot(k, j)..][..n];
            for i in 0..n {
                rho[i] = inv[tau[i] as usize];
            }
            self.extend(k - 1, &rho);
            return;
        }
        let off = self.slot(k, j);
        self.table[off..off + n].copy_from_slice(&tau[..n]);
        for (i, &t) in tau[..n].iter().enumerate() {
            self.table_inv[off + t as usize] = i as u8;
        }
        self.present[k * n + j] = true;
        self.counts[k] += 1;
        if let Some(t) = &self.target {
            if t.reached_by(&self.counts) {
                self.reached = true;
                return;
            }
        }
        let gens = self.strong[k].len() / n;
        for g in 0..gens {
            let mut next: Buf = [0; ENGINE_MAX_DEGREE];
            {
                let s = &self.strong[k][g * n..][..n];
                for i in 0..n {
                    next[i] = s[tau[i] as usize];
                }
            }
            self.absorb(k, &next);
            if self.reached {
                return;
            }
        }
    }
}
