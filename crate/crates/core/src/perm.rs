//! Permutations of `{0, .., n-1}` in array form.
//!
//! Composition runs left to right: `p.compose(&q)` maps `i` to `q(p(i))`.
//! Cycle notation for humans is 1-indexed, e.g. `(1 2)(3 4 5)`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which of the two giant groups the random elements are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Sym,
    Alt,
}

impl GroupKind {
    pub const ALL: [GroupKind; 2] = [GroupKind::Alt, GroupKind::Sym];

    pub fn as_str(self) -> &'static str {
        match self {
            GroupKind::Sym => "sym",
            GroupKind::Alt => "alt",
        }
    }

    /// Whether an element of the given parity lies in this group.
    pub fn admits(self, parity: Parity) -> bool {
        match self {
            GroupKind::Sym => true,
            GroupKind::Alt => parity == Parity::Even,
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sym" | "s" => Ok(GroupKind::Sym),
            "alt" | "a" => Ok(GroupKind::Alt),
            _ => Err(Error::Parse {
                input: s.to_string(),
                reason: "expected `alt` or `sym`".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn from_bit(odd: bool) -> Self {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn combine(self, other: Parity) -> Parity {
        Parity::from_bit((self == Parity::Odd) ^ (other == Parity::Odd))
    }
}

/// A bijection of `{0, .., n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// Builds a permutation from its image list, rejecting anything that is
    /// not a bijection of `0..images.len()`.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::ZeroDegree);
        }
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image {i} out of range for degree {n}"
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPermutation(format!("image {i} repeated")));
            }
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// Builds a permutation of degree `n` from disjoint 0-indexed cycles.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDegree);
        }
        let mut images: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        for cycle in cycles {
            for &p in cycle {
                if p >= n {
                    return Err(Error::InvalidPermutation(format!(
                        "point {p} out of range for degree {n}"
                    )));
                }
                if std::mem::replace(&mut used[p], true) {
                    return Err(Error::InvalidPermutation(format!(
                        "point {p} appears in more than one cycle"
                    )));
                }
            }
            for (i, &p) in cycle.iter().enumerate() {
                images[p] = cycle[(i + 1) % cycle.len()];
            }
        }
        Ok(Permutation { images })
    }

    /// Parses 1-indexed cycle notation such as `(1 2)(3 4 5)`. The empty
    /// string and `()` denote the identity.
    pub fn parse_cycles(s: &str, n: usize) -> Result<Self> {
        let err = |reason: &str| Error::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let mut cycles = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .ok_or_else(|| err("expected `(`"))?;
            let close = body.find(')').ok_or_else(|| err("unclosed cycle"))?;
            let mut cycle = Vec::new();
            for tok in body[..close].split(|c: char| c.is_whitespace() || c == ',') {
                if tok.is_empty() {
                    continue;
                }
                let p: usize = tok.parse().map_err(|_| err("points must be integers"))?;
                if p == 0 {
                    return Err(err("points are 1-indexed"));
                }
                cycle.push(p - 1);
            }
            if !cycle.is_empty() {
                cycles.push(cycle);
            }
            rest = body[close + 1..].trim_start();
        }
        Permutation::from_cycles(n, &cycles)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, point: usize) -> usize {
        self.images[point]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// `self` first, then `other`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        compose(self, other)
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.degree()];
        for (i, &p) in self.images.iter().enumerate() {
            inv[p] = i;
        }
        Permutation { images: inv }
    }

    /// `g⁻¹ · self · g` in left-to-right order, i.e. relabels points by `g`.
    pub fn conjugate_by(&self, g: &Permutation) -> Result<Permutation> {
        g.inverse().compose(self)?.compose(g)
    }

    /// Non-trivial cycles, each starting at its smallest point, ordered by
    /// that point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut p = self.images[start];
            while p != start {
                seen[p] = true;
                cycle.push(p);
                p = self.images[p];
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    fn cycle_lengths(&self) -> Vec<usize> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut lengths = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut p = start;
            while !seen[p] {
                seen[p] = true;
                p = self.images[p];
                len += 1;
            }
            lengths.push(len);
        }
        lengths
    }

    pub fn parity(&self) -> Parity {
        let cycles = self.cycle_lengths().len();
        Parity::from_bit((self.degree() - cycles) % 2 == 1)
    }

    pub fn cycle_type(&self) -> CycleType {
        CycleType::new(self.cycle_lengths())
    }

    /// 1-indexed cycle notation; the identity prints as `()`.
    pub fn to_cycle_string(&self) -> String {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return "()".to_string();
        }
        let mut s = String::new();
        for c in cycles {
            s.push('(');
            let pts: Vec<String> = c.iter().map(|p| (p + 1).to_string()).collect();
            s.push_str(&pts.join(" "));
            s.push(')');
        }
        s
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_cycle_string())
    }
}

/// Applies `p` first, then `q`: the result maps `i` to `q(p(i))`.
pub fn compose(p: &Permutation, q: &Permutation) -> Result<Permutation> {
    if p.degree() != q.degree() {
        return Err(Error::DegreeMismatch {
            left: p.degree(),
            right: q.degree(),
        });
    }
    Ok(Permutation {
        images: p.images.iter().map(|&i| q.images[i]).collect(),
    })
}

/// Integer partition of the degree, parts in descending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CycleType {
    parts: Vec<usize>,
}

impl CycleType {
    /// Sorts `parts` into canonical order. Zero parts are dropped.
    pub fn new(mut parts: Vec<usize>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        CycleType { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn degree(&self) -> usize {
        self.parts.iter().sum()
    }

    /// A permutation with this cycle type is even iff `n - #parts` is even.
    pub fn is_even(&self) -> bool {
        (self.degree() - self.parts.len()).is_multiple_of(2)
    }

    /// `(part length, multiplicity)` pairs, longest first.
    pub fn multiplicities(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((len, m)) if *len == p => *m += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// Cycles laid out on consecutive points, longest first.
    pub fn representative(&self) -> Permutation {
        let n = self.degree().max(1);
        let mut images: Vec<usize> = (0..n).collect();
        let mut start = 0;
        for &len in &self.parts {
            for i in 0..len {
                images[start + i] = start + (i + 1) % len;
            }
            start += len;
        }
        Permutation { images }
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Uniform element of `Sym(n)` or `Alt(n)`.
///
/// Alt sampling shuffles uniformly and, if the result is odd, swaps the
/// images of points 0 and 1. Right-multiplying by a transposition is a
/// bijection from odd to even permutations, so the output is uniform on
/// `Alt(n)`.
pub fn random_permutation<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    kind: GroupKind,
) -> Result<Permutation> {
    if n == 0 {
        return Err(Error::ZeroDegree);
    }
    let mut images: Vec<usize> = (0..n).collect();
    images.shuffle(rng);
    let mut p = Permutation { images };
    if kind == GroupKind::Alt && p.parity() == Parity::Odd {
        p.images.swap(0, 1);
    }
    Ok(p)
}
