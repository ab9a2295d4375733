//! Probability that two uniformly random elements of `Sym(n)` or `Alt(n)`
//! generate a subgroup containing `Alt(n)`.
//!
//! The crate computes the probability exactly for small degrees (conjugacy
//! class reduction over one generator, with a brute-force oracle), estimates
//! it by seeded Monte Carlo for larger degrees, and evaluates the known
//! closed-form bounds on it in exact rational arithmetic.
//!
//! Permutations act on `0..n`. Composition is left to right: `p.compose(&q)`
//! applies `p` first, then `q`.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod estimate;
pub mod exact;
pub mod group;
pub mod perm;
pub mod rational;

pub use error::{Error, Result};
pub use group::PairOutcome;
pub use perm::{CycleType, GroupKind, Parity, Permutation};
