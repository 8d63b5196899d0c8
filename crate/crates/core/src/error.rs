use std::io;

use thiserror::Error;

use crate::admissibility::Split;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse tuple: {0}")]
    Parse(String),

    #[error("entry {index} is even ({value}); all entries must be odd")]
    EvenEntry { index: usize, value: i64 },

    #[error("six-integer tuple must sum to zero, sum is {0}")]
    NonZeroSum(i64),

    #[error("entry {0} exceeds the supported magnitude 2^20")]
    OutOfRange(i64),

    #[error("action is not free: gcd({split}) = {gcd}")]
    NotFree { split: Split, gcd: i64 },

    #[error("{value} is not invertible modulo {modulus} (gcd {gcd})")]
    NotInvertible { value: i128, modulus: u64, gcd: u64 },

    /// A closed-form identity that holds for every free tuple failed. Always a bug.
    #[error("invariant violation: {0}")]
    Theory(String),

    #[error("search bound violated: {0}")]
    Bound(String),

    #[error("records out of order: s went from {prev} to {next}")]
    Unsorted { prev: u64, next: u64 },

    #[error("record file: {0}")]
    Format(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
