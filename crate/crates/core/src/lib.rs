//! Desk-scale laboratory for sieved arithmetic functions, real quadratic
//! characters, Selberg-sieve majorants, Type-I approximants to λ and Λ, and
//! the correlation averages built from them.
//!
//! Everything here is exact or quadrature-controlled; nothing asserts
//! asymptotic bounds with unspecified constants.  Parallel reductions are
//! chunk-ordered so identical inputs produce bitwise-identical output.

pub mod arith;
pub mod approximants;
pub mod chain;
pub mod correlations;
pub mod exp_sums;
pub mod quad_char;
pub mod selberg;
pub mod selftest;
pub mod smoothing;

mod util;

pub use util::Kahan;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("window too large: {len} entries exceeds cap {cap}")]
    WindowTooLarge { len: u64, cap: u64 },
    #[error("integer overflow: {0}")]
    Overflow(String),
    #[error("invalid thresholds: need y > z > 1, got y={y}, z={z}")]
    InvalidThresholds { y: f64, z: f64 },
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("quality floor: eta must be >= 10, got {0}")]
    EtaBelowFloor(f64),
    #[error("series failed to converge: {0}")]
    Nonconvergence(String),
    #[error("quadrature did not reach tolerance: {0}")]
    Quadrature(String),
    #[error("sieve support too large: {what} = {got} exceeds bound {bound}")]
    SupportTooLarge {
        what: &'static str,
        got: f64,
        bound: f64,
    },
    #[error("prime cutoff {cutoff} too small; need >= {need}")]
    CutoffTooSmall { cutoff: u64, need: u64 },
    #[error("range too small: {0}")]
    RangeTooSmall(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("evaluation failed at n = {n}: {why}")]
    Eval { n: u64, why: String },
    #[error("cache format error: {0}")]
    CacheFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
