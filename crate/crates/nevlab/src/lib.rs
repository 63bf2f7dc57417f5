//! Numerical value-distribution toolkit for closed-form meromorphic functions.
//!
//! Functions are expression trees ([`Expr`]) over `z`, constants, `exp`, `sin`,
//! `cos`, integer powers and Weierstrass `℘`/`℘′`. On top of exact evaluation and
//! local Laurent arithmetic the crate locates zeros and poles, integrates
//! Nevanlinna functionals, counts `c`-separated pairs, estimates growth indicators
//! and runs a registry of inequality checks.

pub mod error;
pub mod functionals;
pub mod growth;
pub mod harness;
pub mod locate;
pub mod model;
pub mod pairs;
pub mod quad;
pub mod tolerances;

pub use error::{NevError, Result};
pub use model::{EvalResult, Expr, Lattice, LocalExpansion};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Builds a rayon pool of `workers` threads (0 means rayon's default).
pub fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| NevError::InvalidParameter(format!("thread pool: {e}")))
}

/// Compact complex label: `2`, `-1.5i`, `0.5+0.5i`.
pub fn fmt_complex(c: C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

/// Serializes a complex number as its [`fmt_complex`] label.
pub fn ser_complex<S: serde::Serializer>(c: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_complex(*c))
}
