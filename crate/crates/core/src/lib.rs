//! Tail bounds for matrix supermartingales with Orlicz-bounded differences.
//!
//! The crate evaluates Bernstein/Bennett-type deviation bounds for sums of
//! Hermitian random matrices whose increments have psi_alpha-bounded upper
//! eigenvalues, the dimension-reduced (intrinsic-dimension) variants, the
//! derived corollaries (i.i.d. sums, scalar case, sample covariance,
//! empirical Bernstein, bounded-differences/McDiarmid), a set of prior-work
//! baselines for comparison, and a reproducible Monte Carlo harness that
//! stress-tests every bound against simulated martingales.

pub mod bounds;
pub mod error;
pub mod linalg;
pub mod mc;
pub mod orlicz;
pub mod quad;
pub mod rng;
pub mod scalar;
pub mod selftest;

pub use error::{Error, Result};
