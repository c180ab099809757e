//! Existence criteria for r-primitive k-normal polynomials with two prescribed
//! coefficients over odd finite fields.
//!
//! The crate is layered bottom-up:
//!
//! - [`numthy`]: primality, bounded factorization of `q^n - 1`, `W`, `C_nu`.
//! - [`gfpoly`]: base-field arithmetic and polynomials over `F_q`.
//! - [`tower`]: the extension `F_{q^n}` with element diagnostics.
//! - [`criteria`]: necessary condition, baseline and sieve inequalities, thresholds.
//! - [`census`]: exhaustive ground truth on small fields.

pub mod census;
pub mod criteria;
mod error;
pub mod gfpoly;
pub mod numthy;
pub mod tower;

pub use error::{Error, Result};
