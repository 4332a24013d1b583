//! Adaptive projection estimators for Markov chain densities.
//!
//! The crate estimates three objects from a single trajectory `X_1, ..., X_n`:
//!
//! - the stationary density `f`, by projection on a nested collection of
//!   orthonormal models and penalized contrast selection;
//! - the joint density `g` of `(X_i, X_{i+1})`, the same way on tensor models;
//! - the transition density `pi = g / f`, as a truncated quotient of the two.
//!
//! Simulators for a handful of benchmark chains with closed-form densities and
//! a Monte-Carlo MISE harness sit on top of the estimators.
//!
//! ```
//! use markov_density::basis::{make_collection, BasisFamily, CapRule, Interval};
//! use markov_density::chains::{simulate, ChainSpec};
//! use markov_density::estimator::{select_model_1d, PenaltyConfig};
//!
//! let spec = ChainSpec::preset("ar1").unwrap();
//! let sample = simulate(&spec, 500, 7).unwrap();
//! let collection =
//!     make_collection(BasisFamily::Trigonometric, 500, CapRule::OneD, spec.domain).unwrap();
//! let fit = select_model_1d(sample.values(), &collection, &PenaltyConfig::default()).unwrap();
//! assert!(fit.estimate.eval(0.0) > 0.2);
//! ```

pub mod basis;
pub mod bench;
pub mod chains;
pub mod cli;
pub mod config;
mod error;
pub mod estimator;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
