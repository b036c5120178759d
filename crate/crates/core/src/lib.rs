//! Exact arithmetic for concentration-function inequalities on ℤ.
//!
//! Masses are `BigRational` throughout. Floating point appears only in the
//! Gaussian bridge and in interval-certified comparisons against irrational
//! constants.

pub mod dist;
pub mod error;
pub mod extremal;
pub mod gauss;
pub mod interval;
pub mod lab;
pub mod lattice;
pub mod lattice_gap;
pub mod rational;
pub mod rearrange;
pub mod domination;

pub use dist::{centered_interval, IntDist, SpanResult};
pub use error::{Error, Result};
pub use rational::Rational;
