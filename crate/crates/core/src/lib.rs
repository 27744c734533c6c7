//! Folded surface codes on looped shuttling pipelines.
//!
//! Stabilizer and statevector verification of transversal Clifford protocols,
//! exact-rational timing simulation of shuttling loops, closed-form cost
//! accounting, CCZ factory runtimes, and virtual-stack layer routing.

pub mod circuit;
pub mod costs;
pub mod dense;
pub mod error;
pub mod expr;
pub mod factory;
pub mod layout;
pub mod logical;
pub mod loopsim;
pub mod parallel;
pub mod params;
pub mod pauli;
pub mod protocols;
pub mod rational;
pub mod report;
pub mod surface_codes;
pub mod tableau;

pub use error::{Error, Result};
pub use params::TimingParams;
pub use rational::Q;
