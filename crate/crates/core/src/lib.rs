//! Exact-arithmetic laboratory for metric Diophantine approximation.
//!
//! The crate builds the set systems behind Khintchine's theorem and the
//! Duffin–Schaeffer theorem on the torus `[0, 1)`, measures them with exact
//! rational arithmetic, and evaluates the overlap, variance and GCD-graph
//! quantities that drive the modern proofs. Every counting operation has a
//! brute-force counterpart in the test suites.
//!
//! The crate is `no_std` (with `alloc`); file formats, the command line and
//! parallel drivers live in the `dslab` companion crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod approx;
pub mod certified;
pub mod correlation;
mod error;
pub mod graph;
pub mod numtheory;
pub mod orbit;
pub mod rational;
pub mod torus;

pub use approx::{ApproxFunction, DenominatorSet, Family};
pub use certified::Enclosure;
pub use error::{Error, Result};
pub use graph::{GcdGraph, StructureWitness, WeightedSupport};
pub use numtheory::Factorization;
pub use orbit::{ConvergentList, RealSample};
pub use rational::Rational;
pub use torus::TorusIntervalSet;
