//! Joinings of finite-dimensional W*-dynamical systems.
//!
//! Algebras are concrete unital *-subalgebras of d×d complex matrices,
//! states are density matrices and group actions are validated
//! *-automorphisms of a finite group or of Z. On top of that the crate
//! builds the GNS representation, Tomita-Takesaki modular data, the
//! mirror joining through the commutant, and a Dykstra-based search of
//! the convex set of joinings.

pub mod algebra;
pub mod error;
pub mod gns_modular;
pub mod joining;
pub mod mirror;
pub mod numerics;
pub mod report;
pub mod solver;
pub mod system;

pub use error::{Error, Result};
pub use report::{Check, ValidationReport};
