//! Multi-indexed orthogonal polynomials of a discrete variable and the
//! exactly solvable birth-and-death processes built on them.
//!
//! The crate is organized bottom-up:
//!
//! * [`specfun`] — shifted factorials, q-shifted factorials, terminating
//!   (basic) hypergeometric sums;
//! * [`family`] — the thirteen polynomial families with their potentials,
//!   energies, norms and virtual-state data;
//! * [`miop`] — the multi-index deformation: Casoratians, the denominator
//!   polynomial, deformed polynomials and potentials, shift operators;
//! * [`operators`] — the lattice Hamiltonians and similarity transforms,
//!   plus a dense symmetric eigensolver used as an independent oracle;
//! * [`bd`] — continuous- and discrete-time birth-death processes, repeated
//!   (multi-step) processes, and Monte Carlo simulation;
//! * [`verify`] — the named verification suites behind the CLI;
//! * [`config`] — JSON run configuration shared by the CLI and bindings.

pub mod bd;
pub mod config;
pub mod dd;
pub mod family;
pub mod linalg;
pub mod miop;
pub mod operators;
pub mod specfun;
pub mod verify;

pub use family::{Family, FamilyError, FamilyId, FamilyParams, ShiftDir};
pub use miop::{IndexSet, System};
