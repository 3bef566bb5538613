//! Numerical laboratory relating the magic of a pure state (its stabilizer
//! linear entropy) to the randomness of the projected ensemble obtained by
//! measuring part of it in the computational basis.
//!
//! Layout, bottom-up:
//!
//! - [`qstate`]: dense statevectors and in-place gate kernels.
//! - [`clifford`]: random two-qubit Clifford circuits and exact enumeration
//!   of the one- and two-qubit Clifford groups.
//! - [`magic`]: Pauli strings, the Ξ vector and the stabilizer linear entropy.
//! - [`ensemble`]: projected ensembles, moment operators, Haar moments and
//!   design distances.
//! - [`theory`]: closed-form coefficients for the Clifford-averaged
//!   Hilbert–Schmidt design distance, evaluated in exact rationals.
//! - [`exper`]: seeded Monte-Carlo sweeps, exponential extrapolation and the
//!   verification suite driven by the `magicproj` binary.
//!
//! Basis convention: qubit 0 is the most significant bit of an amplitude
//! index.

pub mod clifford;
pub mod ensemble;
pub mod error;
pub mod exper;
pub mod linalg;
pub mod magic;
pub mod parallel;
pub mod policy;
pub mod qstate;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use policy::NumericPolicy;
