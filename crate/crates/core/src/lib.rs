//! Numerical bench for sequential quantum measurement probabilities.
//!
//! * [`hilbert`]: states, certified operators, spectral calculus, Heisenberg evolution.
//! * [`logic`]: projector meet (subspace intersection) and its strict variant.
//! * [`sequence`]: Born rule, reduction chains, Markov and amplitude composition,
//!   and an explicit system-plus-pointer measurement model.
//! * [`spin`]: spin-1/2 projectors and a classical hidden-variable sphere model.
//! * [`path`]: path-distance operators and path probabilities on a 1-D lattice.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hilbert;
pub mod logic;
pub mod path;
pub mod random;
pub mod sequence;
pub mod spin;

pub use error::{Error, Result};
pub use hilbert::{
    CMatrix, CVector, HermitianOperator, Operator, PovmEffect, Projector, Propagator, QuantumState, Unitary,
};
