//! Self-consistent polarized Dirac vacuum in a periodic box, charge
//! renormalization multipliers and Pauli-Villars regularization.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charge;
pub mod cli;
pub mod crosscheck;
pub mod dirac;
pub mod error;
pub mod io;
pub mod lattice;
pub mod numerics;
pub mod pauli_villars;
pub mod renorm;
pub mod scf;

pub use error::{Error, Result};
