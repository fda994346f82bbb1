//! Physical realizability analysis and network synthesis for mixed
//! quantum-classical linear stochastic systems.
//!
//! A system is described by real state-space matrices `(A, B, C, D)` together
//! with the commutation structure of its state, input fields and outputs.
//! This crate
//!
//! - checks the matrix conditions under which such a model corresponds to a
//!   physical system ([`realizability`]),
//! - converts general-form models into the standard form whose quantum and
//!   classical parts are explicitly separated ([`transform`]),
//! - builds the augmented and reduced systems used to reason about the
//!   quantum part ([`augment`]),
//! - synthesizes a feedback realization made of a quantum subsystem, a
//!   classical subsystem and a measurement network ([`synthesis`]),
//! - integrates first and second moments to witness preservation of the
//!   commutation relations ([`moments`]).
//!
//! All matrices are `nalgebra::DMatrix<f64>` (or `DMatrix<Complex64>` for Ito
//! matrices). State variables are ordered `(q1, p1, ..., q_nq, p_nq,
//! classical...)` and outputs are ordered quantum-first.

pub mod augment;
pub mod cli;
pub mod error;
pub mod io;
pub mod matkit;
pub mod moments;
pub mod realizability;
pub mod reference;
pub mod synthesis;
pub mod sysmodel;
pub mod transform;

pub use error::{Error, Result};
pub use sysmodel::{
    Dimensions, GeneralSystem, QuantumOnlySystem, StandardSystem, StructureMatrices,
};
