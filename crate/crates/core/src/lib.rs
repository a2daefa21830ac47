//! Two-time correlation functions for sequential projective measurements.
//!
//! The crate evaluates the correlation
//! `E_rho(A, B) = sum_i lambda_i Tr[P_i rho P_i B]`, where `A = sum_i lambda_i P_i`
//! runs over the *distinct* eigenvalues of the first-measured observable, and uses it to
//!
//! - decide whether a real subspace of observables is a gamma-space (admits a basis of
//!   mutually anticommuting involutions), in both directions: gamma-spaces yield a
//!   state-independent inner product, and a state-independent inner product forces a
//!   gamma-basis;
//! - simulate a single qubit under an endless stream of sequential Pauli measurements and
//!   recover dot products and angles of 3-vectors from consecutive outcome products,
//!   without ever re-preparing the state.
//!
//! Modules:
//!
//! - [`operator`]: Hermitian operators, clustered spectral decompositions, density operators.
//! - [`correlation`]: the correlation function, its anticommutator fast path, Gram matrices.
//! - [`gamma`]: gamma-basis predicates and the constructive gamma-space decision procedure.
//! - [`simulate`]: Lüders-rule measurement sequences and geometry estimators.
//! - [`pauli`]: parser for real combinations of Pauli strings and 3-vectors.

#![forbid(unsafe_code)]

pub mod correlation;
pub mod error;
pub mod gamma;
pub mod operator;
pub mod pauli;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
pub use operator::{C64, DensityOperator, HermitianOperator, SpectralDecomposition};
pub use rng::Seed;
