//! Separability of multiqubit GHZ and W states when one qubit is uniformly
//! accelerated, characterised by the Abe-Rajagopal q-conditional entropy
//! across the inertial : non-inertial bipartition.
//!
//! The pipeline is
//!
//! 1. [`states`] builds the inertial state and pushes its last qubit through
//!    the Unruh channel of [`accel`], giving a truncated (bitstring x Fock)
//!    density matrix;
//! 2. [`spectral`] traces out the inertial qubits and diagonalises both
//!    matrices block by block;
//! 3. [`entropy`] turns the two spectra into `S_q(inertial | accelerated)`;
//! 4. [`transition`] locates the mixing parameter where `S_q` changes sign and
//!    [`fit`] fits the resulting frontier to `(p/b)^x + lambda^y = 1`.

pub mod accel;
pub mod entropy;
pub mod error;
pub mod fit;
pub mod matrix;
pub mod spectral;
pub mod states;
pub mod transition;

pub use accel::{unruh_apply, AccelerationParam, FockCutoff};
pub use entropy::{ar_conditional, ar_for_state, evaluate, tsallis, EntropyQuery};
pub use error::{Error, Result};
pub use matrix::{DenseMatrix, SparseSymMatrix};
pub use spectral::TruncatedDensityMatrix;
pub use states::{FamilyKind, StateFamily};
