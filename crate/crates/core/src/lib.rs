//! Linear-optics quantum gate toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`fock`]: multimode Fock states, permanents, interferometer action and
//!   post-selection on detector patterns.
//! * [`circuits`]: beam splitters, phase shifters, embedding/composition of
//!   mode unitaries, and the row-wise completion of a 4×3 block to a 7×7
//!   unitary.
//! * [`toffoli`]: the N-qubit coincidence-basis controlled-phase network and
//!   the controlled-U reduction.
//! * [`fredkin`]: parity check, conditional-phase block design equations and
//!   end-to-end Fredkin simulation.
//! * [`optimize`]: maximisation of the shrink factor `q` under the
//!   embeddability constraint.
//! * [`verify`]: reproduction checks with pinned tolerances, shared by the
//!   CLI and the acceptance test suite.

pub mod circuits;
pub mod error;
pub mod fock;
pub mod fredkin;
pub mod linalg;
pub mod optimize;
pub mod toffoli;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
