//! Spontaneous-emission disentanglement of two qubits.
//!
//! Two atoms decay independently into their own vacuum reservoirs. This
//! crate evolves two-qubit density matrices under the resulting amplitude
//! damping channel (memoryless or with an exponential memory kernel),
//! computes the Wootters concurrence, checks the concurrence decay bound,
//! and finds finite disentanglement times.

pub mod channel;
pub mod entanglement;
pub mod error;
pub mod esd;
pub mod invariants;
pub mod linalg;
pub mod master;
pub mod memory;
pub mod states;

pub use error::{Error, Result};
