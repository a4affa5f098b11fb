//! Local universal disentangling machines for two-qubit states.

pub mod channel;
pub mod error;
pub mod frontier;
pub mod machine;
pub mod numerics;
pub mod separability;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
