//! Finite-truncation models of the twisted canonical commutation relations
//! and of the partial-isometry algebra they are equivalent to.

pub mod error;
pub mod fock_core;
pub mod reconstruct;
pub mod relations;
pub mod representations;
pub mod symbolic;

pub use error::{Error, Result};
