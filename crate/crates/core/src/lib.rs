//! Generating functions of Lagrangian contact problems, Morse splitting,
//! ADE catastrophe classification, and bifurcation analysis of boundary
//! value problems for symplectic maps.

pub mod bvp;
pub mod classify;
pub mod contact;
pub mod cotangent;
pub mod error;
pub mod jet;
pub mod linalg;
pub mod oracle;
pub mod splitting;
pub mod verify;

pub use error::{Error, Result};
pub use jet::{CoordinateChange, Jet, MultiIndex};
