//! Capacities of non-commutative bipartite graphs computed by semidefinite
//! programming, together with numerical checks of their structural
//! properties.

pub mod builtin;
pub mod capacity;
pub mod error;
pub mod graph;
pub mod matrix;
pub mod random;
pub mod sdp;
pub mod theorems;

pub use error::{Error, Result};
pub use graph::{CqGraph, KrausChannel, NcGraph};
pub use matrix::ComplexMatrix;
