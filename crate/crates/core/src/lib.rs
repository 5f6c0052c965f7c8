//! Exact-arithmetic toolkit for smooth complete toric varieties:
//! generalized Bott towers, torus-invariant divisors and intersection theory,
//! log Fano pair decisions and classification, and simple normal crossing
//! Fano models glued from toric components.

pub mod bott;
pub mod divisors;
pub mod error;
pub mod fan;
pub mod linalg;
pub mod logfano;
pub mod snc;

pub use error::{Error, Result};
pub use fan::{Cone, Fan, LatticeMap, LatticeVector, StarFan, ValidationReport};
