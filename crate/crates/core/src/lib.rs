pub mod algebra;
pub mod cocycle;
pub mod convolution;
pub mod derivations;
pub mod error;
pub mod generators;
pub mod group;
pub mod harness;
pub mod linalg;

pub use algebra::{Bialgebra, BialgebraKind, Element, Representation, Tolerances};
pub use error::{Error, Result};
pub use group::CayleyTable;
