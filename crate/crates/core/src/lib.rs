//! Exact numerical toolkit for Bridgeland stability conditions on surfaces.

pub mod charge;
pub mod enumerate;
pub mod error;
pub mod gaussian;
pub mod hn;
pub mod lattice;
pub mod mmp;
pub mod num;
pub mod rank2;
pub mod serde_util;
pub mod support;
pub mod walls;

pub use error::{Error, Result};
pub use gaussian::GaussianRational;
pub use lattice::{ChernCharacter, MukaiVector, NsLattice};
