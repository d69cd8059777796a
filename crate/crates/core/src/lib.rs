//! Exact computations with BV quantisations of derived critical loci.

pub mod coefficients;
pub mod cohomology;
pub mod derham;
pub mod diffops;
pub mod duality;
pub mod error;
pub mod gca;
pub mod linalg;
pub mod quantise;

pub use error::{Error, Result};
