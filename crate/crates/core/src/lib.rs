//! Bloch waves in high-contrast periodic media by power series in the
//! quasi-staticity parameter `η`.
//!
//! The crate meshes a periodic cell with an inclusion, computes the Dirichlet
//! spectrum of the inclusion, evaluates the homogenized dispersion relation,
//! runs the hierarchy of cell problems that produces the series coefficients,
//! bounds their growth by majorant recursions, and checks truncated series
//! against a direct finite-`η` Bloch eigensolve.

pub mod bounds;
pub mod cell;
pub mod direct;
pub mod dispersion;
pub mod error;
pub mod fem;
pub mod hierarchy;
pub mod io;
pub mod mesh;
pub mod spectrum;

pub use error::{Error, Result};
