//! Numerical laboratory for Siegel-type counting problems.
//!
//! The crate evaluates spherical integrals over rotated ellipsoids, checks
//! the radial counting identity on explicit point sets, counts lattice orbits
//! in ellipses, estimates Siegel transforms over random unimodular lattices,
//! evaluates the modular Eisenstein series, and decomposes square-tiled
//! surfaces into cylinders.

pub mod arith;
pub mod catalog;
pub mod eisenstein;
pub mod error;
pub mod identity;
pub mod lattices;
pub mod measure;
pub mod orbits;
pub mod origami;
pub mod pointset;
pub mod quadrature;
pub mod sampling;
pub mod spherical;

pub use error::{Error, Result};
