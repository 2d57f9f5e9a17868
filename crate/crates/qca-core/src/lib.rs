//! Simulation of single-qubit channels arising from unitary interaction with
//! small environments: exact Kraus/affine representations, closed-form maps
//! for one- and two-qubit environment circuits, and Monte Carlo geometry of
//! the resulting channel families in Bloch-translation space.

// The 2×2/3×3 kernels index exactly like the subscripts in the formulas they
// implement; iterator chains would obscure that correspondence.
#![allow(clippy::needless_range_loop)]

pub mod channels;
pub mod envsim;
pub mod error;
pub mod geometry;
pub mod qmath;
pub mod rng;
pub mod tolerances;
pub mod validation;

pub use error::{Error, Result};
