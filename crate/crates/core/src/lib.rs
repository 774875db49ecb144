//! Spectral tools for global hypoellipticity and solvability of vector
//! fields on products of tori and spheres, in Komatsu ultradifferentiable classes.

pub mod builtins;
pub mod diophantine;
pub mod error;
pub mod harmonic;
pub mod normalform;
pub mod solver;
pub mod transform;
pub mod verdict;
pub mod weights;

pub use error::{Error, Result};
pub use verdict::Verdict;
