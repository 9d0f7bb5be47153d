//! Exact lattice vertex superalgebra engine.
//!
//! Realizes the N=4 superconformal algebra at c = −9 inside the βγbc system,
//! affine sl₃ at level −3/2 inside V ⊗ F₋₁, and checks their identities,
//! module actions, Zhu relations and characters at finite weight.

pub mod affine2;
pub mod amodules;
pub mod error;
pub mod guide;
pub mod lattice;
pub mod linalg;
pub mod n4;
pub mod report;
pub mod scalar;
pub mod space;
pub mod state;
pub mod vertex;
pub mod zhu;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
pub struct ReadmeDoctests;
