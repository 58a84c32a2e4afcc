//! Numerical engine for discrete Kœnigs nets.
//!
//! Points and subspaces of real projective space are stored as normalized
//! homogeneous representatives and orthonormal bases. Every rank decision
//! goes through [`linalg`] with the cutoffs held in [`Tolerance`].
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod autoconjugate;
pub mod conics;
mod error;
pub mod fixtures;
pub mod grid;
pub mod inscribed;
pub mod linalg;
pub mod projective;
pub mod qnet;
pub mod quadric;

pub use error::{Error, Result};
pub use projective::{HPoint, ProjMap, Subspace, Tolerance};
pub use qnet::QNet;
pub use quadric::Quadric;

/// Dense column vector used for homogeneous coordinates.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix used for bases and bilinear forms.
pub type Matrix = nalgebra::DMatrix<f64>;
