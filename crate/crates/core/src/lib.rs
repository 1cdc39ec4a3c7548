//! Finite-element core for quasi-static Biot poroelasticity in the
//! three-field form `(u, xi, eta)`.
//!
//! Taylor-Hood elements: vector P2 displacement, scalar P1 for `xi` and `eta`.
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `num_traits::Float` is shadowed by the inherent f64 methods whenever std
// is linked into the same build.
#![allow(unused_imports)]

extern crate alloc;

pub mod assembly;
pub mod edema;
pub mod error;
pub mod fem;
pub mod field;
pub mod linsolve;
pub mod mesh;
pub mod norms;
pub mod params;
pub mod problem;
pub mod projection;
pub mod sparse;
pub mod stepper;
pub mod verification;

pub use error::{Error, Result};
