//! Verification laboratory for Crouzeix–Raviart and conforming P1 finite
//! elements on bisection meshes.
//!
//! The crate evaluates explicit constants of discrete Poincaré, Friedrichs,
//! interpolation and inverse estimates in closed form and certifies them by
//! computing exact discrete extremal ratios on concrete meshes.

pub mod afem;
pub mod constants;
pub mod error;
pub mod fem;
pub mod mesh;
pub mod numerics;
pub mod operators;
pub mod verify;

pub use error::{Error, Result};
