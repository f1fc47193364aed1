//! Conforming P1, Crouzeix–Raviart and piecewise-constant spaces.

pub mod assembly;
pub mod broken;
pub mod geometry;
pub mod quadrature;
pub mod space;
pub mod trace;

pub use assembly::{
    assemble_load, assemble_mass, assemble_stiffness, interpolate_s1, local_mass, local_stiffness,
    solve_poisson, solve_poisson_with, Load,
};
pub use broken::BrokenP1;
pub use geometry::ElementGeometry;
pub use space::{FeFunction, FeSpace, SpaceKind};
pub use trace::{distance_moment_sq, trace_identity_check};
