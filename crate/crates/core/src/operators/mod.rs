//! Nonconforming interpolation, enrichment and quasi-interpolation.

pub mod enrichment;
pub mod interpolation;

pub use enrichment::{
    discrete_quasi_interpolate, enrich, enrich_broken, patch_values, quasi_interpolate,
    EnrichmentKind, QiSource,
};
pub use interpolation::{
    coarse_side_integrals, cr_partner, inc_interpolate, inc_interpolate_fn,
    inc_interpolate_refinement, prolongate,
};
