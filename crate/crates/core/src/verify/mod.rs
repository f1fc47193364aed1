//! Numerical certification of the inequalities and identities.
//!
//! Extremal ratios are exact discrete suprema: both quadratic forms are
//! assembled densely on a finite element space, constraints are eliminated
//! by an explicit null-space basis, and the largest generalized eigenvalue
//! is computed. Every maximizer is substituted back into the original forms.

pub mod extremal;
pub mod forms;
pub mod helmholtz;
pub mod patch_spectra;
pub mod recursions;
pub mod suite;

use serde::{Deserialize, Serialize};

pub use extremal::{
    check_dqi_overlap, check_projection, enrichment_weights, extremal_friedrichs, extremal_inverse,
    extremal_kappa_nc, extremal_operator_bound, extremal_poincare, extremal_quasi_interpolation,
    p1_inverse_eigenvalue, QiVariant,
};
pub use forms::{maximize, AffineMap, Rayleigh};
pub use helmholtz::{verify_helmholtz, HelmholtzDecomposition};
pub use patch_spectra::{patch_spectra, PatchSpectraReport};
pub use recursions::{verify_dist_recursions, RecursionMode, RecursionSlack};
pub use suite::{run_suite, SuiteConfig, SuiteReport};

/// Default absolute tolerance on margins.
pub const MARGIN_TOL: f64 = 1e-10;
/// Relative tolerance for re-substituted maximizers.
pub const RESUBSTITUTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtremalResult {
    pub name: String,
    pub computed: f64,
    pub bound: f64,
    pub margin: f64,
    pub status: Status,
    pub mesh_id: String,
    #[serde(skip)]
    pub extremizer: Vec<f64>,
    #[serde(skip)]
    pub resubstitution_error: f64,
}

impl ExtremalResult {
    pub fn new(name: impl Into<String>, mesh_id: impl Into<String>, computed: f64, bound: f64, tol: f64) -> Self {
        let margin = bound - computed;
        Self {
            name: name.into(),
            computed,
            bound,
            margin,
            status: if margin >= -tol && computed.is_finite() { Status::Pass } else { Status::Fail },
            mesh_id: mesh_id.into(),
            extremizer: Vec::new(),
            resubstitution_error: 0.0,
        }
    }

    /// Attaches a maximizer; a re-substitution mismatch fails the result.
    pub fn with_extremizer(mut self, r: &Rayleigh) -> Self {
        self.extremizer = r.vector.clone();
        self.resubstitution_error = r.resubstitution_error;
        if r.resubstitution_error > RESUBSTITUTION_TOL {
            self.status = Status::Fail;
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}
