//! Both sides of estimator stability and discrete reliability on a pair
//! `(T, T̂)`, evaluated with the closed-form constants.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{estimate, EstimatorBreakdown, Method};
use crate::constants::{evaluate_constants, ConstantsInput, ConstantsReport};
use crate::error::{Error, Result};
use crate::fem::{solve_poisson, FeFunction, FeSpace, Load};
use crate::mesh::{mesh_metrics, MeshPair};
use crate::operators::prolongate;
use crate::verify::verify_helmholtz;

/// One evaluation of both axioms on a pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    /// Energy distance of the two discrete solutions.
    pub delta: f64,
    /// `|η(T, T∩T̂) − η(T̂, T∩T̂)|`.
    pub a1_lhs: f64,
    /// `Λ1 δ`.
    pub a1_rhs: f64,
    /// `δ²`.
    pub a3_lhs: f64,
    /// `Λ3 η²(T, T∖T̂)`.
    pub a3_rhs: f64,
    pub lambda1: f64,
    pub lambda3: f64,
    /// `‖∇u‖²` on the coarse and the fine mesh.
    pub energy_coarse: f64,
    pub energy_fine: f64,
    /// Residual of the Helmholtz decomposition of the coarse CR gradient on
    /// the fine mesh (CRFEM on simply connected domains only).
    pub helmholtz_residual: Option<f64>,
    /// `|δ² − ‖α̂ − û‖² − ‖Curl β̂‖²|`.
    pub split_error: Option<f64>,
}

impl AxiomCheck {
    pub fn a1_holds(&self, tol: f64) -> bool {
        self.a1_lhs <= self.a1_rhs + tol * self.a1_rhs.max(1.0)
    }

    pub fn a3_holds(&self, tol: f64) -> bool {
        self.a3_lhs <= self.a3_rhs + tol * self.a3_rhs.max(1.0)
    }
}

/// Constants for a pair: smallest angle and largest patches of both meshes.
pub fn pair_constants(pair: &MeshPair) -> Result<ConstantsReport> {
    let c = ConstantsInput::from_metrics(&mesh_metrics(pair.coarse())?);
    let f = ConstantsInput::from_metrics(&mesh_metrics(pair.fine())?);
    let merged = ConstantsInput {
        n: 2,
        omega0: c.omega0.min(f.omega0),
        m_int: c.m_int.max(f.m_int),
        m_bd: c.m_bd.max(f.m_bd),
        h_max: c.h_max.max(f.h_max),
        domain_width: c.domain_width,
        c_quot: c.c_quot.max(f.c_quot),
        max_abs_cos: match (c.max_abs_cos, f.max_abs_cos) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        },
    };
    evaluate_constants(&merged)
}

/// Solves on both meshes and checks both axioms.
pub fn check_axioms(pair: &MeshPair, f: &Load, which: Method) -> Result<AxiomCheck> {
    let coarse = Arc::new(FeSpace::new(pair.coarse_arc(), which.space_kind())?);
    let fine = Arc::new(FeSpace::new(pair.fine_arc(), which.space_kind())?);
    let u = solve_poisson(coarse, f)?;
    let uh = solve_poisson(fine, f)?;
    let est = estimate(&u, f, which)?;
    let est_h = estimate(&uh, f, which)?;
    check_axioms_with(pair, &u, &uh, &est, &est_h, which)
}

/// Axiom check from precomputed solutions and estimators.
pub fn check_axioms_with(
    pair: &MeshPair,
    u: &FeFunction,
    uh: &FeFunction,
    est: &EstimatorBreakdown,
    est_h: &EstimatorBreakdown,
    which: Method,
) -> Result<AxiomCheck> {
    if est.len() != pair.coarse().n_elements() || est_h.len() != pair.fine().n_elements() {
        return Err(Error::SpaceMismatch("estimators do not match the pair".into()));
    }
    let consts = pair_constants(pair)?;
    let (l1_sq, lambda3) = match which {
        Method::Cfem => (consts.lambda1_sq_cfem, consts.lambda3_cfem),
        Method::Crfem => (consts.lambda1_sq_crfem, consts.lambda3_crfem),
    };
    let lambda1 = l1_sq.sqrt();

    let coarse_on_fine = prolongate(pair, &u.to_broken()?)?;
    let fine = uh.to_broken()?;
    let diff = fine.sub(&coarse_on_fine)?;
    let delta_sq = diff.energy_sq();

    let eta_kept = est.total_over(pair.overlap().iter().map(|&(k, _)| k)).sqrt();
    let eta_kept_h = est_h.total_over(pair.overlap().iter().map(|&(_, j)| j)).sqrt();
    let eta_refined_sq = est.total_over(pair.refined_coarse());

    let (mut helmholtz_residual, mut split_error) = (None, None);
    if which == Method::Crfem && pair.fine().is_simply_connected()? {
        let p0: Vec<[f64; 2]> = (0..pair.fine().n_elements())
            .map(|j| {
                let g = coarse_on_fine.gradient(j);
                [g[0], g[1]]
            })
            .collect();
        let h = verify_helmholtz(pair.fine_arc(), &p0)?;
        let alpha_minus_u = h.alpha.to_broken()?.sub(&fine)?.energy_sq();
        helmholtz_residual = Some(h.residual);
        split_error = Some((delta_sq - alpha_minus_u - h.norm_curl_beta.powi(2)).abs());
    }

    Ok(AxiomCheck {
        delta: delta_sq.sqrt(),
        a1_lhs: (eta_kept - eta_kept_h).abs(),
        a1_rhs: lambda1 * delta_sq.sqrt(),
        a3_lhs: delta_sq,
        a3_rhs: lambda3 * eta_refined_sq,
        lambda1,
        lambda3,
        energy_coarse: u.to_broken()?.energy_sq(),
        energy_fine: fine.energy_sq(),
        helmholtz_residual,
        split_error,
    })
}
