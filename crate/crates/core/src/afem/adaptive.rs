//! The loop solve → estimate → mark → refine.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{check_axioms_with, dorfler_mark, estimate, AxiomCheck, Method};
use crate::error::{Error, Result};
use crate::fem::{solve_poisson, FeSpace, Load};
use crate::mesh::{refine_conforming, MeshPair, Triangulation};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AfemConfig {
    pub theta: f64,
    /// Stop once a mesh has at least this many unknowns.
    pub max_ndof: usize,
    pub max_iterations: usize,
    /// Evaluate both axioms on every consecutive pair.
    pub check_axioms: bool,
    /// Mark every element instead of bulk marking.
    pub uniform: bool,
}

impl Default for AfemConfig {
    fn default() -> Self {
        Self { theta: 0.3, max_ndof: 20_000, max_iterations: 50, check_axioms: true, uniform: false }
    }
}

/// One iteration; the pair columns compare this mesh with the next one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AfemRecord {
    pub iteration: usize,
    pub ndof: usize,
    pub eta: f64,
    pub marked: usize,
    pub theta: f64,
    pub delta: Option<f64>,
    pub a1_lhs: Option<f64>,
    pub a1_rhs: Option<f64>,
    pub a3_lhs: Option<f64>,
    pub a3_rhs: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct AfemHistory {
    pub method: Method,
    pub records: Vec<AfemRecord>,
    /// Full axiom evaluations, one per consecutive pair.
    pub checks: Vec<AxiomCheck>,
    pub final_mesh: Arc<Triangulation>,
}

impl AfemHistory {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::NumericalFailure(e.to_string()))
    }

    /// Least-squares slope of `log η` against `log ndof` over the last
    /// `last` records.
    pub fn rate(&self, last: usize) -> Option<f64> {
        let tail = &self.records[self.records.len().saturating_sub(last)..];
        if tail.len() < 2 {
            return None;
        }
        let pts: Vec<(f64, f64)> = tail.iter().map(|r| ((r.ndof as f64).ln(), r.eta.ln())).collect();
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }

    pub fn axioms_hold(&self, tol: f64) -> bool {
        self.checks.iter().all(|c| c.a1_holds(tol) && c.a3_holds(tol))
    }
}

/// Runs the adaptive loop from `initial` until the unknown count, the
/// iteration cap or a vanishing estimator stops it.
pub fn afem_run(initial: Arc<Triangulation>, f: &Load, which: Method, config: &AfemConfig) -> Result<AfemHistory> {
    if !config.uniform && !(config.theta > 0.0 && config.theta <= 1.0) {
        return Err(Error::Domain(format!("bulk parameter {} outside (0, 1]", config.theta)));
    }
    if config.max_iterations == 0 {
        return Err(Error::Precondition("at least one iteration is needed".into()));
    }
    let mut mesh = initial;
    let mut records: Vec<AfemRecord> = Vec::new();
    let mut checks = Vec::new();
    let mut previous = None;
    for it in 0..config.max_iterations {
        let step = || -> Result<_> {
            let space = Arc::new(FeSpace::new(mesh.clone(), which.space_kind())?);
            let u = solve_poisson(space, f)?;
            let est = estimate(&u, f, which)?;
            Ok((u, est))
        };
        let (u, est) = step().map_err(|e| e.at_iteration(it))?;
        if let Some((coarse, u0, est0)) = previous.take() {
            if config.check_axioms {
                let check = MeshPair::new(coarse, mesh.clone())
                    .and_then(|pair| check_axioms_with(&pair, &u0, &u, &est0, &est, which))
                    .map_err(|e| e.at_iteration(it))?;
                let last: &mut AfemRecord = records.last_mut().expect("previous iteration");
                last.delta = Some(check.delta);
                last.a1_lhs = Some(check.a1_lhs);
                last.a1_rhs = Some(check.a1_rhs);
                last.a3_lhs = Some(check.a3_lhs);
                last.a3_rhs = Some(check.a3_rhs);
                checks.push(check);
            }
        }
        let ndof = u.space().n_dofs();
        let eta = est.eta();
        records.push(AfemRecord {
            iteration: it,
            ndof,
            eta,
            marked: 0,
            theta: if config.uniform { 1.0 } else { config.theta },
            delta: None,
            a1_lhs: None,
            a1_rhs: None,
            a3_lhs: None,
            a3_rhs: None,
        });
        if eta == 0.0 || ndof >= config.max_ndof || it + 1 == config.max_iterations {
            break;
        }
        let marked = if config.uniform {
            (0..mesh.n_elements()).collect()
        } else {
            dorfler_mark(&est.indicators(), config.theta).map_err(|e| e.at_iteration(it))?
        };
        records.last_mut().expect("just pushed").marked = marked.len();
        let next = Arc::new(refine_conforming(&mesh, &marked).map_err(|e| e.at_iteration(it))?);
        previous = Some((mesh, u, est));
        mesh = next;
    }
    Ok(AfemHistory { method: which, records, checks, final_mesh: mesh })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::presets;

    #[test]
    fn zero_load_stops_at_once() {
        let m = Arc::new(presets::unit_square(1).unwrap());
        let h = afem_run(m, &Load::Constant(0.0), Method::Crfem, &AfemConfig::default()).unwrap();
        assert_eq!(h.records.len(), 1);
        assert_eq!(h.records[0].eta, 0.0);
    }

    #[test]
    fn unit_square_cfem_rate() {
        let m = Arc::new(presets::unit_square(1).unwrap());
        let cfg = AfemConfig { max_ndof: 3000, ..AfemConfig::default() };
        let h = afem_run(m, &Load::Constant(1.0), Method::Cfem, &cfg).unwrap();
        // bisecting only boundary edges adds no interior vertex
        assert!(h.records.windows(2).all(|w| w[1].ndof >= w[0].ndof));
        assert!(h.axioms_hold(1e-12));
        let rate = h.rate(5).unwrap();
        assert!((rate + 0.5).abs() <= 0.1, "rate {rate}");
        assert!(h.checks.iter().all(|c| c.energy_fine >= c.energy_coarse * (1.0 - 1e-12)));
        let csv = h.to_csv().unwrap();
        assert!(csv.starts_with("iteration,ndof,eta,marked,theta,delta,a1_lhs,a1_rhs,a3_lhs,a3_rhs"));
        assert_eq!(csv.lines().count(), h.records.len() + 1);
    }

    #[test]
    fn cr_unknowns_grow_strictly() {
        let m = Arc::new(presets::l_shape(1).unwrap());
        let cfg = AfemConfig { max_ndof: 800, ..AfemConfig::default() };
        let h = afem_run(m, &Load::Constant(1.0), Method::Crfem, &cfg).unwrap();
        assert!(h.records.windows(2).all(|w| w[1].ndof > w[0].ndof));
        assert!(h.axioms_hold(1e-12));
        assert!(h.checks.iter().all(|c| c.split_error.unwrap() < 1e-9));
    }

    #[test]
    fn bad_theta_refused() {
        let m = Arc::new(presets::unit_square(1).unwrap());
        let cfg = AfemConfig { theta: 0.0, ..AfemConfig::default() };
        assert!(afem_run(m, &Load::Constant(1.0), Method::Cfem, &cfg).is_err());
    }
}
