use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{BrokenP1, FeFunction, FeSpace};
use crate::mesh::MeshPair;
use crate::operators::interpolation::{cr_partner, inc_interpolate, inc_interpolate_fn};
use crate::mesh::Point;

/// Nodal rules turning one-sided vertex values into a conforming function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EnrichmentKind {
    /// Arithmetic mean over the patch.
    AverageJ1,
    /// Mean weighted by the interior angles at the node.
    AngleWeighted,
    NodeMax,
    NodeMin,
    /// The value of an overlap element where one touches the node, `J1` elsewhere.
    QuasiJqi(Vec<usize>),
}

impl EnrichmentKind {
    pub fn is_linear(&self) -> bool {
        !matches!(self, EnrichmentKind::NodeMax | EnrichmentKind::NodeMin)
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnrichmentKind::AverageJ1 => "J1",
            EnrichmentKind::AngleWeighted => "angle-weighted",
            EnrichmentKind::NodeMax => "node-max",
            EnrichmentKind::NodeMin => "node-min",
            EnrichmentKind::QuasiJqi(_) => "J_QI",
        }
    }
}

/// One-sided values `v|_T(z)` and angles `∠(T, z)` over the patch of `z`.
pub fn patch_values(v: &BrokenP1, z: usize) -> Vec<(usize, f64, f64)> {
    let mesh = v.mesh();
    mesh.vertex_patch(z)
        .iter()
        .map(|&k| {
            let i = mesh.simplex(k).vertices.iter().position(|&w| w == z).expect("patch element contains its node");
            (k, v.element_values(k)[i], mesh.angle(k, i))
        })
        .collect()
}

/// Applies a nodal rule to any piecewise affine `v` on the target's mesh.
pub fn enrich_broken(kind: &EnrichmentKind, v: &BrokenP1, target: Arc<FeSpace>) -> Result<FeFunction> {
    if !target.kind().is_conforming() {
        return Err(Error::SpaceMismatch("enrichment targets an S1 space".into()));
    }
    if v.mesh().dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: v.mesh().dim(),
            operation: "enrichment",
        });
    }
    if v.mesh().simplices() != target.mesh().simplices() {
        return Err(Error::SpaceMismatch("function and target live on different meshes".into()));
    }
    let overlap: Option<Vec<bool>> = match kind {
        EnrichmentKind::QuasiJqi(u) => {
            let mut mask = vec![false; target.mesh().n_elements()];
            for &k in u {
                if k >= mask.len() {
                    return Err(Error::Precondition(format!("overlap element {k} out of range")));
                }
                mask[k] = true;
            }
            Some(mask)
        }
        _ => None,
    };
    let mut coeffs = Vec::with_capacity(target.n_dofs());
    for d in 0..target.n_dofs() {
        let z = target.entity(d);
        let vals = patch_values(v, z);
        let mean = vals.iter().map(|x| x.1).sum::<f64>() / vals.len() as f64;
        let value = match kind {
            EnrichmentKind::AverageJ1 => mean,
            EnrichmentKind::AngleWeighted => {
                let total: f64 = vals.iter().map(|x| x.2).sum();
                vals.iter().map(|x| x.2 * x.1).sum::<f64>() / total
            }
            EnrichmentKind::NodeMax => vals.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max),
            EnrichmentKind::NodeMin => vals.iter().map(|x| x.1).fold(f64::INFINITY, f64::min),
            EnrichmentKind::QuasiJqi(_) => {
                let mask = overlap.as_ref().expect("mask built above");
                let hits: Vec<f64> = vals.iter().filter(|x| mask[x.0]).map(|x| x.1).collect();
                match hits.first() {
                    None => mean,
                    Some(&first) => {
                        let scale = hits.iter().fold(1.0_f64, |m, h| m.max(h.abs()));
                        if hits.iter().any(|h| (h - first).abs() > 1e-10 * scale) {
                            return Err(Error::Precondition(format!(
                                "overlap elements disagree at node {z}: values {hits:?}"
                            )));
                        }
                        first
                    }
                }
            }
        };
        coeffs.push(value);
    }
    FeFunction::new(target, coeffs)
}

/// Enrichment of a Crouzeix–Raviart function.
pub fn enrich(kind: &EnrichmentKind, v: &FeFunction, target: Arc<FeSpace>) -> Result<FeFunction> {
    if !v.space().kind().is_cr() {
        return Err(Error::SpaceMismatch("enrichment expects a Crouzeix–Raviart function".into()));
    }
    enrich_broken(kind, &v.to_broken()?, target)
}

/// Input of the quasi-interpolation `J = J_C ∘ I_NC`.
pub enum QiSource<'a> {
    Callable(&'a dyn Fn(&Point) -> f64),
    /// A piecewise affine function on the fine mesh of the pair.
    Discrete(&'a MeshPair, &'a BrokenP1),
}

pub fn quasi_interpolate(kind: &EnrichmentKind, target: Arc<FeSpace>, source: QiSource<'_>) -> Result<FeFunction> {
    let cr = cr_partner(&target)?;
    let inc = match source {
        QiSource::Callable(f) => inc_interpolate_fn(cr, f, 3)?,
        QiSource::Discrete(pair, v) => inc_interpolate(pair, cr, v)?,
    };
    enrich(kind, &inc, target)
}

/// `J_dQI = J_QI ∘ I_NC` with the overlap of the pair as `U`; maps fine S1
/// functions to coarse S1 functions with the same boundary condition.
pub fn discrete_quasi_interpolate(pair: &MeshPair, v: &FeFunction) -> Result<FeFunction> {
    if !v.space().kind().is_conforming() {
        return Err(Error::SpaceMismatch("discrete quasi-interpolation expects an S1 function".into()));
    }
    let target = Arc::new(FeSpace::new(pair.coarse_arc(), v.space().kind())?);
    let overlap = pair.overlap().iter().map(|&(k, _)| k).collect();
    quasi_interpolate(
        &EnrichmentKind::QuasiJqi(overlap),
        target,
        QiSource::Discrete(pair, &v.to_broken()?),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{interpolate_s1, SpaceKind};
    use crate::mesh::{presets, refine_conforming, TaggedSimplex, Triangulation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cr(space: Arc<FeSpace>, seed: u64) -> FeFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = (0..space.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        FeFunction::new(space, c).unwrap()
    }

    #[test]
    fn two_element_patch_rules() {
        // node 0 is shared by two triangles; give them one-sided values 1 and 3
        let coords = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]];
        let mesh = Arc::new(
            Triangulation::new(
                2,
                coords,
                vec![TaggedSimplex::new(vec![1, 0, 2], 0, 0), TaggedSimplex::new(vec![2, 0, 3], 0, 0)],
                Some(&[]),
            )
            .unwrap(),
        );
        let v = BrokenP1::new(mesh.clone(), vec![0.0, 1.0, 0.0, 0.0, 3.0, 0.0]).unwrap();
        let s1 = Arc::new(FeSpace::new(mesh, SpaceKind::S1Free).unwrap());
        let at0 = |k: EnrichmentKind| enrich_broken(&k, &v, s1.clone()).unwrap().entity_value(0);
        assert_eq!(at0(EnrichmentKind::AverageJ1), 2.0);
        assert_eq!(at0(EnrichmentKind::NodeMax), 3.0);
        assert_eq!(at0(EnrichmentKind::NodeMin), 1.0);
        assert!((at0(EnrichmentKind::AngleWeighted) - 2.0).abs() < 1e-15);
        assert_eq!(at0(EnrichmentKind::QuasiJqi(vec![1])), 3.0);
    }

    #[test]
    fn angle_weighted_matches_direct_sum() {
        let m = Arc::new(refine_conforming(&presets::unit_square(2).unwrap(), &[0, 5, 9]).unwrap());
        let cr = Arc::new(FeSpace::new(m.clone(), SpaceKind::CrZero).unwrap());
        let s1 = Arc::new(FeSpace::new(m.clone(), SpaceKind::S1Zero).unwrap());
        let v = random_cr(cr, 4);
        let out = enrich(&EnrichmentKind::AngleWeighted, &v, s1.clone()).unwrap();
        let b = v.to_broken().unwrap();
        for d in 0..s1.n_dofs() {
            let z = s1.entity(d);
            let mut sum = 0.0;
            for &k in m.vertex_patch(z) {
                let i = m.simplex(k).vertices.iter().position(|&w| w == z).unwrap();
                sum += m.angle(k, i) * b.element_values(k)[i];
            }
            assert!((out.coeffs()[d] - sum / (2.0 * std::f64::consts::PI)).abs() < 1e-13);
        }
    }

    #[test]
    fn s1_functions_are_reproduced() {
        let m = Arc::new(presets::l_shape(1).unwrap());
        let s1 = Arc::new(FeSpace::new(m.clone(), SpaceKind::S1Zero).unwrap());
        let v = interpolate_s1(s1.clone(), |p| (1.0 - p[0] * p[0]) * (1.0 - p[1] * p[1])).unwrap();
        let pair = MeshPair::new(m.clone(), m.clone()).unwrap();
        for kind in [EnrichmentKind::AverageJ1, EnrichmentKind::AngleWeighted, EnrichmentKind::NodeMax] {
            let out = quasi_interpolate(&kind, s1.clone(), QiSource::Discrete(&pair, &v.to_broken().unwrap())).unwrap();
            for (a, b) in out.coeffs().iter().zip(v.coeffs()) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dqi_is_identity_without_refinement_and_exact_on_overlap() {
        let m = Arc::new(presets::unit_square(2).unwrap());
        let fmesh = Arc::new(refine_conforming(&m, &[0, 1, 2]).unwrap());
        let fine = Arc::new(FeSpace::new(fmesh.clone(), SpaceKind::S1Zero).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = FeFunction::new(fine.clone(), (0..fine.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let pair = MeshPair::new(m.clone(), fmesh.clone()).unwrap();
        let out = discrete_quasi_interpolate(&pair, &v).unwrap();
        for &(k, _) in pair.overlap() {
            for &z in &m.simplex(k).vertices {
                assert!((out.entity_value(z) - v.entity_value(z)).abs() < 1e-14);
            }
        }
        let same = MeshPair::new(fmesh.clone(), fmesh.clone()).unwrap();
        let id = discrete_quasi_interpolate(&same, &v).unwrap();
        for (a, b) in id.coeffs().iter().zip(v.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn inconsistent_overlap_reported() {
        let m = Arc::new(presets::unit_square(1).unwrap());
        let cr = Arc::new(FeSpace::new(m.clone(), SpaceKind::CrFree).unwrap());
        let s1 = Arc::new(FeSpace::new(m.clone(), SpaceKind::S1Free).unwrap());
        let v = random_cr(cr, 1);
        let all: Vec<usize> = (0..m.n_elements()).collect();
        let err = enrich(&EnrichmentKind::QuasiJqi(all), &v, s1).unwrap_err();
        assert!(matches!(err, Error::Precondition(ref s) if s.contains("node")));
    }

    #[test]
    fn convex_hull_and_linearity() {
        let m = Arc::new(refine_conforming(&presets::l_shape(2).unwrap(), &[3, 7, 20]).unwrap());
        let cr = Arc::new(FeSpace::new(m.clone(), SpaceKind::CrZero).unwrap());
        let s1 = Arc::new(FeSpace::new(m.clone(), SpaceKind::S1Zero).unwrap());
        let u = random_cr(cr.clone(), 11);
        let w = random_cr(cr.clone(), 12);
        let kinds = [
            EnrichmentKind::AverageJ1,
            EnrichmentKind::AngleWeighted,
            EnrichmentKind::NodeMax,
            EnrichmentKind::NodeMin,
        ];
        let bu = u.to_broken().unwrap();
        for kind in &kinds {
            let out = enrich(kind, &u, s1.clone()).unwrap();
            for d in 0..s1.n_dofs() {
                let vals = patch_values(&bu, s1.entity(d));
                let lo = vals.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
                let hi = vals.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
                assert!(lo - 1e-14 <= out.coeffs()[d] && out.coeffs()[d] <= hi + 1e-14);
            }
            if kind.is_linear() {
                let mut comb = u.scaled(2.0);
                comb.axpy(-0.5, &w).unwrap();
                let lhs = enrich(kind, &comb, s1.clone()).unwrap();
                let mut rhs = out.scaled(2.0);
                rhs.axpy(-0.5, &enrich(kind, &w, s1.clone()).unwrap()).unwrap();
                for (a, b) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }
}
