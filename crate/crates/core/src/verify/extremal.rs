//! Exact discrete extremal ratios.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constants::{self, evaluate_constants, ConstantsInput, ConstantsReport};
use crate::error::{Error, Result};
use crate::fem::{ElementGeometry, FeFunction, FeSpace, SpaceKind};
use crate::mesh::{mesh_metrics, simplex, MeshPair, Point, Triangulation};
use crate::numerics::{gen_sym_eigen, DenseSymMatrix};
use crate::operators::{discrete_quasi_interpolate, prolongate, quasi_interpolate, EnrichmentKind, QiSource};
use crate::verify::forms::{maximize, AffineMap};
use crate::verify::{ExtremalResult, MARGIN_TOL};

fn mesh_constants(mesh: &Triangulation) -> Result<ConstantsReport> {
    evaluate_constants(&ConstantsInput::from_metrics(&mesh_metrics(mesh)?))
}

fn vertex_diameter(mesh: &Triangulation) -> f64 {
    let c = mesh.coords();
    let mut h = 0.0_f64;
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            h = h.max(simplex::dist(&c[i], &c[j]));
        }
    }
    h
}

/// `sup ‖v‖²_{L²(K)} / (h_K² ‖∇_NC v‖²)` over mean-zero CR functions on a
/// triangulation of one simplex `K`; certified against `C(n)²`.
pub fn extremal_poincare(mesh: Arc<Triangulation>) -> Result<ExtremalResult> {
    if !mesh.is_connected() {
        return Err(Error::Precondition(
            "disconnected triangulation: the energy kernel has dimension greater than one".into(),
        ));
    }
    let n = mesh.dim();
    let space = FeSpace::new(mesh.clone(), SpaceKind::CrFree)?;
    let map = AffineMap::basis(&space)?;
    let h = vertex_diameter(&mesh);
    let num = map.gram_l2(None, None);
    let den = map.gram_energy(None).scaled(h * h);
    let mean = map.integrals(None);
    let r = maximize(&num, &den, &mean, 1)?;
    let bound = constants::poincare_constant(n)?.powi(2);
    Ok(ExtremalResult::new("discrete-poincare", mesh.label(), r.sup, bound, MARGIN_TOL).with_extremizer(&r))
}

/// Weights `(element, local vertex, weight)` with `J v(z) = Σ weight · v|_T(z)`
/// for the linear enrichers. For `J_QI` the overlap element of smallest id
/// carries the node; on functions whose overlap values agree this is the
/// operator itself.
pub fn enrichment_weights(kind: &EnrichmentKind, mesh: &Triangulation, z: usize) -> Result<Vec<(usize, usize, f64)>> {
    let local = |k: usize| {
        mesh.simplex(k).vertices.iter().position(|&w| w == z).expect("patch element contains its node")
    };
    let patch = mesh.vertex_patch(z);
    let uniform = || patch.iter().map(|&k| (k, local(k), 1.0 / patch.len() as f64)).collect();
    Ok(match kind {
        EnrichmentKind::AverageJ1 => uniform(),
        EnrichmentKind::AngleWeighted => {
            let angles: Vec<f64> = patch.iter().map(|&k| mesh.angle(k, local(k))).collect();
            let total: f64 = angles.iter().sum();
            patch.iter().zip(&angles).map(|(&k, a)| (k, local(k), a / total)).collect()
        }
        EnrichmentKind::QuasiJqi(u) => match patch.iter().filter(|k| u.contains(k)).min() {
            Some(&k) => vec![(k, local(k), 1.0)],
            None => uniform(),
        },
        EnrichmentKind::NodeMax | EnrichmentKind::NodeMin => {
            return Err(Error::Precondition(format!("{} is not linear", kind.name())))
        }
    })
}

/// `sup ‖h^{-1}(v − J v)‖² / ‖∇_NC v‖²` over `CR¹₀`, reported as its
/// square root and certified against `c_apx` (the sharper `c_apx(J1)` for J1).
pub fn extremal_operator_bound(mesh: Arc<Triangulation>, kind: &EnrichmentKind) -> Result<ExtremalResult> {
    if !kind.is_linear() {
        return Err(Error::Precondition(format!(
            "{} is nonlinear; only the convex-hull property is checked for it",
            kind.name()
        )));
    }
    if mesh.dim() != 2 {
        return Err(Error::UnsupportedDimension { dim: mesh.dim(), operation: "enrichment bounds" });
    }
    let cr = FeSpace::new(mesh.clone(), SpaceKind::CrZero)?;
    let s1 = FeSpace::new(mesh.clone(), SpaceKind::S1Zero)?;
    let ncr = cr.n_dofs();
    let cr_map = AffineMap::basis(&cr)?;
    // value of CR basis function `d` at local vertex `i` of element `k`
    let cr_at = |k: usize, i: usize| -> Vec<(usize, f64)> {
        cr.local_dofs(k)
            .iter()
            .enumerate()
            .filter_map(|(l, d)| d.map(|d| (d, if l == i { -1.0 } else { 1.0 })))
            .collect()
    };
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ncr];
    for c in 0..s1.n_dofs() {
        for (k, i, w) in enrichment_weights(kind, &mesh, s1.entity(c))? {
            for (d, val) in cr_at(k, i) {
                rows[d].push((c, w * val));
            }
        }
    }
    let j_map = AffineMap::basis(&s1)?.compose(ncr, &rows);
    let diff = cr_map.sub(&j_map)?;
    let weights: Vec<f64> = (0..mesh.n_elements()).map(|k| mesh.diameter(k).powi(-2)).collect();
    let num = diff.gram_l2(Some(&weights), None);
    let den = cr_map.gram_energy(None);

    let mut constraints = Vec::new();
    let mut n_rows = 0;
    if let EnrichmentKind::QuasiJqi(u) = kind {
        for c in 0..s1.n_dofs() {
            let z = s1.entity(c);
            let mut hits: Vec<usize> = mesh.vertex_patch(z).iter().copied().filter(|k| u.contains(k)).collect();
            hits.sort_unstable();
            let local = |k: usize| mesh.simplex(k).vertices.iter().position(|&w| w == z).expect("in patch");
            for &k in hits.iter().skip(1) {
                let mut row = vec![0.0; ncr];
                for (d, v) in cr_at(hits[0], local(hits[0])) {
                    row[d] += v;
                }
                for (d, v) in cr_at(k, local(k)) {
                    row[d] -= v;
                }
                constraints.extend(row);
                n_rows += 1;
            }
        }
    }
    let r = maximize(&num, &den, &constraints, n_rows)?;
    let consts = mesh_constants(&mesh)?;
    let bound = if *kind == EnrichmentKind::AverageJ1 { consts.c_apx_j1 } else { consts.c_apx };
    let name = format!("enrichment-bound-{}", kind.name());
    Ok(ExtremalResult::new(name, mesh.label(), r.sup.max(0.0).sqrt(), bound, MARGIN_TOL).with_extremizer(&r))
}

/// Largest eigenvalue of (stiffness, mass) on `P1(T)` and its closed form
/// `6(σ + √(σ² − 3))/|T|` with `σ` the sum of the cotangents of the angles.
pub fn p1_inverse_eigenvalue(points: &[Point]) -> Result<(f64, f64)> {
    if points.len() != 3 {
        return Err(Error::UnsupportedDimension { dim: points.len().saturating_sub(1), operation: "inverse estimate" });
    }
    let g = ElementGeometry::new(points);
    if !(g.volume > simplex::degeneracy_threshold(points)) {
        return Err(Error::DegenerateSimplex { index: 0, volume: g.volume });
    }
    let stiff = DenseSymMatrix::from_upper_fn(3, |i, j| g.volume * g.grad_dot(i, j));
    let mass = DenseSymMatrix::from_upper_fn(3, |i, j| g.volume * if i == j { 2.0 } else { 1.0 } / 12.0);
    let eig = gen_sym_eigen(&stiff, &mass)?;
    let lambda = eig.max().expect("order 3").0;
    let angles = simplex::triangle_angles(&points[0], &points[1], &points[2]);
    let cot = angles.map(|a| 1.0 / a.tan());
    let sigma: f64 = cot.iter().sum();
    // cotangents of a triangle satisfy ab + bc + ca = 1, so σ² − 3 is half
    // the sum of squared differences; this avoids cancellation near equilateral
    let disc = 0.5 * ((cot[0] - cot[1]).powi(2) + (cot[1] - cot[2]).powi(2) + (cot[2] - cot[0]).powi(2));
    let formula = 6.0 * (sigma + disc.sqrt()) / g.volume;
    Ok((lambda, formula))
}

/// `h_T · sup ‖∇v‖/‖v‖` over `P1(T)` certified against `c_inv` of the
/// smallest angle of `T`.
pub fn extremal_inverse(points: &[Point]) -> Result<ExtremalResult> {
    let (lambda, _) = p1_inverse_eigenvalue(points)?;
    let angles = simplex::triangle_angles(&points[0], &points[1], &points[2]);
    let omega0 = angles.iter().copied().fold(f64::INFINITY, f64::min);
    let h = simplex::diameter(points);
    let computed = h * lambda.sqrt();
    // relative slack: the bound is attained exactly for right isosceles triangles
    let bound = constants::c_inv(omega0);
    Ok(ExtremalResult::new("inverse-estimate", "single-triangle", computed, bound, MARGIN_TOL * bound.max(1.0)))
}

/// `sup ‖v‖/‖∇_NC v‖` over `CR¹₀` certified against `c_dF`.
pub fn extremal_friedrichs(mesh: Arc<Triangulation>) -> Result<ExtremalResult> {
    let space = FeSpace::new(mesh.clone(), SpaceKind::CrZero)?;
    if space.n_dofs() == 0 {
        return Ok(ExtremalResult::new("discrete-friedrichs", mesh.label(), 0.0, 0.0, MARGIN_TOL));
    }
    let map = AffineMap::basis(&space)?;
    let r = maximize(&map.gram_l2(None, None), &map.gram_energy(None), &[], 0)?;
    let bound = mesh_constants(&mesh)?.c_df;
    Ok(ExtremalResult::new("discrete-friedrichs", mesh.label(), r.sup.sqrt(), bound, MARGIN_TOL).with_extremizer(&r))
}

/// Worst coarse element of `sup ‖ŵ‖²_K / (h_K² ‖∇_NC ŵ‖²_K)` over fine CR
/// functions on `K` whose means on the sides of `K` vanish, which is the
/// range of `1 − I_NC` on `K`. Reported as a square root against `κ_NC`.
pub fn extremal_kappa_nc(pair: &MeshPair) -> Result<ExtremalResult> {
    let coarse = pair.coarse();
    let fine = pair.fine_arc();
    let n = fine.dim();
    let space = FeSpace::new(fine.clone(), SpaceKind::CrFree)?;
    let full = AffineMap::basis(&space)?;
    let mut worst = 0.0_f64;
    let mut best_vec = None;
    for k in 0..coarse.n_elements() {
        let elements = pair.descendants(k);
        let (map, ids) = full.restrict(elements);
        let geo = ElementGeometry::of(coarse, k);
        let mut constraints = vec![0.0; (n + 1) * ids.len()];
        for &j in elements {
            let verts = &fine.simplex(j).vertices;
            let bary: Vec<[f64; 4]> = verts.iter().map(|&v| geo.barycentric(&fine.coords()[v])).collect();
            for (i, &s) in fine.element_sides(j).iter().enumerate() {
                for m in 0..=n {
                    if (0..=n).filter(|&q| q != i).all(|q| bary[q][m].abs() <= 1e-12) {
                        let d = space.dof(s).expect("free space");
                        let col = ids.binary_search(&d).expect("side of a descendant");
                        constraints[m * ids.len() + col] += fine.side_measure(s);
                    }
                }
            }
        }
        let h = coarse.diameter(k);
        let num = map.gram_l2(None, Some(elements));
        let den = map.gram_energy(Some(elements)).scaled(h * h);
        let r = maximize(&num, &den, &constraints, n + 1)?;
        if r.sup > worst || best_vec.is_none() {
            worst = worst.max(r.sup);
            best_vec = Some(r);
        }
    }
    let bound = constants::kappa_nc(n)?;
    let mut result = ExtremalResult::new("nonconforming-interpolation", pair.fine().label(), worst.sqrt(), bound, MARGIN_TOL);
    if let Some(r) = best_vec {
        result = result.with_extremizer(&r);
    }
    Ok(result)
}

/// Which quasi-interpolation is certified on a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QiVariant {
    /// `J1 ∘ I_NC`.
    J1,
    /// `J_QI ∘ I_NC` with the overlap of the pair.
    Discrete,
}

/// `sup ‖h_T^{-1}(v̂ − J v̂)‖ / ‖∇v̂‖` over `S¹₀(T̂)` with the coarse mesh
/// size, against `(κ² + c_apx²)^{1/2}` of the coarse mesh.
pub fn extremal_quasi_interpolation(pair: &MeshPair, variant: QiVariant) -> Result<ExtremalResult> {
    let fine = pair.fine_arc();
    let fine_space = Arc::new(FeSpace::new(fine.clone(), SpaceKind::S1Zero)?);
    let coarse_space = Arc::new(FeSpace::new(pair.coarse_arc(), SpaceKind::S1Zero)?);
    let basis = AffineMap::basis(&fine_space)?;
    let j_map = AffineMap::from_columns(fine.clone(), fine_space.n_dofs(), |c| {
        let mut coeffs = vec![0.0; fine_space.n_dofs()];
        coeffs[c] = 1.0;
        let v = FeFunction::new(fine_space.clone(), coeffs)?;
        let jv = match variant {
            QiVariant::J1 => quasi_interpolate(
                &EnrichmentKind::AverageJ1,
                coarse_space.clone(),
                QiSource::Discrete(pair, &v.to_broken()?),
            )?,
            QiVariant::Discrete => discrete_quasi_interpolate(pair, &v)?,
        };
        prolongate(pair, &jv.to_broken()?)
    })?;
    let diff = basis.sub(&j_map)?;
    let weights: Vec<f64> = (0..fine.n_elements()).map(|j| pair.coarse().diameter(pair.ancestor(j)).powi(-2)).collect();
    let r = maximize(&diff.gram_l2(Some(&weights), None), &basis.gram_energy(None), &[], 0)?;
    let c = mesh_constants(pair.coarse())?;
    let bound = (c.kappa * c.kappa + c.c_apx * c.c_apx).sqrt();
    let name = match variant {
        QiVariant::J1 => "quasi-interpolation-J1",
        QiVariant::Discrete => "quasi-interpolation-dQI",
    };
    Ok(ExtremalResult::new(name, pair.fine().label(), r.sup.max(0.0).sqrt(), bound, MARGIN_TOL).with_extremizer(&r))
}

/// Largest nodal deviation `|J v(z) − v(z)|` of `J1 ∘ I_NC` on an S1 function.
pub fn check_projection(v: &FeFunction) -> Result<f64> {
    let mesh = v.space().mesh_arc();
    let pair = MeshPair::new(mesh.clone(), mesh)?;
    let jv = quasi_interpolate(&EnrichmentKind::AverageJ1, v.space_arc(), QiSource::Discrete(&pair, &v.to_broken()?))?;
    Ok(jv.coeffs().iter().zip(v.coeffs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Largest deviation `|J_dQI v̂(z) − v̂(z)|` over vertices of elements kept
/// by the refinement.
pub fn check_dqi_overlap(pair: &MeshPair, v: &FeFunction) -> Result<f64> {
    let jv = discrete_quasi_interpolate(pair, v)?;
    let mut worst = 0.0_f64;
    for &(k, _) in pair.overlap() {
        for &z in &pair.coarse().simplex(k).vertices {
            worst = worst.max((jv.entity_value(z) - v.entity_value(z)).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{presets, refine_conforming, refine_uniform, GeoSimplex};
    use crate::operators::enrich_broken;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_triangle_mesh(levels: usize) -> Arc<Triangulation> {
        Arc::new(refine_uniform(&presets::triangle().unwrap(), levels).unwrap())
    }

    /// Brute-force Rayleigh quotient over random admissible vectors.
    fn sample_ratio(n: &DenseSymMatrix, d: &DenseSymMatrix, project: impl Fn(&mut Vec<f64>), samples: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut best = 0.0_f64;
        for _ in 0..samples {
            let mut x: Vec<f64> = (0..n.order()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            project(&mut x);
            let den = d.quad_form(&x);
            if den > 1e-14 {
                best = best.max(n.quad_form(&x) / den);
            }
        }
        best
    }

    #[test]
    fn poincare_single_simplex_oracle() {
        // P1 on one triangle: mean-zero space is spanned by λ1 − λ0 and λ2 − λ0
        let mesh = unit_triangle_mesh(0);
        let r = extremal_poincare(mesh.clone()).unwrap();
        assert!(r.passed() && r.computed <= 3.0 / 8.0);
        let space = FeSpace::new(mesh.clone(), SpaceKind::CrFree).unwrap();
        let map = AffineMap::basis(&space).unwrap();
        let h2 = 2.0;
        let num = map.gram_l2(None, None);
        let den = map.gram_energy(None).scaled(h2);
        let mean = map.integrals(None);
        let sampled = sample_ratio(&num, &den, |x| {
            let s: f64 = x.iter().zip(&mean).map(|(a, b)| a * b).sum::<f64>() / mean.iter().map(|m| m * m).sum::<f64>();
            for (xi, m) in x.iter_mut().zip(&mean) {
                *xi -= s * m;
            }
        }, 20000);
        assert!(sampled <= r.computed * (1.0 + 1e-12));
        assert!(sampled >= 0.99 * r.computed);
    }

    #[test]
    fn poincare_bisected_and_scaled() {
        let mesh = unit_triangle_mesh(1);
        let r = extremal_poincare(mesh).unwrap();
        assert!(r.passed() && r.margin > 0.0);
        let base = extremal_poincare(unit_triangle_mesh(3)).unwrap();
        let scaled = presets::simplex_mesh(vec![[7.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 7.0, 0.0]]).unwrap();
        let scaled = extremal_poincare(Arc::new(refine_uniform(&scaled, 3).unwrap())).unwrap();
        assert!((base.computed - scaled.computed).abs() < 1e-12);
    }

    #[test]
    fn weights_agree_with_enrichment() {
        let m = Arc::new(refine_conforming(&presets::unit_square(2).unwrap(), &[1, 6]).unwrap());
        let cr = Arc::new(FeSpace::new(m.clone(), SpaceKind::CrZero).unwrap());
        let s1 = Arc::new(FeSpace::new(m.clone(), SpaceKind::S1Zero).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let v = FeFunction::new(cr.clone(), (0..cr.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let b = v.to_broken().unwrap();
        for kind in [EnrichmentKind::AverageJ1, EnrichmentKind::AngleWeighted] {
            let want = enrich_broken(&kind, &b, s1.clone()).unwrap();
            for d in 0..s1.n_dofs() {
                let z = s1.entity(d);
                let got: f64 = enrichment_weights(&kind, &m, z)
                    .unwrap()
                    .iter()
                    .map(|&(k, i, w)| w * b.element_values(k)[i])
                    .sum();
                assert!((got - want.coeffs()[d]).abs() < 1e-14);
            }
        }
        assert!(enrichment_weights(&EnrichmentKind::NodeMax, &m, 0).is_err());
    }

    #[test]
    fn operator_bound_on_criss_cross() {
        let m = Arc::new(presets::unit_square(2).unwrap());
        let r = extremal_operator_bound(m.clone(), &EnrichmentKind::AverageJ1).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.computed > 0.0);
        let a = extremal_operator_bound(m.clone(), &EnrichmentKind::AngleWeighted).unwrap();
        assert!(a.passed());
        let all: Vec<usize> = (0..m.n_elements()).collect();
        let q = extremal_operator_bound(m.clone(), &EnrichmentKind::QuasiJqi(all)).unwrap();
        assert!(q.passed());
        assert!(extremal_operator_bound(m, &EnrichmentKind::NodeMin).is_err());
    }

    #[test]
    fn inverse_estimate_closed_form() {
        let right = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let (lambda, formula) = p1_inverse_eigenvalue(&right).unwrap();
        assert!((lambda - 18.0 / 0.5).abs() < 1e-12);
        assert!((lambda - formula).abs() < 1e-10 * formula);
        let r = extremal_inverse(&right).unwrap();
        assert!(r.passed() && (r.computed - 72.0_f64.sqrt()).abs() < 1e-12);
        let s = 3.0_f64.sqrt() / 2.0;
        let eq = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, s, 0.0]];
        let (lambda, formula) = p1_inverse_eigenvalue(&eq).unwrap();
        assert!((lambda - 6.0 * 3.0_f64.sqrt() / (s / 2.0)).abs() < 1e-10 * lambda);
        assert!((lambda - formula).abs() < 1e-10 * lambda);
        let big = right.map(|p| p.map(|x| 3.0 * x));
        let (right_lambda, _) = p1_inverse_eigenvalue(&right).unwrap();
        assert!((p1_inverse_eigenvalue(&big).unwrap().0 * 9.0 - right_lambda).abs() < 1e-10 * right_lambda);
    }

    #[test]
    fn random_triangles_match_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut done = 0;
        while done < 100 {
            let p: Vec<Point> = (0..3).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0]).collect();
            if GeoSimplex::new(p.clone(), 0).is_err() || simplex::volume(&p) < 1e-3 {
                continue;
            }
            let (lambda, formula) = p1_inverse_eigenvalue(&p).unwrap();
            assert!((lambda - formula).abs() <= 1e-10 * formula, "{lambda} {formula}");
            assert!(extremal_inverse(&p).unwrap().passed());
            done += 1;
        }
    }

    #[test]
    fn friedrichs_small_meshes() {
        let one = Arc::new(presets::triangle().unwrap());
        let r = extremal_friedrichs(one).unwrap();
        assert_eq!(r.computed, 0.0);
        assert!(r.passed());
        let sq = Arc::new(presets::unit_square(2).unwrap());
        let r = extremal_friedrichs(sq).unwrap();
        assert!(r.passed() && r.computed > 0.0 && r.computed < 1.0 / (2.0_f64.sqrt() * std::f64::consts::PI) * 1.5);
    }

    #[test]
    fn kappa_nc_on_pairs() {
        let m = Arc::new(presets::unit_square(1).unwrap());
        let f = Arc::new(refine_uniform(&m, 2).unwrap());
        let pair = MeshPair::new(m.clone(), f).unwrap();
        let r = extremal_kappa_nc(&pair).unwrap();
        assert!(r.passed() && r.computed > 0.0, "{r:?}");
        let same = MeshPair::new(m.clone(), m).unwrap();
        assert_eq!(extremal_kappa_nc(&same).unwrap().computed, 0.0);
    }

    #[test]
    fn quasi_interpolation_pairs() {
        let m = Arc::new(presets::unit_square(2).unwrap());
        let f = Arc::new(refine_conforming(&m, &[0, 1, 2, 9]).unwrap());
        let pair = MeshPair::new(m.clone(), f.clone()).unwrap();
        for variant in [QiVariant::J1, QiVariant::Discrete] {
            let r = extremal_quasi_interpolation(&pair, variant).unwrap();
            assert!(r.passed(), "{r:?}");
        }
        // identity pair: J_dQI reproduces every fine function
        let same = MeshPair::new(m.clone(), m.clone()).unwrap();
        let r = extremal_quasi_interpolation(&same, QiVariant::Discrete).unwrap();
        assert!(r.computed < 1e-7, "{}", r.computed);
        let s1 = Arc::new(FeSpace::new(f.clone(), SpaceKind::S1Zero).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = FeFunction::new(s1.clone(), (0..s1.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        assert!(check_dqi_overlap(&pair, &v).unwrap() < 1e-13);
        assert!(check_projection(&v).unwrap() < 1e-14);
    }
}
