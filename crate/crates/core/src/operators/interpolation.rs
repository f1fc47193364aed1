use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{BrokenP1, ElementGeometry, FeFunction, FeSpace, SpaceKind};
use crate::fem::quadrature::gauss_segment;
use crate::mesh::{MeshPair, Point};

fn check_cr_target(target: &FeSpace) -> Result<()> {
    if !target.kind().is_cr() {
        return Err(Error::SpaceMismatch(
            "nonconforming interpolation targets a Crouzeix–Raviart space".into(),
        ));
    }
    if target.mesh().dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: target.mesh().dim(),
            operation: "nonconforming interpolation",
        });
    }
    Ok(())
}

/// Side integrals over the coarse mesh of a piecewise affine function on the
/// fine mesh, summed exactly over side fragments. Across interior coarse sides
/// the two one-sided traces are averaged.
pub fn coarse_side_integrals(pair: &MeshPair, source: &BrokenP1) -> Result<Vec<f64>> {
    let coarse = pair.coarse();
    let fine = pair.fine();
    if source.mesh().n_elements() != fine.n_elements() || source.mesh().simplices() != fine.simplices() {
        return Err(Error::SpaceMismatch(
            "source does not live on the fine mesh of the pair".into(),
        ));
    }
    let n = coarse.dim();
    let mut acc = vec![0.0; coarse.sides().len()];
    let geo: Vec<ElementGeometry> = (0..coarse.n_elements()).map(|k| ElementGeometry::of(coarse, k)).collect();
    for j in 0..fine.n_elements() {
        let k = pair.ancestor(j);
        let verts = &fine.simplex(j).vertices;
        let bary: Vec<[f64; 4]> = verts.iter().map(|&v| geo[k].barycentric(&fine.coords()[v])).collect();
        for i in 0..=n {
            // fine side opposite local vertex i lies on the coarse side opposite m
            for m in 0..=n {
                if (0..=n).filter(|&q| q != i).all(|q| bary[q][m].abs() <= 1e-12) {
                    acc[coarse.element_sides(k)[m]] += source.side_integral(j, i);
                }
            }
        }
    }
    for (s, side) in coarse.sides().iter().enumerate() {
        acc[s] /= side.elements.len() as f64;
    }
    Ok(acc)
}

/// `I_NC` of a piecewise affine function on a refinement: every side mean
/// of the source becomes the midpoint value.
pub fn inc_interpolate(pair: &MeshPair, target: Arc<FeSpace>, source: &BrokenP1) -> Result<FeFunction> {
    check_cr_target(&target)?;
    if !std::ptr::eq(target.mesh(), pair.coarse()) && target.mesh().simplices() != pair.coarse().simplices() {
        return Err(Error::SpaceMismatch("target space is not on the coarse mesh".into()));
    }
    let integrals = coarse_side_integrals(pair, source)?;
    let coarse = pair.coarse();
    let coeffs = (0..target.n_dofs())
        .map(|d| {
            let s = target.entity(d);
            integrals[s] / coarse.side_measure(s)
        })
        .collect();
    FeFunction::new(target, coeffs)
}

/// Convenience form building the pair from the two meshes.
pub fn inc_interpolate_refinement(target: Arc<FeSpace>, source: &BrokenP1) -> Result<FeFunction> {
    let pair = MeshPair::new(target.mesh_arc(), source.mesh_arc())?;
    inc_interpolate(&pair, target, source)
}

/// `I_NC` of a callable, with Gauss–Legendre quadrature on every side.
pub fn inc_interpolate_fn(
    target: Arc<FeSpace>,
    f: impl Fn(&Point) -> f64,
    gauss_points: usize,
) -> Result<FeFunction> {
    check_cr_target(&target)?;
    let rule = gauss_segment(gauss_points);
    let mesh = target.mesh();
    let coeffs = (0..target.n_dofs())
        .map(|d| {
            let v = &mesh.sides()[target.entity(d)].vertices;
            let (a, b) = (mesh.coords()[v[0]], mesh.coords()[v[1]]);
            rule.iter()
                .map(|&(t, w)| w * f(&[a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), 0.0]))
                .sum()
        })
        .collect();
    FeFunction::new(target, coeffs)
}

/// Represents a piecewise affine function on the coarse mesh of the pair
/// exactly on the fine mesh.
pub fn prolongate(pair: &MeshPair, coarse: &BrokenP1) -> Result<BrokenP1> {
    if coarse.mesh().simplices() != pair.coarse().simplices() {
        return Err(Error::SpaceMismatch("function does not live on the coarse mesh of the pair".into()));
    }
    let fine = pair.fine_arc();
    let n = fine.dim();
    let mut values = Vec::with_capacity(fine.n_elements() * (n + 1));
    let mut cached: Option<(usize, ElementGeometry)> = None;
    for j in 0..fine.n_elements() {
        let k = pair.ancestor(j);
        if cached.as_ref().map_or(true, |c| c.0 != k) {
            cached = Some((k, ElementGeometry::of(pair.coarse(), k)));
        }
        let g = &cached.as_ref().expect("set above").1;
        let cv = coarse.element_values(k);
        for &v in &fine.simplex(j).vertices {
            let l = g.barycentric(&fine.coords()[v]);
            values.push((0..=n).map(|i| l[i] * cv[i]).sum());
        }
    }
    BrokenP1::new(fine, values)
}

/// The CR space matching the boundary condition of an S1 space.
pub fn cr_partner(space: &FeSpace) -> Result<Arc<FeSpace>> {
    let kind = match space.kind() {
        SpaceKind::S1Zero => SpaceKind::CrZero,
        SpaceKind::S1Free => SpaceKind::CrFree,
        k => return Err(Error::SpaceMismatch(format!("{k:?} has no Crouzeix–Raviart partner"))),
    };
    Ok(Arc::new(FeSpace::new(space.mesh_arc(), kind)?))
}
