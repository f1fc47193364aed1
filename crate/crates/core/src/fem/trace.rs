use crate::error::{Error, Result};
use crate::fem::broken::BrokenP1;
use crate::fem::geometry::ElementGeometry;
use crate::mesh::Point;

/// Both sides of the discrete trace identity on `T = conv{E, P}`:
/// the side mean `⨍_E v` and `⨍_T v + (1/n) ⨍_T (x − P)·∇_NC v`.
///
/// `v` lives on a triangulation of `T`; `p` is the vertex id of `P` and
/// `side` the vertex ids of the opposite side `E`.
pub fn trace_identity_check(v: &BrokenP1, p: usize, side: &[usize]) -> Result<(f64, f64)> {
    let mesh = v.mesh();
    let n = mesh.dim();
    if side.len() != n || side.contains(&p) {
        return Err(Error::Geometry(format!(
            "vertex {p} and side {side:?} do not span a simplex"
        )));
    }
    let mut corners: Vec<Point> = vec![mesh.coords()[p]];
    corners.extend(side.iter().map(|&z| mesh.coords()[z]));
    let big = ElementGeometry::new(&corners);
    let total: f64 = (0..mesh.n_elements()).map(|k| mesh.volume(k)).sum();
    if big.volume <= 0.0 || (total - big.volume).abs() > 1e-12 * big.volume {
        return Err(Error::Geometry(
            "the mesh does not triangulate the simplex spanned by the vertex and the side".into(),
        ));
    }
    // |T| = |E| h_P / n
    let side_measure = n as f64 * big.volume / distance_to_side(&big);
    let on_side = |z: usize| big.barycentric(&mesh.coords()[z])[0].abs() <= 1e-12;
    let mut side_integral = 0.0;
    let mut covered = 0.0;
    let mut volume_mean = 0.0;
    let mut moment = 0.0;
    let pt = corners[0];
    for k in 0..mesh.n_elements() {
        let g = ElementGeometry::of(mesh, k);
        let verts = &mesh.simplex(k).vertices;
        for (i, &s) in mesh.element_sides(k).iter().enumerate() {
            if mesh.sides()[s].is_boundary() && (0..=n).filter(|&j| j != i).all(|j| on_side(verts[j])) {
                side_integral += v.side_integral(k, i);
                covered += mesh.side_measure(s);
            }
        }
        volume_mean += v.integral(k);
        let grad = v.gradient_with(k, &g);
        let c = g.centroid();
        moment += g.volume * ((c[0] - pt[0]) * grad[0] + (c[1] - pt[1]) * grad[1] + (c[2] - pt[2]) * grad[2]);
    }
    if (covered - side_measure).abs() > 1e-10 * side_measure {
        return Err(Error::Geometry(format!(
            "side fragments cover {covered} of {side_measure}"
        )));
    }
    let lhs = side_integral / side_measure;
    let rhs = volume_mean / big.volume + moment / (n as f64 * big.volume);
    Ok((lhs, rhs))
}

// height of vertex 0 above the opposite side
fn distance_to_side(g: &ElementGeometry) -> f64 {
    let d = g.grads[0];
    1.0 / (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Exact `‖x − P_j‖²_{L²(T)}` for the `j`-th vertex of a simplex.
pub fn distance_moment_sq(points: &[Point], j: usize) -> f64 {
    let g = ElementGeometry::new(points);
    let n = g.dim as f64;
    let mut s = 0.0;
    for a in 0..points.len() {
        for b in 0..points.len() {
            let u: Vec<f64> = (0..3).map(|d| points[a][d] - points[j][d]).collect();
            let w: Vec<f64> = (0..3).map(|d| points[b][d] - points[j][d]).collect();
            let dot: f64 = u.iter().zip(&w).map(|(x, y)| x * y).sum();
            let delta = if a == b { 1.0 } else { 0.0 };
            s += dot * (1.0 + delta) / ((n + 1.0) * (n + 2.0));
        }
    }
    g.volume * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::presets;
    use std::sync::Arc;

    #[test]
    fn constant_function_gives_the_constant() {
        let m = Arc::new(presets::triangle().unwrap());
        let v = BrokenP1::from_fn(m, |_| 1.7);
        let (l, r) = trace_identity_check(&v, 1, &[0, 2]).unwrap();
        assert!((l - 1.7).abs() < 1e-15 && (r - 1.7).abs() < 1e-15);
    }

    #[test]
    fn first_coordinate_on_unit_triangle() {
        // P at the right angle (vertex 1), E the hypotenuse
        let m = Arc::new(presets::triangle().unwrap());
        let v = BrokenP1::from_fn(m, |p| p[0]);
        let (l, r) = trace_identity_check(&v, 1, &[0, 2]).unwrap();
        assert!((l - 0.5).abs() < 1e-15);
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_opposite_side_rejected() {
        let m = Arc::new(presets::triangle().unwrap());
        let v = BrokenP1::from_fn(m, |p| p[0]);
        assert!(trace_identity_check(&v, 1, &[1, 2]).is_err());
    }

    #[test]
    fn distance_moment_bound() {
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.2, 0.7, 0.0]];
        let g = ElementGeometry::new(&pts);
        let h = crate::mesh::simplex::diameter(&pts);
        for j in 0..3 {
            assert!(distance_moment_sq(&pts, j) <= 0.5 * h * h * g.volume);
        }
    }
}
