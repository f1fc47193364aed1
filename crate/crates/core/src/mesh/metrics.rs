use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::triangulation::Triangulation;

/// Shape quantities of a 2D mesh that feed the constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshMetrics {
    /// Smallest interior angle (radians).
    pub omega0: f64,
    pub h_max: f64,
    /// Largest patch over interior vertices; 0 without interior vertices.
    pub m_int: usize,
    /// Largest patch over boundary vertices.
    pub m_bd: usize,
    /// Largest area ratio of two triangles sharing a side; 1 without interior sides.
    pub c_quot_actual: f64,
    /// Largest `|cos|` of any interior angle.
    pub max_abs_cos: f64,
    /// Minimal width of the domain over all directions.
    pub domain_width: f64,
}

pub fn mesh_metrics(mesh: &Triangulation) -> Result<MeshMetrics> {
    if mesh.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: mesh.dim(),
            operation: "angle-based mesh metrics",
        });
    }
    let mut omega0 = f64::INFINITY;
    let mut max_abs_cos = 0.0_f64;
    for k in 0..mesh.n_elements() {
        for i in 0..3 {
            let a = mesh.angle(k, i);
            omega0 = omega0.min(a);
            max_abs_cos = max_abs_cos.max(a.cos().abs());
        }
    }
    let mut m_int = 0;
    let mut m_bd = 0;
    for z in 0..mesh.n_vertices() {
        let size = mesh.vertex_patch(z).len();
        if mesh.is_boundary_vertex(z) {
            m_bd = m_bd.max(size);
        } else {
            m_int = m_int.max(size);
        }
    }
    let mut c_quot_actual = 1.0_f64;
    for s in mesh.sides().iter().filter(|s| !s.is_boundary()) {
        let (a, b) = (mesh.volume(s.elements[0]), mesh.volume(s.elements[1]));
        c_quot_actual = c_quot_actual.max(a / b).max(b / a);
    }
    Ok(MeshMetrics {
        omega0,
        h_max: mesh.h_max(),
        m_int,
        m_bd,
        c_quot_actual,
        max_abs_cos,
        domain_width: domain_width(mesh),
    })
}

/// Minimal width of the convex hull of the boundary vertices.
pub fn domain_width(mesh: &Triangulation) -> f64 {
    let mut pts: Vec<[f64; 2]> = (0..mesh.n_vertices())
        .filter(|&z| mesh.is_boundary_vertex(z))
        .map(|z| [mesh.coords()[z][0], mesh.coords()[z][1]])
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let hull = convex_hull(&pts);
    let h = hull.len();
    let mut best = f64::INFINITY;
    for i in 0..h {
        let a = hull[i];
        let b = hull[(i + 1) % h];
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = (dx * dx + dy * dy).sqrt();
        if len == 0.0 {
            continue;
        }
        let extent = hull
            .iter()
            .map(|p| ((p[0] - a[0]) * dy - (p[1] - a[1]) * dx).abs() / len)
            .fold(0.0, f64::max);
        best = best.min(extent);
    }
    best
}

/// Andrew's monotone chain on sorted, distinct points.
fn convex_hull(pts: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::presets;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn criss_cross_square() {
        let m = mesh_metrics(&presets::unit_square(4).unwrap()).unwrap();
        assert!((m.omega0 - FRAC_PI_4).abs() < 1e-14);
        assert_eq!(m.m_int, 8);
        assert_eq!(m.m_bd, 4);
        assert_eq!(m.c_quot_actual, 1.0);
        assert!((m.domain_width - 1.0).abs() < 1e-15);
        assert!((m.h_max - 0.25).abs() < 1e-15);
    }

    #[test]
    fn single_triangle_patches() {
        let m = mesh_metrics(&presets::triangle().unwrap()).unwrap();
        assert_eq!(m.m_int, 0);
        assert_eq!(m.m_bd, 1);
        assert!((m.domain_width - 0.5_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn quotient_bound_after_refinement() {
        use crate::mesh::triangulation::refine_conforming;
        let mut mesh = presets::l_shape(1).unwrap();
        for _ in 0..5 {
            mesh = refine_conforming(&mesh, &[0, mesh.n_elements() - 1]).unwrap();
        }
        let m = mesh_metrics(&mesh).unwrap();
        let bound = 2.0 / m.omega0.tan() / m.omega0.sin();
        assert!(m.c_quot_actual <= bound);
        assert!((m.domain_width - 2.0).abs() < 1e-14);
    }
}
