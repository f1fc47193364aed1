use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::broken::BrokenP1;
use crate::mesh::Triangulation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceKind {
    /// Conforming P1 vanishing on the Dirichlet boundary.
    S1Zero,
    S1Free,
    /// Crouzeix–Raviart vanishing at Dirichlet side midpoints.
    CrZero,
    CrFree,
    P0Scalar,
    P0Vector,
}

impl SpaceKind {
    pub fn is_conforming(self) -> bool {
        matches!(self, SpaceKind::S1Zero | SpaceKind::S1Free)
    }

    pub fn is_cr(self) -> bool {
        matches!(self, SpaceKind::CrZero | SpaceKind::CrFree)
    }

    pub fn is_p0(self) -> bool {
        matches!(self, SpaceKind::P0Scalar | SpaceKind::P0Vector)
    }
}

/// Degrees of freedom of one of the spaces over a mesh.
///
/// S1 dofs sit on vertices, CR dofs on sides, P0 dofs on elements (one per
/// component for the vector variant). Constrained entities get no dof.
#[derive(Debug, Clone)]
pub struct FeSpace {
    kind: SpaceKind,
    mesh: Arc<Triangulation>,
    dof_of: Vec<Option<usize>>,
    entity_of: Vec<usize>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Triangulation>, kind: SpaceKind) -> Result<Self> {
        if mesh.dim() != 2 && !matches!(kind, SpaceKind::CrFree | SpaceKind::S1Free | SpaceKind::P0Scalar) {
            return Err(Error::UnsupportedDimension {
                dim: mesh.dim(),
                operation: "boundary-constrained or vector finite element spaces",
            });
        }
        let free: Vec<bool> = match kind {
            SpaceKind::S1Zero => (0..mesh.n_vertices()).map(|z| !mesh.is_dirichlet_vertex(z)).collect(),
            SpaceKind::S1Free => vec![true; mesh.n_vertices()],
            SpaceKind::CrZero => mesh.sides().iter().map(|s| !s.dirichlet).collect(),
            SpaceKind::CrFree => vec![true; mesh.sides().len()],
            SpaceKind::P0Scalar => vec![true; mesh.n_elements()],
            SpaceKind::P0Vector => vec![true; mesh.n_elements() * mesh.dim()],
        };
        let mut dof_of = Vec::with_capacity(free.len());
        let mut entity_of = Vec::new();
        for (e, f) in free.into_iter().enumerate() {
            if f {
                dof_of.push(Some(entity_of.len()));
                entity_of.push(e);
            } else {
                dof_of.push(None);
            }
        }
        Ok(Self {
            kind,
            mesh,
            dof_of,
            entity_of,
        })
    }

    #[inline]
    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    #[inline]
    pub fn mesh(&self) -> &Triangulation {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> Arc<Triangulation> {
        Arc::clone(&self.mesh)
    }

    #[inline]
    pub fn n_dofs(&self) -> usize {
        self.entity_of.len()
    }

    /// Dof of a vertex (S1), side (CR) or element component (P0).
    #[inline]
    pub fn dof(&self, entity: usize) -> Option<usize> {
        self.dof_of[entity]
    }

    #[inline]
    pub fn entity(&self, dof: usize) -> usize {
        self.entity_of[dof]
    }

    /// Dofs of element `k` in local order: vertex `i` for S1, side opposite
    /// vertex `i` for CR.
    pub fn local_dofs(&self, k: usize) -> Vec<Option<usize>> {
        let s = self.mesh.simplex(k);
        match self.kind {
            SpaceKind::S1Zero | SpaceKind::S1Free => s.vertices.iter().map(|&v| self.dof_of[v]).collect(),
            SpaceKind::CrZero | SpaceKind::CrFree => {
                self.mesh.element_sides(k).iter().map(|&e| self.dof_of[e]).collect()
            }
            SpaceKind::P0Scalar => vec![self.dof_of[k]],
            SpaceKind::P0Vector => (0..self.mesh.dim()).map(|c| self.dof_of[k * self.mesh.dim() + c]).collect(),
        }
    }

    pub fn same_as(&self, other: &FeSpace) -> bool {
        self.kind == other.kind && Arc::ptr_eq(&self.mesh, &other.mesh)
    }
}

/// Coefficients over a space.
#[derive(Debug, Clone)]
pub struct FeFunction {
    space: Arc<FeSpace>,
    coeffs: Vec<f64>,
}

impl FeFunction {
    pub fn new(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.n_dofs() {
            return Err(Error::SpaceMismatch(format!(
                "{} coefficients for {} dofs",
                coeffs.len(),
                space.n_dofs()
            )));
        }
        Ok(Self { space, coeffs })
    }

    pub fn zeros(space: Arc<FeSpace>) -> Self {
        let n = space.n_dofs();
        Self {
            space,
            coeffs: vec![0.0; n],
        }
    }

    pub fn space(&self) -> &FeSpace {
        &self.space
    }

    pub fn space_arc(&self) -> Arc<FeSpace> {
        Arc::clone(&self.space)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Value attached to an entity (zero for constrained entities).
    pub fn entity_value(&self, entity: usize) -> f64 {
        self.space.dof(entity).map_or(0.0, |d| self.coeffs[d])
    }

    /// Element-wise vertex values. P0 scalars become constants; P0 vectors
    /// have no scalar representation.
    pub fn to_broken(&self) -> Result<BrokenP1> {
        let mesh = self.space.mesh_arc();
        let n = mesh.dim();
        let mut values = Vec::with_capacity(mesh.n_elements() * (n + 1));
        for k in 0..mesh.n_elements() {
            match self.space.kind() {
                SpaceKind::S1Zero | SpaceKind::S1Free => {
                    for &v in &mesh.simplex(k).vertices {
                        values.push(self.entity_value(v));
                    }
                }
                SpaceKind::CrZero | SpaceKind::CrFree => {
                    let c: Vec<f64> = mesh.element_sides(k).iter().map(|&e| self.entity_value(e)).collect();
                    let sum: f64 = c.iter().sum();
                    for ci in &c {
                        values.push(sum - n as f64 * ci);
                    }
                }
                SpaceKind::P0Scalar => {
                    let c = self.coeffs[k];
                    values.extend(std::iter::repeat(c).take(n + 1));
                }
                SpaceKind::P0Vector => {
                    return Err(Error::SpaceMismatch(
                        "a P0 vector field has no scalar piecewise-affine form".into(),
                    ))
                }
            }
        }
        BrokenP1::new(mesh, values)
    }

    pub fn axpy(&mut self, alpha: f64, other: &FeFunction) -> Result<()> {
        if !self.space.same_as(&other.space) {
            return Err(Error::SpaceMismatch("functions live in different spaces".into()));
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scaled(&self, alpha: f64) -> FeFunction {
        FeFunction {
            space: Arc::clone(&self.space),
            coeffs: self.coeffs.iter().map(|c| alpha * c).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::presets;

    #[test]
    fn dof_counts() {
        let m = Arc::new(presets::unit_square(2).unwrap());
        let count = |k| FeSpace::new(m.clone(), k).unwrap().n_dofs();
        assert_eq!(count(SpaceKind::S1Free), 13);
        assert_eq!(count(SpaceKind::S1Zero), 5);
        let sides = m.sides().len();
        assert_eq!(count(SpaceKind::CrFree), sides);
        assert_eq!(count(SpaceKind::CrZero), sides - 8);
        assert_eq!(count(SpaceKind::P0Vector), 32);
    }

    #[test]
    fn cr_vertex_values() {
        let m = Arc::new(presets::triangle().unwrap());
        let s = Arc::new(FeSpace::new(m.clone(), SpaceKind::CrFree).unwrap());
        // coefficient 1 on the side opposite local vertex 0 only
        let mut c = vec![0.0; 3];
        c[s.dof(m.element_sides(0)[0]).unwrap()] = 1.0;
        let b = FeFunction::new(s, c).unwrap().to_broken().unwrap();
        assert_eq!(b.element_values(0), &[-1.0, 1.0, 1.0]);
    }

    #[test]
    fn wrong_length_rejected() {
        let m = Arc::new(presets::triangle().unwrap());
        let s = Arc::new(FeSpace::new(m, SpaceKind::CrFree).unwrap());
        assert!(FeFunction::new(s, vec![0.0; 2]).is_err());
    }
}
