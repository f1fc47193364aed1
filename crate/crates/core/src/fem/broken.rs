use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::geometry::ElementGeometry;
use crate::mesh::{Point, Triangulation};

/// A piecewise affine function, possibly discontinuous, stored by its
/// vertex values on every element. Conforming P1 and Crouzeix–Raviart
/// functions, and coarse functions seen on a finer mesh, all have this form.
#[derive(Debug, Clone)]
pub struct BrokenP1 {
    mesh: Arc<Triangulation>,
    values: Vec<f64>,
}

impl BrokenP1 {
    pub fn new(mesh: Arc<Triangulation>, values: Vec<f64>) -> Result<Self> {
        let expected = mesh.n_elements() * (mesh.dim() + 1);
        if values.len() != expected {
            return Err(Error::SpaceMismatch(format!(
                "{} vertex values for {expected} element corners",
                values.len()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: Arc<Triangulation>) -> Self {
        let n = mesh.n_elements() * (mesh.dim() + 1);
        Self {
            mesh,
            values: vec![0.0; n],
        }
    }

    /// Elementwise nodal interpolation of `f`.
    pub fn from_fn(mesh: Arc<Triangulation>, f: impl Fn(&Point) -> f64) -> Self {
        let mut values = Vec::with_capacity(mesh.n_elements() * (mesh.dim() + 1));
        for s in mesh.simplices() {
            for &v in &s.vertices {
                values.push(f(&mesh.coords()[v]));
            }
        }
        Self { mesh, values }
    }

    #[inline]
    pub fn mesh(&self) -> &Triangulation {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> Arc<Triangulation> {
        Arc::clone(&self.mesh)
    }

    #[inline]
    fn stride(&self) -> usize {
        self.mesh.dim() + 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn element_values(&self, k: usize) -> &[f64] {
        let s = self.stride();
        &self.values[k * s..(k + 1) * s]
    }

    #[inline]
    pub fn element_values_mut(&mut self, k: usize) -> &mut [f64] {
        let s = self.stride();
        &mut self.values[k * s..(k + 1) * s]
    }

    pub fn gradient_with(&self, k: usize, g: &ElementGeometry) -> [f64; 3] {
        let mut grad = [0.0; 3];
        for (i, v) in self.element_values(k).iter().enumerate() {
            for d in 0..3 {
                grad[d] += v * g.grads[i][d];
            }
        }
        grad
    }

    /// Constant gradient on element `k`.
    pub fn gradient(&self, k: usize) -> [f64; 3] {
        self.gradient_with(k, &ElementGeometry::of(&self.mesh, k))
    }

    pub fn gradients(&self) -> Vec<[f64; 3]> {
        (0..self.mesh.n_elements()).map(|k| self.gradient(k)).collect()
    }

    pub fn value_at(&self, k: usize, x: &Point) -> f64 {
        let g = ElementGeometry::of(&self.mesh, k);
        let l = g.barycentric(x);
        self.element_values(k).iter().zip(l).map(|(v, li)| v * li).sum()
    }

    pub fn integral(&self, k: usize) -> f64 {
        let v = self.element_values(k);
        self.mesh.volume(k) * v.iter().sum::<f64>() / v.len() as f64
    }

    /// Exact `∫_K u v` for two broken functions on the same mesh.
    pub fn element_inner(&self, other: &BrokenP1, k: usize, volume: f64) -> f64 {
        let (u, v) = (self.element_values(k), other.element_values(k));
        let n = self.mesh.dim() as f64;
        let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
        let su: f64 = u.iter().sum();
        let sv: f64 = v.iter().sum();
        volume * (dot + su * sv) / ((n + 1.0) * (n + 2.0))
    }

    pub fn l2_sq_element(&self, k: usize) -> f64 {
        self.element_inner(self, k, self.mesh.volume(k))
    }

    pub fn l2_sq(&self) -> f64 {
        (0..self.mesh.n_elements()).map(|k| self.l2_sq_element(k)).sum()
    }

    pub fn inner(&self, other: &BrokenP1) -> Result<f64> {
        self.check_same_mesh(other)?;
        Ok((0..self.mesh.n_elements())
            .map(|k| self.element_inner(other, k, self.mesh.volume(k)))
            .sum())
    }

    pub fn energy_sq_element(&self, k: usize) -> f64 {
        let g = ElementGeometry::of(&self.mesh, k);
        let d = self.gradient_with(k, &g);
        g.volume * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
    }

    /// Broken `H¹` seminorm squared, `‖∇_NC v‖²`.
    pub fn energy_sq(&self) -> f64 {
        (0..self.mesh.n_elements()).map(|k| self.energy_sq_element(k)).sum()
    }

    pub fn energy_inner(&self, other: &BrokenP1) -> Result<f64> {
        self.check_same_mesh(other)?;
        Ok((0..self.mesh.n_elements())
            .map(|k| {
                let g = ElementGeometry::of(&self.mesh, k);
                let a = self.gradient_with(k, &g);
                let b = other.gradient_with(k, &g);
                g.volume * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
            })
            .sum())
    }

    fn check_same_mesh(&self, other: &BrokenP1) -> Result<()> {
        if Arc::ptr_eq(&self.mesh, &other.mesh) || self.values.len() == other.values.len() && self.mesh.simplices() == other.mesh.simplices() {
            Ok(())
        } else {
            Err(Error::SpaceMismatch("broken functions on different meshes".into()))
        }
    }

    pub fn sub(&self, other: &BrokenP1) -> Result<BrokenP1> {
        self.check_same_mesh(other)?;
        Ok(BrokenP1 {
            mesh: Arc::clone(&self.mesh),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &BrokenP1) -> Result<BrokenP1> {
        self.check_same_mesh(other)?;
        Ok(BrokenP1 {
            mesh: Arc::clone(&self.mesh),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scaled(&self, alpha: f64) -> BrokenP1 {
        BrokenP1 {
            mesh: Arc::clone(&self.mesh),
            values: self.values.iter().map(|a| alpha * a).collect(),
        }
    }

    /// `∫_E v` over the local side of element `k` opposite vertex `i`.
    pub fn side_integral(&self, k: usize, i: usize) -> f64 {
        let v = self.element_values(k);
        let others: Vec<f64> = (0..v.len()).filter(|&j| j != i).map(|j| v[j]).collect();
        let side = self.mesh.element_sides(k)[i];
        self.mesh.side_measure(side) * others.iter().sum::<f64>() / others.len() as f64
    }

    /// Mean over a union of elements.
    pub fn integral_mean(&self, region: &[usize]) -> Result<f64> {
        let vol: f64 = region.iter().map(|&k| self.mesh.volume(k)).sum();
        if region.is_empty() || vol <= 0.0 {
            return Err(Error::EmptyRegion);
        }
        Ok(region.iter().map(|&k| self.integral(k)).sum::<f64>() / vol)
    }

    /// Element means, i.e. the `L²` projection onto piecewise constants.
    pub fn p0_project(&self) -> Vec<f64> {
        (0..self.mesh.n_elements())
            .map(|k| {
                let v = self.element_values(k);
                v.iter().sum::<f64>() / v.len() as f64
            })
            .collect()
    }
}
