//! Linear maps from coefficient vectors to piecewise affine functions and
//! the quadratic forms they induce.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{BrokenP1, ElementGeometry, FeSpace};
use crate::mesh::Triangulation;
use crate::numerics::{dense::null_space_basis, gen_sym_eigen, DenseSymMatrix};

/// Column `c` of the map restricted to element `k` is the list entry
/// `(c, vertex values)` in `per_element[k]`.
#[derive(Debug, Clone)]
pub struct AffineMap {
    mesh: Arc<Triangulation>,
    cols: usize,
    per_element: Vec<Vec<(usize, [f64; 4])>>,
}

impl AffineMap {
    pub fn zeros(mesh: Arc<Triangulation>, cols: usize) -> Self {
        let n = mesh.n_elements();
        Self {
            mesh,
            cols,
            per_element: vec![Vec::new(); n],
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mesh(&self) -> &Triangulation {
        &self.mesh
    }

    pub fn element(&self, k: usize) -> &[(usize, [f64; 4])] {
        &self.per_element[k]
    }

    /// The basis of a CR or S1 space, one column per dof.
    pub fn basis(space: &FeSpace) -> Result<Self> {
        let kind = space.kind();
        let mesh = space.mesh_arc();
        let n = mesh.dim();
        let mut map = Self::zeros(mesh.clone(), space.n_dofs());
        for k in 0..mesh.n_elements() {
            let dofs = space.local_dofs(k);
            for (i, d) in dofs.iter().enumerate() {
                let Some(d) = *d else { continue };
                let mut vals = [0.0; 4];
                for (j, v) in vals.iter_mut().enumerate().take(n + 1) {
                    *v = if kind.is_cr() {
                        1.0 - if i == j { n as f64 } else { 0.0 }
                    } else if kind.is_conforming() {
                        if i == j { 1.0 } else { 0.0 }
                    } else {
                        return Err(Error::SpaceMismatch("basis maps need a CR or S1 space".into()));
                    };
                }
                map.per_element[k].push((d, vals));
            }
        }
        map.normalize();
        Ok(map)
    }

    /// Builds the map column by column from a linear operator.
    pub fn from_columns(mesh: Arc<Triangulation>, cols: usize, mut column: impl FnMut(usize) -> Result<BrokenP1>) -> Result<Self> {
        let n = mesh.dim();
        let mut map = Self::zeros(mesh.clone(), cols);
        for c in 0..cols {
            let f = column(c)?;
            if f.mesh().n_elements() != mesh.n_elements() {
                return Err(Error::SpaceMismatch("column lives on another mesh".into()));
            }
            for k in 0..mesh.n_elements() {
                let v = f.element_values(k);
                if v.iter().any(|x| *x != 0.0) {
                    let mut vals = [0.0; 4];
                    vals[..=n].copy_from_slice(v);
                    map.per_element[k].push((c, vals));
                }
            }
        }
        Ok(map)
    }

    /// Sorts columns per element and merges duplicates.
    fn normalize(&mut self) {
        for list in &mut self.per_element {
            let mut merged: BTreeMap<usize, [f64; 4]> = BTreeMap::new();
            for (c, v) in list.drain(..) {
                let e = merged.entry(c).or_insert([0.0; 4]);
                for i in 0..4 {
                    e[i] += v[i];
                }
            }
            list.extend(merged);
        }
    }

    /// Keeps only the given elements and renumbers the columns they touch.
    /// Returns the restricted map and the original id of every new column.
    pub fn restrict(&self, elements: &[usize]) -> (Self, Vec<usize>) {
        let mut ids: Vec<usize> = elements.iter().flat_map(|&k| self.per_element[k].iter().map(|e| e.0)).collect();
        ids.sort_unstable();
        ids.dedup();
        let mut out = Self::zeros(self.mesh.clone(), ids.len());
        for &k in elements {
            out.per_element[k] = self.per_element[k]
                .iter()
                .map(|(c, v)| (ids.binary_search(c).expect("collected above"), *v))
                .collect();
        }
        (out, ids)
    }

    /// `self − other`.
    pub fn sub(&self, other: &AffineMap) -> Result<Self> {
        if self.cols != other.cols || self.per_element.len() != other.per_element.len() {
            return Err(Error::SpaceMismatch("maps of different shape".into()));
        }
        let mut out = self.clone();
        for (k, list) in other.per_element.iter().enumerate() {
            for (c, v) in list {
                out.per_element[k].push((*c, v.map(|x| -x)));
            }
        }
        out.normalize();
        Ok(out)
    }

    /// Composition with a sparse coefficient map: column `c` of the result
    /// is `Σ_d coeff · column d of self` for `(d, coeff)` in `rows[c]`.
    pub fn compose(&self, cols: usize, rows: &[Vec<(usize, f64)>]) -> Self {
        // invert to: old column -> new columns
        let mut inverse: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.cols];
        for (c, row) in rows.iter().enumerate() {
            for &(d, w) in row {
                inverse[d].push((c, w));
            }
        }
        let mut out = Self::zeros(self.mesh.clone(), cols);
        for (k, list) in self.per_element.iter().enumerate() {
            for (d, v) in list {
                for &(c, w) in &inverse[*d] {
                    out.per_element[k].push((c, v.map(|x| w * x)));
                }
            }
        }
        out.normalize();
        out
    }

    pub fn apply(&self, x: &[f64]) -> BrokenP1 {
        let n = self.mesh.dim();
        let mut f = BrokenP1::zeros(self.mesh.clone());
        for (k, list) in self.per_element.iter().enumerate() {
            let out = f.element_values_mut(k);
            for (c, v) in list {
                for i in 0..=n {
                    out[i] += x[*c] * v[i];
                }
            }
        }
        f
    }

    fn gram(&self, elements: Option<&[usize]>, local: impl Fn(usize, &ElementGeometry, usize, usize) -> f64) -> DenseSymMatrix {
        let n = self.mesh.dim();
        let mut g = DenseSymMatrix::zeros(self.cols);
        let all: Vec<usize>;
        let elements = match elements {
            Some(e) => e,
            None => {
                all = (0..self.mesh.n_elements()).collect();
                &all
            }
        };
        for &k in elements {
            let list = &self.per_element[k];
            if list.is_empty() {
                continue;
            }
            let geo = ElementGeometry::of(&self.mesh, k);
            let mut m = [[0.0; 4]; 4];
            for (i, row) in m.iter_mut().enumerate().take(n + 1) {
                for (j, e) in row.iter_mut().enumerate().take(n + 1) {
                    *e = local(k, &geo, i, j);
                }
            }
            for (a, (ca, va)) in list.iter().enumerate() {
                for (cb, vb) in &list[a..] {
                    let mut s = 0.0;
                    for i in 0..=n {
                        for j in 0..=n {
                            s += va[i] * m[i][j] * vb[j];
                        }
                    }
                    // add() mirrors off-diagonal entries, so one call per unordered pair
                    g.add(*ca, *cb, s);
                }
            }
        }
        g
    }

    /// Gram matrix of `Σ_k weight_k ‖·‖²_{L²(T_k)}` over the given elements.
    pub fn gram_l2(&self, weights: Option<&[f64]>, elements: Option<&[usize]>) -> DenseSymMatrix {
        let n = self.mesh.dim() as f64;
        let denom = (n + 1.0) * (n + 2.0);
        self.gram(elements, |k, g, i, j| {
            let w = weights.map_or(1.0, |w| w[k]);
            w * g.volume * if i == j { 2.0 } else { 1.0 } / denom
        })
    }

    /// Gram matrix of the broken energy over the given elements.
    pub fn gram_energy(&self, elements: Option<&[usize]>) -> DenseSymMatrix {
        self.gram(elements, |_, g, i, j| g.volume * g.grad_dot(i, j))
    }

    /// `∫_{T_k} column` summed over the given elements.
    pub fn integrals(&self, elements: Option<&[usize]>) -> Vec<f64> {
        let n = self.mesh.dim();
        let mut out = vec![0.0; self.cols];
        let mut add = |k: usize| {
            let vol = self.mesh.volume(k);
            for (c, v) in &self.per_element[k] {
                out[*c] += vol * v[..=n].iter().sum::<f64>() / (n + 1) as f64;
            }
        };
        match elements {
            Some(e) => e.iter().for_each(|&k| add(k)),
            None => (0..self.mesh.n_elements()).for_each(add),
        }
        out
    }
}

/// Maximizer of a constrained generalized Rayleigh quotient.
#[derive(Debug, Clone)]
pub struct Rayleigh {
    pub sup: f64,
    pub vector: Vec<f64>,
    /// `|N(x)/D(x) − sup| / max(sup, 1e-12)` for the returned vector; the
    /// floor keeps round-off suprema of exactly reproducing operators quiet.
    pub resubstitution_error: f64,
    /// Dimension of the admissible space after constraint elimination.
    pub dimension: usize,
}

/// `sup N(x)/D(x)` over `x ≠ 0` with `C x = 0` (row-major constraints).
/// `D` must be definite on the constrained space.
pub fn maximize(num: &DenseSymMatrix, den: &DenseSymMatrix, constraints: &[f64], rows: usize) -> Result<Rayleigh> {
    let cols = num.order();
    if den.order() != cols || constraints.len() != rows * cols {
        return Err(Error::Precondition("quadratic forms and constraints disagree in size".into()));
    }
    let (n_red, d_red, basis, dim) = if rows == 0 {
        (num.clone(), den.clone(), None, cols)
    } else {
        let (z, dim) = null_space_basis(constraints, rows, cols);
        (num.congruence(&z, dim), den.congruence(&z, dim), Some(z), dim)
    };
    if dim == 0 {
        return Ok(Rayleigh {
            sup: 0.0,
            vector: vec![0.0; cols],
            resubstitution_error: 0.0,
            dimension: 0,
        });
    }
    let eig = gen_sym_eigen(&n_red, &d_red)?;
    let (sup, y) = eig.max().ok_or_else(|| Error::NumericalFailure("empty spectrum".into()))?;
    let vector = match &basis {
        None => y.to_vec(),
        Some(z) => (0..cols).map(|i| (0..dim).map(|j| z[j * cols + i] * y[j]).sum()).collect(),
    };
    let ratio = num.quad_form(&vector) / den.quad_form(&vector);
    Ok(Rayleigh {
        sup,
        resubstitution_error: (ratio - sup).abs() / sup.abs().max(1e-12),
        vector,
        dimension: dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_mass, assemble_stiffness, SpaceKind};
    use crate::mesh::presets;

    #[test]
    fn basis_grams_match_assembly() {
        let m = Arc::new(presets::l_shape(1).unwrap());
        for kind in [SpaceKind::CrZero, SpaceKind::CrFree, SpaceKind::S1Zero, SpaceKind::S1Free] {
            let space = FeSpace::new(m.clone(), kind).unwrap();
            let map = AffineMap::basis(&space).unwrap();
            let a = assemble_stiffness(&space).unwrap().to_dense();
            let b = assemble_mass(&space).unwrap().to_dense();
            let ga = map.gram_energy(None);
            let gb = map.gram_l2(None, None);
            for i in 0..space.n_dofs() {
                for j in 0..space.n_dofs() {
                    assert!((a.get(i, j) - ga.get(i, j)).abs() < 1e-13, "{kind:?}");
                    assert!((b.get(i, j) - gb.get(i, j)).abs() < 1e-13, "{kind:?}");
                }
            }
        }
    }

    #[test]
    fn apply_matches_to_broken() {
        let m = Arc::new(presets::unit_square(2).unwrap());
        let space = Arc::new(FeSpace::new(m, SpaceKind::CrFree).unwrap());
        let map = AffineMap::basis(&space).unwrap();
        let x: Vec<f64> = (0..space.n_dofs()).map(|i| (i as f64).sin()).collect();
        let f = crate::fem::FeFunction::new(space, x.clone()).unwrap().to_broken().unwrap();
        let g = map.apply(&x);
        for (a, b) in f.values().iter().zip(g.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn constrained_maximum_on_diagonal_forms() {
        // N = diag(3, 2, 1), D = I, constraint x0 = 0 leaves sup 2
        let n = DenseSymMatrix::from_row_major(3, vec![3.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let d = DenseSymMatrix::identity(3);
        let r = maximize(&n, &d, &[1.0, 0.0, 0.0], 1).unwrap();
        assert!((r.sup - 2.0).abs() < 1e-14);
        assert!(r.vector[0].abs() < 1e-14);
        assert!(r.resubstitution_error < 1e-12);
        let all = maximize(&n, &d, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], 3).unwrap();
        assert_eq!(all.dimension, 0);
        assert_eq!(all.sup, 0.0);
    }
}
