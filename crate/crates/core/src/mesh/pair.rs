use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::simplex::Lineage;
use crate::mesh::triangulation::Triangulation;

/// A mesh together with one of its refinements.
#[derive(Debug, Clone)]
pub struct MeshPair {
    coarse: Arc<Triangulation>,
    fine: Arc<Triangulation>,
    descendants: Vec<Vec<usize>>,
    ancestor: Vec<usize>,
    /// `(coarse id, fine id)` of elements present in both meshes.
    overlap: Vec<(usize, usize)>,
    fine_in_overlap: Vec<bool>,
    coarse_in_overlap: Vec<bool>,
}

impl MeshPair {
    pub fn new(coarse: Arc<Triangulation>, fine: Arc<Triangulation>) -> Result<Self> {
        let fail = |reason: String| Error::NotARefinement {
            coarse: coarse.label().to_string(),
            fine: fine.label().to_string(),
            reason,
        };
        if coarse.dim() != fine.dim() {
            return Err(fail("dimensions differ".into()));
        }
        if fine.n_vertices() < coarse.n_vertices()
            || coarse.coords() != &fine.coords()[..coarse.n_vertices()]
        {
            return Err(fail("coarse vertices are not kept by the fine mesh".into()));
        }
        let by_lineage: HashMap<&Lineage, usize> = coarse
            .simplices()
            .iter()
            .enumerate()
            .map(|(k, s)| (&s.lineage, k))
            .collect();
        let mut descendants = vec![Vec::new(); coarse.n_elements()];
        let mut ancestor = Vec::with_capacity(fine.n_elements());
        let mut overlap = Vec::new();
        let mut fine_in_overlap = vec![false; fine.n_elements()];
        let mut coarse_in_overlap = vec![false; coarse.n_elements()];
        for (j, s) in fine.simplices().iter().enumerate() {
            let mut found = None;
            for len in (0..=s.lineage.path.len()).rev() {
                let l = Lineage {
                    root: s.lineage.root,
                    path: s.lineage.path[..len].to_vec(),
                };
                if let Some(&k) = by_lineage.get(&l) {
                    found = Some((k, len == s.lineage.path.len()));
                    break;
                }
            }
            let Some((k, same)) = found else {
                return Err(fail(format!("fine element {j} has no coarse ancestor")));
            };
            if same {
                if coarse.simplex(k).vertices != s.vertices {
                    return Err(fail(format!(
                        "element {j} shares its lineage with coarse {k} but not its vertices"
                    )));
                }
                overlap.push((k, j));
                fine_in_overlap[j] = true;
                coarse_in_overlap[k] = true;
            }
            descendants[k].push(j);
            ancestor.push(k);
        }
        for (k, d) in descendants.iter().enumerate() {
            let whole = coarse.volume(k);
            let parts: f64 = d.iter().map(|&j| fine.volume(j)).sum();
            if (parts - whole).abs() > 1e-12 * whole {
                return Err(fail(format!(
                    "descendants of coarse element {k} cover volume {parts} of {whole}"
                )));
            }
        }
        Ok(Self {
            coarse,
            fine,
            descendants,
            ancestor,
            overlap,
            fine_in_overlap,
            coarse_in_overlap,
        })
    }

    pub fn coarse(&self) -> &Triangulation {
        &self.coarse
    }

    pub fn fine(&self) -> &Triangulation {
        &self.fine
    }

    pub fn coarse_arc(&self) -> Arc<Triangulation> {
        Arc::clone(&self.coarse)
    }

    pub fn fine_arc(&self) -> Arc<Triangulation> {
        Arc::clone(&self.fine)
    }

    /// Fine elements tiling coarse element `k`.
    pub fn descendants(&self, k: usize) -> &[usize] {
        &self.descendants[k]
    }

    /// Coarse element containing fine element `j`.
    pub fn ancestor(&self, j: usize) -> usize {
        self.ancestor[j]
    }

    pub fn overlap(&self) -> &[(usize, usize)] {
        &self.overlap
    }

    pub fn fine_in_overlap(&self, j: usize) -> bool {
        self.fine_in_overlap[j]
    }

    pub fn coarse_in_overlap(&self, k: usize) -> bool {
        self.coarse_in_overlap[k]
    }

    /// Coarse elements that were refined (`T ∖ T̂`), ascending.
    pub fn refined_coarse(&self) -> Vec<usize> {
        (0..self.coarse.n_elements()).filter(|&k| !self.coarse_in_overlap[k]).collect()
    }
}
