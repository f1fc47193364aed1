//! One-step recursions of `dist²(v, T) = ‖v − mean_T v‖²_{L²(T)}` under
//! bisection and red refinement.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::BrokenP1;
use crate::mesh::{simplex, Lineage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecursionMode {
    Bisect,
    Red,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecursionSlack {
    pub node: Lineage,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl RecursionSlack {
    pub fn holds(&self, tol: f64) -> bool {
        self.slack >= -tol * self.rhs.abs().max(1.0)
    }
}

fn dist_sq(v: &BrokenP1, region: &[usize]) -> Result<f64> {
    let mean = v.integral_mean(region)?;
    let n = v.mesh().dim() as f64;
    Ok(region
        .iter()
        .map(|&k| {
            let u: Vec<f64> = v.element_values(k).iter().map(|x| x - mean).collect();
            let s: f64 = u.iter().sum();
            let q: f64 = u.iter().map(|x| x * x).sum();
            v.mesh().volume(k) * (q + s * s) / ((n + 1.0) * (n + 2.0))
        })
        .sum())
}

fn region_diameter(v: &BrokenP1, region: &[usize]) -> f64 {
    let mesh = v.mesh();
    let mut verts: Vec<usize> = region.iter().flat_map(|&k| mesh.simplex(k).vertices.clone()).collect();
    verts.sort_unstable();
    verts.dedup();
    let mut h = 0.0_f64;
    for (a, &p) in verts.iter().enumerate() {
        for &q in &verts[a + 1..] {
            h = h.max(simplex::dist(&mesh.coords()[p], &mesh.coords()[q]));
        }
    }
    h
}

/// Evaluates both sides of the one-step recursion at every inner node of
/// the refinement forest of `v`'s mesh.
///
/// Bisection: `dist²(v,T) ≤ max_j h_{T_j}² ‖∇v‖²_T / (n(n+2)) + Σ_j dist²(v,T_j)`
/// for `v` in the broken space with matching side means. Red refinement
/// (triangles, `v` conforming): the factor is `1/2` and `j` runs over four
/// children.
pub fn verify_dist_recursions(v: &BrokenP1, mode: RecursionMode) -> Result<Vec<RecursionSlack>> {
    let mesh = v.mesh();
    let n = mesh.dim();
    if mode == RecursionMode::Red && n != 2 {
        return Err(Error::UnsupportedDimension { dim: n, operation: "red refinement recursion" });
    }
    let mut regions: BTreeMap<Lineage, Vec<usize>> = BTreeMap::new();
    for (k, s) in mesh.simplices().iter().enumerate() {
        for len in 0..=s.lineage.path.len() {
            let node = Lineage { root: s.lineage.root, path: s.lineage.path[..len].to_vec() };
            regions.entry(node).or_default().push(k);
        }
    }
    let (children, factor) = match mode {
        RecursionMode::Bisect => (2u8, 1.0 / (n * (n + 2)) as f64),
        RecursionMode::Red => (4u8, 0.5),
    };
    let mut out = Vec::new();
    for (node, region) in &regions {
        let kids: Vec<&Vec<usize>> = (0..children).filter_map(|c| regions.get(&node.child(c))).collect();
        if kids.is_empty() {
            continue;
        }
        if kids.len() != children as usize {
            return Err(Error::InvalidTriangulation(format!(
                "node {node:?} has {} of {children} children; mesh does not match the refinement mode",
                kids.len()
            )));
        }
        let lhs = dist_sq(v, region)?;
        let energy: f64 = region.iter().map(|&k| v.energy_sq_element(k)).sum();
        let h_max = kids.iter().map(|r| region_diameter(v, r)).fold(0.0, f64::max);
        let mut rhs = factor * h_max * h_max * energy;
        for r in &kids {
            rhs += dist_sq(v, r)?;
        }
        out.push(RecursionSlack { node: node.clone(), lhs, rhs, slack: rhs - lhs });
    }
    Ok(out)
}
