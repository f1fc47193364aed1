use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::simplex::{Point, TaggedSimplex};
use crate::mesh::triangulation::Triangulation;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshFile {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub simplices: Vec<SimplexRecord>,
    /// Missing means the whole boundary is Dirichlet.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dirichlet_sides: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimplexRecord {
    pub v: Vec<usize>,
    #[serde(rename = "type", default)]
    pub type_tag: u8,
    #[serde(default)]
    pub level: u32,
}

impl MeshFile {
    pub fn from_mesh(mesh: &Triangulation) -> Self {
        Self {
            dim: mesh.dim(),
            vertices: mesh.coords().iter().map(|p| p[..mesh.dim()].to_vec()).collect(),
            simplices: mesh
                .simplices()
                .iter()
                .map(|s| SimplexRecord {
                    v: s.vertices.clone(),
                    type_tag: s.type_tag,
                    level: s.level,
                })
                .collect(),
            dirichlet_sides: Some(mesh.dirichlet_sides()),
        }
    }

    /// Builds the mesh; it becomes a fresh initial mesh (no refinement history).
    pub fn into_mesh(self) -> Result<Triangulation> {
        let dim = self.dim;
        let mut coords: Vec<Point> = Vec::with_capacity(self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            if v.len() != dim || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidTriangulation(format!(
                    "vertex {i} must have {dim} finite coordinates"
                )));
            }
            let mut p = [0.0; 3];
            p[..dim].copy_from_slice(v);
            coords.push(p);
        }
        let simplices = self
            .simplices
            .into_iter()
            .map(|r| TaggedSimplex::new(r.v, r.type_tag, r.level))
            .collect();
        Triangulation::new(dim, coords, simplices, self.dirichlet_sides.as_deref())
    }
}

pub fn mesh_from_json(text: &str) -> Result<Triangulation> {
    serde_json::from_str::<MeshFile>(text)?.into_mesh()
}

pub fn mesh_to_json(mesh: &Triangulation) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MeshFile::from_mesh(mesh))?)
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Triangulation> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(mesh_from_json(&text)?.with_label(label))
}

pub fn save_mesh(mesh: &Triangulation, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, mesh_to_json(mesh)?)?;
    Ok(())
}
