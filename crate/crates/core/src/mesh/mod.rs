//! Simplicial meshes: tagged bisection, red refinement, conforming closure,
//! mesh pairs and shape metrics.

pub mod io;
pub mod metrics;
pub mod pair;
pub mod presets;
pub mod simplex;
pub mod study;
pub mod triangulation;

pub use io::{load_mesh, mesh_from_json, mesh_to_json, save_mesh, MeshFile};
pub use metrics::{mesh_metrics, MeshMetrics};
pub use pair::MeshPair;
pub use simplex::{bisect, Bisection, GeoSimplex, Lineage, Point, TaggedSimplex};
pub use study::{diameter_study, reference_tetrahedron, similarity_classes, DiameterRound};
pub use triangulation::{
    red_refine_uniform, refine_conforming, refine_uniform, Side, Triangulation,
};
