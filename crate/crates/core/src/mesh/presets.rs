//! Built-in domains.
//!
//! The 2D presets are criss-cross meshes: every square cell is cut by both
//! diagonals into four right isosceles triangles whose hypotenuse (a cell
//! edge) is the refinement edge. Neighbouring triangles across a cell edge
//! share that edge as refinement edge, so the initial tagging is compatible.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::mesh::simplex::{Point, TaggedSimplex};
use crate::mesh::triangulation::Triangulation;

pub const PRESET_NAMES: &[&str] = &[
    "unit-square",
    "right-isosceles-square",
    "l-shape",
    "triangle",
    "square-with-hole",
    "unit-cube",
];

/// Looks up a preset by name; `n` is the number of cells per unit length.
pub fn preset(name: &str, n: usize) -> Result<Triangulation> {
    match name {
        "unit-square" | "right-isosceles-square" => unit_square(n),
        "l-shape" => l_shape(n),
        "triangle" => triangle(),
        "square-with-hole" => square_with_hole(n),
        "unit-cube" => unit_cube(),
        _ => Err(Error::Precondition(format!(
            "unknown preset '{name}' (known: {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}

fn criss_cross(
    n: usize,
    origin: [f64; 2],
    cells: impl Iterator<Item = (usize, usize)>,
    label: String,
) -> Result<Triangulation> {
    if n == 0 {
        return Err(Error::Precondition("cell count must be positive".into()));
    }
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut coords: Vec<Point> = Vec::new();
    let scale = (2 * n) as f64;
    let mut vertex = |key: (usize, usize)| {
        *index.entry(key).or_insert_with(|| {
            coords.push([
                origin[0] + key.0 as f64 / scale,
                origin[1] + key.1 as f64 / scale,
                0.0,
            ]);
            coords.len() - 1
        })
    };
    let mut simplices = Vec::new();
    for (i, j) in cells {
        let c = [
            vertex((2 * i, 2 * j)),
            vertex((2 * i + 2, 2 * j)),
            vertex((2 * i + 2, 2 * j + 2)),
            vertex((2 * i, 2 * j + 2)),
        ];
        let m = vertex((2 * i + 1, 2 * j + 1));
        for e in 0..4 {
            let (a, b) = (c[e], c[(e + 1) % 4]);
            simplices.push(TaggedSimplex::new(vec![b, m, a], 0, 0));
        }
    }
    Ok(Triangulation::new(2, coords, simplices, None)?.with_label(label))
}

/// `(0,1)²` with `n × n` criss-cross cells.
pub fn unit_square(n: usize) -> Result<Triangulation> {
    criss_cross(
        n,
        [0.0, 0.0],
        (0..n).flat_map(move |j| (0..n).map(move |i| (i, j))),
        format!("unit-square-n{n}"),
    )
}

/// `(−1,1)²` without the closed fourth quadrant, `n` cells per unit length.
pub fn l_shape(n: usize) -> Result<Triangulation> {
    criss_cross(
        n,
        [-1.0, -1.0],
        (0..2 * n).flat_map(move |j| (0..2 * n).map(move |i| (i, j))).filter(move |&(i, j)| !(i >= n && j < n)),
        format!("l-shape-n{n}"),
    )
}

/// `(0,3)²` without `[1,2]²`; not simply connected.
pub fn square_with_hole(n: usize) -> Result<Triangulation> {
    criss_cross(
        n,
        [0.0, 0.0],
        (0..3 * n)
            .flat_map(move |j| (0..3 * n).map(move |i| (i, j)))
            .filter(move |&(i, j)| !((n..2 * n).contains(&i) && (n..2 * n).contains(&j))),
        format!("square-with-hole-n{n}"),
    )
}

/// The unit right triangle with the hypotenuse as refinement edge.
pub fn triangle() -> Result<Triangulation> {
    simplex_mesh(vec![[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        .map(|m| m.with_label("triangle"))
}

/// A one-element mesh; the tuple order of `points` is the tag.
pub fn simplex_mesh(points: Vec<Point>) -> Result<Triangulation> {
    let dim = points.len().saturating_sub(1);
    Triangulation::new(
        dim,
        points,
        vec![TaggedSimplex::new((0..=dim).collect(), 0, 0)],
        None,
    )
}

/// The unit cube split into the six Kuhn tetrahedra along the main diagonal,
/// all of type 0 with the diagonal as refinement edge.
pub fn unit_cube() -> Result<Triangulation> {
    let mut coords = Vec::new();
    for k in 0..8 {
        coords.push([(k & 1) as f64, ((k >> 1) & 1) as f64, ((k >> 2) & 1) as f64]);
    }
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let simplices = perms
        .iter()
        .map(|p| {
            let mut v = vec![0usize];
            let mut cur = 0usize;
            for &axis in p {
                cur |= 1 << axis;
                v.push(cur);
            }
            TaggedSimplex::new(v, 0, 0)
        })
        .collect();
    Ok(Triangulation::new(3, coords, simplices, None)?.with_label("unit-cube"))
}
