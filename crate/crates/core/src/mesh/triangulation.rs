use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::mesh::simplex::{
    degeneracy_threshold, diameter, dist, midpoint, red_children, volume, Lineage, Point,
    TaggedSimplex,
};

/// Sorted vertex ids of a side; unused trailing slots are `usize::MAX`.
pub type SideKey = [usize; 3];

pub fn side_key(vertices: &[usize]) -> SideKey {
    let mut k = [usize::MAX; 3];
    k[..vertices.len()].copy_from_slice(vertices);
    k[..vertices.len()].sort_unstable();
    k
}

#[inline]
fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Side {
    /// Sorted vertex ids.
    pub vertices: Vec<usize>,
    /// One adjacent element on the boundary, two inside.
    pub elements: Vec<usize>,
    pub dirichlet: bool,
}

impl Side {
    #[inline]
    pub fn is_boundary(&self) -> bool {
        self.elements.len() == 1
    }
}

/// A conforming simplicial mesh in two or three dimensions.
///
/// Vertex ids are append-only under refinement: a refined mesh keeps every
/// vertex of its parent under the same id and records, for each new vertex,
/// the endpoints of the edge it bisects.
#[derive(Debug, Clone)]
pub struct Triangulation {
    dim: usize,
    coords: Vec<Point>,
    simplices: Vec<TaggedSimplex>,
    sides: Vec<Side>,
    element_sides: Vec<Vec<usize>>,
    side_index: HashMap<SideKey, usize>,
    vertex_patches: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
    dirichlet_vertex: Vec<bool>,
    vertex_parents: Vec<Option<[usize; 2]>>,
    label: String,
}

impl Triangulation {
    /// Builds an initial mesh. Every simplex becomes the root of its own
    /// refinement tree. With `dirichlet = None` the whole boundary is Dirichlet.
    pub fn new(
        dim: usize,
        coords: Vec<Point>,
        mut simplices: Vec<TaggedSimplex>,
        dirichlet: Option<&[Vec<usize>]>,
    ) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension {
                dim,
                operation: "triangulation",
            });
        }
        for (k, s) in simplices.iter_mut().enumerate() {
            s.lineage = Lineage::root(k);
        }
        let parents = vec![None; coords.len()];
        match dirichlet {
            None => Self::assemble(dim, coords, simplices, parents, |_| true, String::new()),
            Some(list) => {
                let mut set = std::collections::HashSet::new();
                for s in list {
                    if s.len() != dim {
                        return Err(Error::InvalidTriangulation(format!(
                            "Dirichlet side {s:?} must have {dim} vertices"
                        )));
                    }
                    set.insert(side_key(s));
                }
                let mesh = Self::assemble(
                    dim,
                    coords,
                    simplices,
                    parents,
                    |k| set.contains(k),
                    String::new(),
                )?;
                for k in &set {
                    match mesh.side_index.get(k) {
                        Some(&s) if mesh.sides[s].is_boundary() => {}
                        _ => {
                            return Err(Error::InvalidTriangulation(format!(
                                "Dirichlet side {:?} is not a boundary side",
                                &k[..dim]
                            )))
                        }
                    }
                }
                Ok(mesh)
            }
        }
    }

    fn assemble(
        dim: usize,
        coords: Vec<Point>,
        simplices: Vec<TaggedSimplex>,
        vertex_parents: Vec<Option<[usize; 2]>>,
        is_dirichlet: impl Fn(&SideKey) -> bool,
        label: String,
    ) -> Result<Self> {
        let nv = coords.len();
        if simplices.is_empty() {
            return Err(Error::InvalidTriangulation("no simplices".into()));
        }
        let mut vertex_patches = vec![Vec::new(); nv];
        for (k, s) in simplices.iter().enumerate() {
            if s.vertices.len() != dim + 1 {
                return Err(Error::InvalidTriangulation(format!(
                    "simplex {k} has {} vertices, expected {}",
                    s.vertices.len(),
                    dim + 1
                )));
            }
            if dim == 3 && s.type_tag > 2 {
                return Err(Error::InvalidTriangulation(format!(
                    "simplex {k} has type tag {} outside 0..3",
                    s.type_tag
                )));
            }
            for (i, &v) in s.vertices.iter().enumerate() {
                if v >= nv {
                    return Err(Error::InvalidTriangulation(format!(
                        "simplex {k} references vertex {v} of {nv}"
                    )));
                }
                if s.vertices[..i].contains(&v) {
                    return Err(Error::InvalidTriangulation(format!(
                        "simplex {k} repeats vertex {v}"
                    )));
                }
                vertex_patches[v].push(k);
            }
            let pts: Vec<Point> = s.vertices.iter().map(|&v| coords[v]).collect();
            let vol = volume(&pts);
            if vol <= degeneracy_threshold(&pts) {
                return Err(Error::DegenerateSimplex {
                    index: k,
                    volume: vol,
                });
            }
        }
        if let Some(v) = vertex_patches.iter().position(|p| p.is_empty()) {
            return Err(Error::InvalidTriangulation(format!(
                "vertex {v} belongs to no simplex"
            )));
        }

        let mut sides: Vec<Side> = Vec::new();
        let mut side_index: HashMap<SideKey, usize> = HashMap::with_capacity(simplices.len() * 2);
        let mut element_sides = Vec::with_capacity(simplices.len());
        for (k, s) in simplices.iter().enumerate() {
            let mut local = Vec::with_capacity(dim + 1);
            for i in 0..=dim {
                let verts: Vec<usize> = (0..=dim).filter(|&j| j != i).map(|j| s.vertices[j]).collect();
                let key = side_key(&verts);
                let id = *side_index.entry(key).or_insert_with(|| {
                    sides.push(Side {
                        vertices: key[..dim].to_vec(),
                        elements: Vec::with_capacity(2),
                        dirichlet: false,
                    });
                    sides.len() - 1
                });
                sides[id].elements.push(k);
                if sides[id].elements.len() > 2 {
                    return Err(Error::InvalidTriangulation(format!(
                        "side {:?} is shared by more than two simplices",
                        sides[id].vertices
                    )));
                }
                local.push(id);
            }
            element_sides.push(local);
        }

        let mut boundary_vertex = vec![false; nv];
        let mut dirichlet_vertex = vec![false; nv];
        for side in sides.iter_mut() {
            if side.is_boundary() {
                side.dirichlet = is_dirichlet(&side_key(&side.vertices));
                for &v in &side.vertices {
                    boundary_vertex[v] = true;
                    if side.dirichlet {
                        dirichlet_vertex[v] = true;
                    }
                }
            }
        }

        let mesh = Self {
            dim,
            coords,
            simplices,
            sides,
            element_sides,
            side_index,
            vertex_patches,
            boundary_vertex,
            dirichlet_vertex,
            vertex_parents,
            label,
        };
        if let Some((v, side)) = mesh.find_hanging_node() {
            return Err(Error::NonConforming(format!(
                "vertex {v} hangs on side {side:?}"
            )));
        }
        Ok(mesh)
    }

    /// A vertex sitting at the midpoint of an edge that some simplex still
    /// has, found either through the recorded parent edges or, for meshes
    /// read from files, by bitwise coordinate match on boundary-side edges.
    fn find_hanging_node(&self) -> Option<(usize, Vec<usize>)> {
        let mut by_parents: HashMap<(usize, usize), usize> = HashMap::new();
        for (v, p) in self.vertex_parents.iter().enumerate() {
            if let Some([a, b]) = p {
                by_parents.insert(edge_key(*a, *b), v);
            }
        }
        if !by_parents.is_empty() {
            for s in &self.simplices {
                for i in 0..s.vertices.len() {
                    for j in (i + 1)..s.vertices.len() {
                        if let Some(&m) = by_parents.get(&edge_key(s.vertices[i], s.vertices[j])) {
                            return Some((m, vec![s.vertices[i], s.vertices[j]]));
                        }
                    }
                }
            }
        }
        let bits = |p: &Point| [p[0].to_bits(), p[1].to_bits(), p[2].to_bits()];
        let by_coords: HashMap<[u64; 3], usize> =
            self.coords.iter().enumerate().map(|(v, p)| (bits(p), v)).collect();
        for side in self.sides.iter().filter(|s| s.is_boundary()) {
            let vs = &side.vertices;
            for i in 0..vs.len() {
                for j in (i + 1)..vs.len() {
                    let m = midpoint(&self.coords[vs[i]], &self.coords[vs[j]]);
                    if let Some(&v) = by_coords.get(&bits(&m)) {
                        return Some((v, side.vertices.clone()));
                    }
                }
            }
        }
        None
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    #[inline]
    pub fn n_vertices(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn n_elements(&self) -> usize {
        self.simplices.len()
    }

    #[inline]
    pub fn simplices(&self) -> &[TaggedSimplex] {
        &self.simplices
    }

    #[inline]
    pub fn simplex(&self, k: usize) -> &TaggedSimplex {
        &self.simplices[k]
    }

    pub fn points(&self, k: usize) -> Vec<Point> {
        self.simplices[k].vertices.iter().map(|&v| self.coords[v]).collect()
    }

    pub fn volume(&self, k: usize) -> f64 {
        volume(&self.points(k))
    }

    pub fn diameter(&self, k: usize) -> f64 {
        diameter(&self.points(k))
    }

    pub fn h_max(&self) -> f64 {
        (0..self.n_elements()).map(|k| self.diameter(k)).fold(0.0, f64::max)
    }

    #[inline]
    pub fn sides(&self) -> &[Side] {
        &self.sides
    }

    /// Side ids of element `k`, the `i`-th opposite its `i`-th vertex.
    #[inline]
    pub fn element_sides(&self, k: usize) -> &[usize] {
        &self.element_sides[k]
    }

    pub fn find_side(&self, vertices: &[usize]) -> Option<usize> {
        self.side_index.get(&side_key(vertices)).copied()
    }

    pub fn side_measure(&self, s: usize) -> f64 {
        let v = &self.sides[s].vertices;
        let p = |i: usize| self.coords[v[i]];
        if self.dim == 2 {
            dist(&p(0), &p(1))
        } else {
            let a = crate::mesh::simplex::sub(&p(1), &p(0));
            let b = crate::mesh::simplex::sub(&p(2), &p(0));
            let c = [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ];
            0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
        }
    }

    pub fn side_midpoint(&self, s: usize) -> Point {
        let v = &self.sides[s].vertices;
        let mut m = [0.0; 3];
        for &i in v {
            for d in 0..3 {
                m[d] += self.coords[i][d];
            }
        }
        m.map(|x| x / v.len() as f64)
    }

    /// Elements containing vertex `z`, ascending.
    #[inline]
    pub fn vertex_patch(&self, z: usize) -> &[usize] {
        &self.vertex_patches[z]
    }

    #[inline]
    pub fn is_boundary_vertex(&self, z: usize) -> bool {
        self.boundary_vertex[z]
    }

    #[inline]
    pub fn is_dirichlet_vertex(&self, z: usize) -> bool {
        self.dirichlet_vertex[z]
    }

    pub fn vertex_parents(&self) -> &[Option<[usize; 2]>] {
        &self.vertex_parents
    }

    pub fn dirichlet_sides(&self) -> Vec<Vec<usize>> {
        self.sides
            .iter()
            .filter(|s| s.dirichlet)
            .map(|s| s.vertices.clone())
            .collect()
    }

    /// Counts vertices lying on the midpoint of an edge of some simplex; zero
    /// for every value of this type, exposed for checks on refinement output.
    pub fn hanging_node_count(&self) -> usize {
        usize::from(self.find_hanging_node().is_some())
    }

    /// True if every interior side has two neighbours and every boundary side one.
    pub fn is_conforming(&self) -> bool {
        self.sides.iter().all(|s| !s.elements.is_empty() && s.elements.len() <= 2)
            && self.find_hanging_node().is_none()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n_elements();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(k) = stack.pop() {
            for &s in &self.element_sides[k] {
                for &e in &self.sides[s].elements {
                    if !seen[e] {
                        seen[e] = true;
                        count += 1;
                        stack.push(e);
                    }
                }
            }
        }
        count == n
    }

    /// `V − E + F` for a triangle mesh (edges are the sides).
    pub fn euler_characteristic(&self) -> Result<i64> {
        if self.dim != 2 {
            return Err(Error::UnsupportedDimension {
                dim: self.dim,
                operation: "Euler characteristic",
            });
        }
        Ok(self.n_vertices() as i64 - self.sides.len() as i64 + self.n_elements() as i64)
    }

    /// Connected with Euler characteristic one: a simply-connected domain.
    pub fn is_simply_connected(&self) -> Result<bool> {
        Ok(self.is_connected() && self.euler_characteristic()? == 1)
    }

    /// Interior angle of element `k` at its local vertex `i` (2D).
    pub fn angle(&self, k: usize, i: usize) -> f64 {
        let p = self.points(k);
        crate::mesh::simplex::triangle_angles(&p[0], &p[1], &p[2])[i]
    }
}

/// Bisects every marked simplex at least once and closes the result so that
/// it is conforming again.
pub fn refine_conforming(mesh: &Triangulation, marked: &[usize]) -> Result<Triangulation> {
    let n0 = mesh.n_elements();
    if let Some(&k) = marked.iter().find(|&&k| k >= n0) {
        return Err(Error::Precondition(format!(
            "marked element {k} outside 0..{n0}"
        )));
    }
    if marked.is_empty() {
        return Ok(mesh.clone());
    }
    let dim = mesh.dim;
    let mut coords = mesh.coords.clone();
    let mut parents = mesh.vertex_parents.clone();
    let mut elems: Vec<Option<TaggedSimplex>> = mesh.simplices.iter().cloned().map(Some).collect();
    let mut edge_elems: HashMap<(usize, usize), Vec<usize>> = HashMap::with_capacity(n0 * 3);
    let edges_of = |s: &TaggedSimplex| {
        let v = &s.vertices;
        let mut out = Vec::with_capacity(6);
        for i in 0..v.len() {
            for j in (i + 1)..v.len() {
                out.push(edge_key(v[i], v[j]));
            }
        }
        out
    };
    for (k, s) in mesh.simplices.iter().enumerate() {
        for e in edges_of(s) {
            edge_elems.entry(e).or_default().push(k);
        }
    }
    let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut queue: VecDeque<usize> = {
        let mut m = marked.to_vec();
        m.sort_unstable();
        m.dedup();
        m.into()
    };
    let cap = 64 * n0;
    let mut bisections = 0;
    while let Some(t) = queue.pop_front() {
        let Some(s) = elems[t].take() else { continue };
        bisections += 1;
        if bisections > cap {
            return Err(Error::ClosureDiverged { iterations: cap });
        }
        let (a, b) = s.refinement_edge();
        let e = edge_key(a, b);
        let m = *mids.entry(e).or_insert_with(|| {
            coords.push(midpoint(&coords[a], &coords[b]));
            parents.push(Some([e.0, e.1]));
            coords.len() - 1
        });
        for f in edges_of(&s) {
            if let Some(list) = edge_elems.get_mut(&f) {
                list.retain(|&x| x != t);
            }
        }
        for child in s.bisect_with(m) {
            let id = elems.len();
            let child_edges = edges_of(&child);
            let hanging = child_edges.iter().any(|f| mids.contains_key(f));
            for f in child_edges {
                edge_elems.entry(f).or_default().push(id);
            }
            elems.push(Some(child));
            if hanging {
                queue.push_back(id);
            }
        }
        if let Some(list) = edge_elems.get(&e) {
            queue.extend(list.iter().copied());
        }
    }

    let simplices: Vec<TaggedSimplex> = elems.into_iter().flatten().collect();
    let old_nv = mesh.n_vertices();
    let lookup = parents.clone();
    let inherit = |key: &SideKey| -> bool {
        let mut verts: Vec<usize> = key[..dim].to_vec();
        loop {
            if let Some(&s) = mesh.side_index.get(&side_key(&verts)) {
                return mesh.sides[s].dirichlet;
            }
            let Some(pos) = (0..dim).filter(|&i| verts[i] >= old_nv).max_by_key(|&i| verts[i]) else {
                return false;
            };
            let Some([p, q]) = lookup[verts[pos]] else {
                return false;
            };
            verts[pos] = if verts.contains(&p) { q } else { p };
        }
    };
    Triangulation::assemble(dim, coords, simplices, parents, inherit, mesh.label.clone())
}

/// `rounds` rounds of bisecting every element.
pub fn refine_uniform(mesh: &Triangulation, rounds: usize) -> Result<Triangulation> {
    let mut m = mesh.clone();
    for _ in 0..rounds {
        let all: Vec<usize> = (0..m.n_elements()).collect();
        m = refine_conforming(&m, &all)?;
    }
    Ok(m)
}

/// One round of red refinement of every triangle.
pub fn red_refine_uniform(mesh: &Triangulation) -> Result<Triangulation> {
    if mesh.dim != 2 {
        return Err(Error::UnsupportedDimension {
            dim: mesh.dim,
            operation: "red refinement",
        });
    }
    let mut coords = mesh.coords.clone();
    let mut parents = mesh.vertex_parents.clone();
    let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut simplices = Vec::with_capacity(4 * mesh.n_elements());
    for s in &mesh.simplices {
        let v = &s.vertices;
        let mut mid = |a: usize, b: usize| {
            let e = edge_key(a, b);
            *mids.entry(e).or_insert_with(|| {
                coords.push(midpoint(&coords[a], &coords[b]));
                parents.push(Some([e.0, e.1]));
                coords.len() - 1
            })
        };
        let q = [mid(v[1], v[2]), mid(v[0], v[2]), mid(v[0], v[1])];
        for (i, verts) in red_children(v, q).into_iter().enumerate() {
            simplices.push(TaggedSimplex {
                vertices: verts,
                type_tag: 0,
                level: s.level + 2,
                lineage: s.lineage.child(i as u8),
            });
        }
    }
    let old_nv = mesh.n_vertices();
    let lookup = parents.clone();
    let inherit = |key: &SideKey| -> bool {
        let verts = &key[..2];
        let find = |x: usize| if x >= old_nv { lookup[x] } else { None };
        // a fine boundary edge is half of a coarse edge: one old endpoint and one midpoint
        for (&m, &o) in [(&verts[0], &verts[1]), (&verts[1], &verts[0])] {
            if let Some([p, q]) = find(m) {
                if p == o || q == o {
                    if let Some(&s) = mesh.side_index.get(&side_key(&[p, q])) {
                        return mesh.sides[s].dirichlet;
                    }
                }
            }
        }
        false
    };
    Triangulation::assemble(2, coords, simplices, parents, inherit, mesh.label.clone())
}
