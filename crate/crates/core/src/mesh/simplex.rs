//! Tagged simplices and the bisection / red-refinement rules.
//!
//! A simplex is an ordered vertex tuple `(x0, …, xn)`. The refinement edge is
//! `x0–xn`. For a simplex of type `γ` the children of a bisection are
//!
//! ```text
//! (x0, x̄, x1, …, xγ, xγ+1, …, xn-1)
//! (xn, x̄, x1, …, xγ, xn-1, …, xγ+1)
//! ```
//!
//! with `x̄ = (x0 + xn)/2`, both of type `(γ+1) mod n`. In two dimensions the
//! type is always 0 and the rule is plain newest-vertex bisection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 3];

/// Where a simplex sits in the refinement forest of its initial mesh:
/// the index of the initial element and the child indices taken since.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct Lineage {
    pub root: usize,
    pub path: Vec<u8>,
}

impl Lineage {
    pub fn root(root: usize) -> Self {
        Self {
            root,
            path: Vec::new(),
        }
    }

    pub fn child(&self, index: u8) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self {
            root: self.root,
            path,
        }
    }

    /// True if `self` is `other` or one of its ancestors.
    pub fn contains(&self, other: &Lineage) -> bool {
        self.root == other.root && other.path.starts_with(&self.path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedSimplex {
    pub vertices: Vec<usize>,
    pub type_tag: u8,
    pub level: u32,
    #[serde(skip)]
    pub lineage: Lineage,
}

impl TaggedSimplex {
    pub fn new(vertices: Vec<usize>, type_tag: u8, level: u32) -> Self {
        Self {
            vertices,
            type_tag,
            level,
            lineage: Lineage::default(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Endpoints of the refinement edge.
    pub fn refinement_edge(&self) -> (usize, usize) {
        (self.vertices[0], self.vertices[self.dim()])
    }

    /// The two children for a given midpoint vertex index of the refinement edge.
    pub fn bisect_with(&self, midpoint: usize) -> [TaggedSimplex; 2] {
        let n = self.dim();
        let (first, second) = bisection_children(n, self.type_tag as usize);
        let pick = |idx: &[usize]| -> Vec<usize> {
            idx.iter()
                .map(|&k| if k == n + 1 { midpoint } else { self.vertices[k] })
                .collect()
        };
        let t = child_type(n, self.type_tag);
        [
            TaggedSimplex {
                vertices: pick(&first),
                type_tag: t,
                level: self.level + 1,
                lineage: self.lineage.child(0),
            },
            TaggedSimplex {
                vertices: pick(&second),
                type_tag: t,
                level: self.level + 1,
                lineage: self.lineage.child(1),
            },
        ]
    }
}

/// Children of a bisection as index tuples into `[x0, …, xn, x̄]`
/// (so `n + 1` denotes the new midpoint).
pub fn bisection_children(n: usize, type_tag: usize) -> (Vec<usize>, Vec<usize>) {
    let gamma = if n == 2 { 0 } else { type_tag };
    let mid = n + 1;
    let mut first = vec![0, mid];
    first.extend(1..n);
    let mut second = vec![n, mid];
    second.extend(1..=gamma);
    second.extend((gamma + 1..n).rev());
    (first, second)
}

pub fn child_type(n: usize, type_tag: u8) -> u8 {
    if n == 2 {
        0
    } else {
        ((type_tag as usize + 1) % n) as u8
    }
}

/// Result of bisecting a simplex whose vertices live in a coordinate list.
#[derive(Debug, Clone)]
pub struct Bisection {
    pub children: [TaggedSimplex; 2],
    pub midpoint: usize,
}

/// Bisects `simplex`, appending the midpoint of its refinement edge to `coords`.
pub fn bisect(simplex: &TaggedSimplex, coords: &mut Vec<Point>) -> Result<Bisection> {
    let pts: Vec<Point> = simplex.vertices.iter().map(|&v| coords[v]).collect();
    let vol = volume(&pts);
    if vol <= degeneracy_threshold(&pts) {
        return Err(Error::DegenerateSimplex {
            index: 0,
            volume: vol,
        });
    }
    let (a, b) = simplex.refinement_edge();
    coords.push(midpoint(&coords[a], &coords[b]));
    let midpoint = coords.len() - 1;
    Ok(Bisection {
        children: simplex.bisect_with(midpoint),
        midpoint,
    })
}

/// A simplex carried with its own coordinates, for refinement studies that
/// never assemble a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoSimplex {
    pub points: Vec<Point>,
    pub type_tag: u8,
    pub level: u32,
    pub path: Vec<u8>,
}

impl GeoSimplex {
    pub fn new(points: Vec<Point>, type_tag: u8) -> Result<Self> {
        let n = points.len().saturating_sub(1);
        if !(2..=3).contains(&n) {
            return Err(Error::UnsupportedDimension {
                dim: n,
                operation: "simplex construction",
            });
        }
        if n == 3 && type_tag > 2 {
            return Err(Error::Precondition(format!(
                "type tag {type_tag} outside 0..3"
            )));
        }
        let vol = volume(&points);
        if vol <= degeneracy_threshold(&points) {
            return Err(Error::DegenerateSimplex {
                index: 0,
                volume: vol,
            });
        }
        Ok(Self {
            points,
            type_tag: if n == 2 { 0 } else { type_tag },
            level: 0,
            path: Vec::new(),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.points.len() - 1
    }

    pub fn volume(&self) -> f64 {
        volume(&self.points)
    }

    pub fn diameter(&self) -> f64 {
        diameter(&self.points)
    }

    pub fn bisect(&self) -> [GeoSimplex; 2] {
        let n = self.dim();
        let mid = midpoint(&self.points[0], &self.points[n]);
        let (first, second) = bisection_children(n, self.type_tag as usize);
        let pick = |idx: &[usize]| -> Vec<Point> {
            idx.iter()
                .map(|&k| if k == n + 1 { mid } else { self.points[k] })
                .collect()
        };
        let t = child_type(n, self.type_tag);
        let child = |pts: Vec<Point>, i: u8| {
            let mut path = self.path.clone();
            path.push(i);
            GeoSimplex {
                points: pts,
                type_tag: t,
                level: self.level + 1,
                path,
            }
        };
        [child(pick(&first), 0), child(pick(&second), 1)]
    }

    /// Red refinement through the edge midpoints. For `(P1, P2, P3)` with
    /// `Q1 = mid(P2,P3)`, `Q2 = mid(P1,P3)`, `Q3 = mid(P1,P2)` the children are
    /// `T1 = (P1,Q3,Q2)`, `T2 = (P2,Q1,Q3)`, `T3 = (P3,Q2,Q1)` and the interior
    /// `T4 = (Q1,Q2,Q3)`.
    pub fn red_refine(&self) -> Result<[GeoSimplex; 4]> {
        if self.dim() != 2 {
            return Err(Error::UnsupportedDimension {
                dim: self.dim(),
                operation: "red refinement",
            });
        }
        let [p1, p2, p3] = [self.points[0], self.points[1], self.points[2]];
        let q1 = midpoint(&p2, &p3);
        let q2 = midpoint(&p1, &p3);
        let q3 = midpoint(&p1, &p2);
        let kids = [
            vec![p1, q3, q2],
            vec![p2, q1, q3],
            vec![p3, q2, q1],
            vec![q1, q2, q3],
        ];
        let mut i = 0u8;
        Ok(kids.map(|pts| {
            let mut path = self.path.clone();
            path.push(i);
            i += 1;
            GeoSimplex {
                points: pts,
                type_tag: 0,
                level: self.level + 2,
                path,
            }
        }))
    }

    /// Interior angles (2D only), in vertex order.
    pub fn angles(&self) -> [f64; 3] {
        triangle_angles(&self.points[0], &self.points[1], &self.points[2])
    }
}

/// The red children of a triangle given by vertex indices, using `mids[k]`
/// for the midpoint of the edge opposite local vertex `k`.
pub fn red_children(vertices: &[usize], mids: [usize; 3]) -> [Vec<usize>; 4] {
    let [p1, p2, p3] = [vertices[0], vertices[1], vertices[2]];
    let [q1, q2, q3] = mids;
    [
        vec![p1, q3, q2],
        vec![p2, q1, q3],
        vec![p3, q2, q1],
        vec![q1, q2, q3],
    ]
}

#[inline]
pub fn midpoint(a: &Point, b: &Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])]
}

#[inline]
pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn dist(a: &Point, b: &Point) -> f64 {
    let d = sub(a, b);
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Signed volume; positive for counter-clockwise triangles and
/// right-handed tetrahedra.
pub fn signed_volume(points: &[Point]) -> f64 {
    match points.len() {
        3 => {
            let u = sub(&points[1], &points[0]);
            let v = sub(&points[2], &points[0]);
            0.5 * (u[0] * v[1] - u[1] * v[0])
        }
        4 => {
            let u = sub(&points[1], &points[0]);
            let v = sub(&points[2], &points[0]);
            let w = sub(&points[3], &points[0]);
            (u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
                + u[2] * (v[0] * w[1] - v[1] * w[0]))
                / 6.0
        }
        _ => 0.0,
    }
}

pub fn volume(points: &[Point]) -> f64 {
    signed_volume(points).abs()
}

pub fn diameter(points: &[Point]) -> f64 {
    let mut h = 0.0_f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            h = h.max(dist(&points[i], &points[j]));
        }
    }
    h
}

pub(crate) fn degeneracy_threshold(points: &[Point]) -> f64 {
    let n = points.len().saturating_sub(1) as i32;
    1e-13 * diameter(points).powi(n)
}

/// Interior angles of a triangle at `a`, `b`, `c` respectively.
pub fn triangle_angles(a: &Point, b: &Point, c: &Point) -> [f64; 3] {
    let angle = |p: &Point, q: &Point, r: &Point| {
        let u = sub(q, p);
        let v = sub(r, p);
        let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        let cross = {
            let x = u[1] * v[2] - u[2] * v[1];
            let y = u[2] * v[0] - u[0] * v[2];
            let z = u[0] * v[1] - u[1] * v[0];
            (x * x + y * y + z * z).sqrt()
        };
        cross.atan2(dot)
    };
    [angle(a, b, c), angle(b, c, a), angle(c, a, b)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(p: [[f64; 2]; 3]) -> GeoSimplex {
        GeoSimplex::new(p.iter().map(|q| [q[0], q[1], 0.0]).collect(), 0).unwrap()
    }

    #[test]
    fn triangle_bisection_matches_tuple_rule() {
        let t = tri([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let [c1, c2] = t.bisect();
        // refinement edge (0,0)–(0,1), new vertex (0, 0.5)
        assert_eq!(c1.points[1], [0.0, 0.5, 0.0]);
        assert_eq!(c1.points, vec![[0.0, 0.0, 0.0], [0.0, 0.5, 0.0], [1.0, 0.0, 0.0]]);
        assert_eq!(c2.points, vec![[0.0, 1.0, 0.0], [0.0, 0.5, 0.0], [1.0, 0.0, 0.0]]);
        assert!((c1.volume() - 0.25).abs() < 1e-15);
        assert!((c2.volume() - 0.25).abs() < 1e-15);
        assert_eq!(c1.level, 1);
    }

    #[test]
    fn tetrahedron_bisection_halves_volume_and_advances_type() {
        let pts = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        for t in 0..3u8 {
            let k = GeoSimplex::new(pts.clone(), t).unwrap();
            for c in k.bisect() {
                assert!((c.volume() - k.volume() / 2.0).abs() < 1e-15);
                assert_eq!(c.type_tag, (t + 1) % 3);
            }
        }
    }

    #[test]
    fn stevenson_children_tuples() {
        assert_eq!(bisection_children(3, 0), (vec![0, 4, 1, 2], vec![3, 4, 2, 1]));
        assert_eq!(bisection_children(3, 1), (vec![0, 4, 1, 2], vec![3, 4, 1, 2]));
        assert_eq!(bisection_children(3, 2), (vec![0, 4, 1, 2], vec![3, 4, 1, 2]));
        assert_eq!(bisection_children(2, 0), (vec![0, 3, 1], vec![2, 3, 1]));
    }

    #[test]
    fn red_children_are_similar_quarters() {
        let t = tri([[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]]);
        let kids = t.red_refine().unwrap();
        for k in &kids {
            assert!((k.volume() - t.volume() / 4.0).abs() < 1e-15);
            assert!((k.diameter() - t.diameter() / 2.0).abs() < 1e-15);
        }
        assert_eq!(kids[3].points[0], midpoint(&t.points[1], &t.points[2]));
    }

    #[test]
    fn red_refinement_of_tetrahedron_rejected() {
        let k = GeoSimplex::new(
            vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            0,
        )
        .unwrap();
        assert!(matches!(
            k.red_refine(),
            Err(Error::UnsupportedDimension { dim: 3, .. })
        ));
    }

    #[test]
    fn degenerate_rejected() {
        let r = GeoSimplex::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]], 0);
        assert!(matches!(r, Err(Error::DegenerateSimplex { .. })));
        let s = TaggedSimplex::new(vec![0, 1, 2], 0, 0);
        let mut coords = vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        assert!(bisect(&s, &mut coords).is_err());
    }

    #[test]
    fn lineage_prefix() {
        let a = Lineage::root(3);
        let b = a.child(1).child(0);
        assert!(a.contains(&b));
        assert!(!b.contains(&a));
        assert!(!Lineage::root(2).contains(&b));
    }
}
