use crate::mesh::{Point, Triangulation};

/// Volume and barycentric gradients of one simplex.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub dim: usize,
    pub volume: f64,
    /// `grads[i]` is `∇λ_i`; only the first `dim + 1` entries are used.
    pub grads: [[f64; 3]; 4],
    pub points: [Point; 4],
}

impl ElementGeometry {
    pub fn new(points: &[Point]) -> Self {
        let dim = points.len() - 1;
        let mut pts = [[0.0; 3]; 4];
        pts[..=dim].copy_from_slice(points);
        let mut j = [[0.0; 3]; 3];
        for c in 0..dim {
            for r in 0..dim {
                j[r][c] = points[c + 1][r] - points[0][r];
            }
        }
        let mut grads = [[0.0; 3]; 4];
        let det;
        if dim == 2 {
            det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let inv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
            for i in 0..2 {
                grads[i + 1] = [inv[i][0], inv[i][1], 0.0];
            }
        } else {
            det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
                - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
                + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
            let cof = |r: usize, c: usize| {
                let rows: Vec<usize> = (0..3).filter(|&x| x != r).collect();
                let cols: Vec<usize> = (0..3).filter(|&x| x != c).collect();
                let m = j[rows[0]][cols[0]] * j[rows[1]][cols[1]]
                    - j[rows[0]][cols[1]] * j[rows[1]][cols[0]];
                if (r + c) % 2 == 0 {
                    m
                } else {
                    -m
                }
            };
            // inverse = adjugate / det, adjugate = cofactor transposed
            for i in 0..3 {
                for c in 0..3 {
                    grads[i + 1][c] = cof(c, i) / det;
                }
            }
        }
        for c in 0..3 {
            grads[0][c] = -(1..=dim).map(|i| grads[i][c]).sum::<f64>();
        }
        let fact = if dim == 2 { 2.0 } else { 6.0 };
        Self {
            dim,
            volume: det.abs() / fact,
            grads,
            points: pts,
        }
    }

    pub fn of(mesh: &Triangulation, k: usize) -> Self {
        Self::new(&mesh.points(k))
    }

    #[inline]
    pub fn grad_dot(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.grads[i], &self.grads[j]);
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    /// Barycentric coordinates of `x`.
    pub fn barycentric(&self, x: &Point) -> [f64; 4] {
        let mut l = [0.0; 4];
        for i in 1..=self.dim {
            let g = &self.grads[i];
            let d = [x[0] - self.points[0][0], x[1] - self.points[0][1], x[2] - self.points[0][2]];
            l[i] = g[0] * d[0] + g[1] * d[1] + g[2] * d[2];
        }
        l[0] = 1.0 - l[1..=self.dim].iter().sum::<f64>();
        l
    }

    pub fn centroid(&self) -> Point {
        let mut c = [0.0; 3];
        for p in &self.points[..=self.dim] {
            for d in 0..3 {
                c[d] += p[d];
            }
        }
        c.map(|x| x / (self.dim + 1) as f64)
    }

    /// Point with barycentric coordinates `l`.
    pub fn point_at(&self, l: &[f64]) -> Point {
        let mut x = [0.0; 3];
        for (i, li) in l.iter().enumerate().take(self.dim + 1) {
            for d in 0..3 {
                x[d] += li * self.points[i][d];
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradients_reproduce_barycentrics() {
        let g = ElementGeometry::new(&[[0.2, 0.1, 0.0], [1.3, 0.4, 0.0], [0.5, 1.1, 0.0]]);
        for (i, p) in g.points[..3].iter().enumerate() {
            let l = g.barycentric(p);
            for j in 0..3 {
                assert!((l[j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        let g3 = ElementGeometry::new(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.1, 0.0],
            [0.2, 1.0, 0.1],
            [0.1, 0.3, 0.9],
        ]);
        for (i, p) in g3.points.iter().enumerate() {
            let l = g3.barycentric(p);
            for j in 0..4 {
                assert!((l[j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }
}
