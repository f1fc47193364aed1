use crate::error::{Error, Result};
use crate::numerics::dense::DenseSymMatrix;

/// Symmetric matrix in compressed sparse row format (both triangles stored).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    order: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed in
    /// the order given, so the result is independent of how the triplets were
    /// produced as long as their order is.
    pub fn from_triplets(order: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|t| t.0 >= order || t.1 >= order) {
            return Err(Error::Precondition(format!(
                "triplet ({r},{c}) out of range for order {order}"
            )));
        }
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; order + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..order {
            row_ptr[i + 1] += row_ptr[i];
        }
        let m = Self {
            order,
            row_ptr,
            col_idx,
            values,
        };
        m.check_symmetry()?;
        Ok(m)
    }

    fn check_symmetry(&self) -> Result<()> {
        let scale = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 0..self.order {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                if j > i {
                    let t = self.get(j, i);
                    if (t - self.values[k]).abs() > 1e-12 * scale {
                        return Err(Error::Precondition(format!(
                            "sparse matrix not symmetric at ({i},{j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match cols.binary_search(&j) {
            Ok(k) => self.values[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.order).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.order {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = s;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.order];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.order).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn to_dense(&self) -> DenseSymMatrix {
        let mut d = DenseSymMatrix::zeros(self.order);
        for i in 0..self.order {
            for (j, v) in self.row(i) {
                if j >= i {
                    d.set(i, j, v);
                }
            }
        }
        d
    }

    /// Principal submatrix on the given (sorted, distinct) indices.
    pub fn principal_submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.order];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_i, &i) in keep.iter().enumerate() {
            for (j, v) in self.row(i) {
                if map[j] != usize::MAX {
                    triplets.push((new_i, map[j], v));
                }
            }
        }
        Self::from_triplets(keep.len(), triplets).expect("submatrix of a symmetric matrix")
    }
}

/// Conjugate-gradient settings.
#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    /// Relative residual target `‖b − A x‖ ≤ tol ‖b‖`.
    pub tol: f64,
    /// Iteration cap as a multiple of the matrix order.
    pub max_iter_factor: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter_factor: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgReport {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `A x = b` for symmetric positive definite `A` with
/// diagonally scaled conjugate gradients.
pub fn cg_solve(a: &SparseSymMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    cg_solve_with(
        a,
        b,
        CgOptions {
            tol,
            ..CgOptions::default()
        },
    )
    .map(|r| r.solution)
}

pub fn cg_solve_with(a: &SparseSymMatrix, b: &[f64], options: CgOptions) -> Result<CgReport> {
    let n = a.order();
    if b.len() != n {
        return Err(Error::Precondition(format!(
            "right-hand side has length {} for order {n}",
            b.len()
        )));
    }
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if n == 0 || b_norm == 0.0 {
        return Ok(CgReport {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let cap = options.max_iter_factor * n;
    for it in 0..cap {
        let res = norm(&r) / b_norm;
        if res <= options.tol {
            // the recursive residual drifts; confirm with the true one
            a.matvec_into(&x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            let true_res = norm(&r) / b_norm;
            if true_res <= options.tol {
                return Ok(CgReport {
                    solution: x,
                    iterations: it,
                    relative_residual: true_res,
                });
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
                p[i] = z[i];
            }
            rz = dot(&r, &z);
        }
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "conjugate gradients broke down at iteration {it} (pᵀAp = {pap:e})"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    // recompute the true residual once before giving up
    let ax = a.matvec(&x);
    let res = norm(&ax.iter().zip(b).map(|(u, v)| v - u).collect::<Vec<_>>()) / b_norm;
    if res <= options.tol {
        return Ok(CgReport {
            solution: x,
            iterations: cap,
            relative_residual: res,
        });
    }
    Err(Error::NumericalFailure(format!(
        "conjugate gradients exceeded {cap} iterations (relative residual {res:e})"
    )))
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> SparseSymMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseSymMatrix::from_triplets(n, t).unwrap()
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let id = SparseSymMatrix::from_triplets(3, (0..3).map(|i| (i, i, 1.0)).collect()).unwrap();
        let x = cg_solve(&id, &[0.3, -1.0, 7.0], 1e-12).unwrap();
        assert_eq!(x, vec![0.3, -1.0, 7.0]);
    }

    #[test]
    fn tridiagonal_hand_solution() {
        // elimination by hand: x = (1.5, 2, 1.5)
        let x = cg_solve(&laplace_1d(3), &[1.0, 1.0, 1.0], 1e-14).unwrap();
        for (got, want) in x.iter().zip([1.5, 2.0, 1.5]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicates_are_summed() {
        let m = SparseSymMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn asymmetric_triplets_rejected() {
        assert!(SparseSymMatrix::from_triplets(2, vec![(0, 1, 1.0), (1, 0, 2.0)]).is_err());
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let a = laplace_1d(200);
        let b = vec![1.0; 200];
        let err = cg_solve_with(
            &a,
            &b,
            CgOptions {
                tol: 1e-14,
                max_iter_factor: 0,
            },
        )
        .unwrap_err();
        assert!(err.is_numerical());
    }
}
