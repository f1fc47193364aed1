//! Dense symmetric matrices, Cholesky factorization and the cyclic Jacobi
//! eigensolver used for every extremal Rayleigh quotient in the crate.

use crate::error::{Error, Result};

/// Relative asymmetry accepted by [`DenseSymMatrix::from_row_major`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-14;

const MAX_SWEEPS: usize = 80;

/// A dense symmetric matrix stored row-major (both triangles).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymMatrix {
    order: usize,
    entries: Vec<f64>,
}

impl DenseSymMatrix {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            entries: vec![0.0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.entries[i * order + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from a full row-major array, rejecting arrays whose
    /// asymmetry exceeds `SYMMETRY_TOLERANCE * max|a_ij|`. The stored matrix
    /// is the exact symmetric part.
    pub fn from_row_major(order: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != order * order {
            return Err(Error::Precondition(format!(
                "expected {} entries for order {order}, got {}",
                order * order,
                entries.len()
            )));
        }
        let scale = entries.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut m = Self { order, entries };
        for i in 0..order {
            for j in (i + 1)..order {
                let a = m.entries[i * order + j];
                let b = m.entries[j * order + i];
                if (a - b).abs() > SYMMETRY_TOLERANCE * scale {
                    return Err(Error::Precondition(format!(
                        "matrix is not symmetric at ({i},{j}): {a:e} vs {b:e}"
                    )));
                }
                let s = 0.5 * (a + b);
                m.entries[i * order + j] = s;
                m.entries[j * order + i] = s;
            }
        }
        Ok(m)
    }

    /// Builds a matrix from its upper triangle; `f(i, j)` is called for `i <= j`.
    pub fn from_upper_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            for j in i..order {
                let v = f(i, j);
                m.entries[i * order + j] = v;
                m.entries[j * order + i] = v;
            }
        }
        m
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    /// Sets `a_ij = a_ji = value`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.order + j] = value;
        self.entries[j * self.order + i] = value;
    }

    /// Adds `value` to `a_ij` and, off the diagonal, to `a_ji`.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.order + j] += value;
        if i != j {
            self.entries[j * self.order + i] += value;
        }
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            order: self.order,
            entries: self.entries.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.order;
        (0..n)
            .map(|i| {
                self.entries[i * n..(i + 1) * n]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `x · A x`
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `Zᵀ A Z` for a column-major basis `z` with `cols` columns of length `order`.
    pub fn congruence(&self, z: &[f64], cols: usize) -> Self {
        let n = self.order;
        debug_assert_eq!(z.len(), n * cols);
        let az: Vec<Vec<f64>> = (0..cols).map(|c| self.matvec(&z[c * n..(c + 1) * n])).collect();
        Self::from_upper_fn(cols, |i, j| {
            z[i * n..(i + 1) * n]
                .iter()
                .zip(&az[j])
                .map(|(a, b)| a * b)
                .sum()
        })
    }
}

/// Eigenpairs in ascending order of eigenvalue.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column-major: eigenvector `k` occupies `vectors[k*n..(k+1)*n]`.
    pub vectors: Vec<f64>,
    order: usize,
}

impl SymEigen {
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.order..(k + 1) * self.order]
    }

    pub fn max(&self) -> Option<(f64, &[f64])> {
        let k = self.values.len().checked_sub(1)?;
        Some((self.values[k], self.vector(k)))
    }

    pub fn min(&self) -> Option<(f64, &[f64])> {
        if self.values.is_empty() {
            None
        } else {
            Some((self.values[0], self.vector(0)))
        }
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
pub fn sym_eigen(a: &DenseSymMatrix) -> Result<SymEigen> {
    let n = a.order;
    if n == 0 {
        return Err(Error::Precondition("eigenproblem of order 0".into()));
    }
    let mut m = a.entries.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob = a.frobenius_norm();
    if frob == 0.0 {
        return Ok(sorted(vec![0.0; n], v, n));
    }

    let off_norm = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * m[i * n + j] * m[i * n + j];
            }
        }
        s.sqrt()
    };

    let mut previous = f64::INFINITY;
    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let off = off_norm(&m);
        if off <= 1e-15 * frob || (off <= 1e-12 * frob && off >= 0.5 * previous) {
            converged = true;
            break;
        }
        previous = off;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    m[k * n + p] = new_kp;
                    m[p * n + k] = new_kp;
                    m[k * n + q] = new_kq;
                    m[q * n + k] = new_kq;
                }
                m[p * n + p] = app - t * apq;
                m[q * n + q] = aqq + t * apq;
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                // columns p and q of V (column-major storage)
                for k in 0..n {
                    let vkp = v[p * n + k];
                    let vkq = v[q * n + k];
                    v[p * n + k] = c * vkp - s * vkq;
                    v[q * n + k] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        let off = off_norm(&m);
        if off > 1e-12 * frob {
            return Err(Error::NumericalFailure(format!(
                "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps (off-diagonal {off:e})"
            )));
        }
    }
    let values = (0..n).map(|i| m[i * n + i]).collect();
    Ok(sorted(values, v, n))
}

fn sorted(values: Vec<f64>, vectors: Vec<f64>, n: usize) -> SymEigen {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut vals = Vec::with_capacity(n);
    let mut vecs = Vec::with_capacity(n * n);
    for &k in &idx {
        vals.push(values[k]);
        vecs.extend_from_slice(&vectors[k * n..(k + 1) * n]);
    }
    SymEigen {
        values: vals,
        vectors: vecs,
        order: n,
    }
}

/// Lower-triangular Cholesky factor `B = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    order: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    pub fn factor(b: &DenseSymMatrix) -> Result<Self> {
        let n = b.order;
        let mut l = vec![0.0; n * n];
        let scale = b.max_abs();
        for j in 0..n {
            let mut d = b.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d <= 1e-14 * scale || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in (j + 1)..n {
                let mut s = b.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Ok(Self { order: n, lower: l })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Solves `L y = x` in place.
    pub fn solve_lower(&self, x: &mut [f64]) {
        let n = self.order;
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.lower[i * n + k] * x[k];
            }
            x[i] = s / self.lower[i * n + i];
        }
    }

    /// Solves `Lᵀ y = x` in place.
    pub fn solve_upper(&self, x: &mut [f64]) {
        let n = self.order;
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.lower[k * n + i] * x[k];
            }
            x[i] = s / self.lower[i * n + i];
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_lower(&mut x);
        self.solve_upper(&mut x);
        x
    }

    /// The standard symmetric matrix `L⁻¹ A L⁻ᵀ`.
    pub fn reduce(&self, a: &DenseSymMatrix) -> DenseSymMatrix {
        let n = self.order;
        // W = L⁻¹ A, column by column (A symmetric: columns = rows).
        let mut w = vec![0.0; n * n]; // column-major
        for c in 0..n {
            let col = &mut w[c * n..(c + 1) * n];
            col.copy_from_slice(&a.entries[c * n..(c + 1) * n]);
            self.solve_lower(col);
        }
        // C = L⁻¹ Wᵀ; row r of Wᵀ is column r of W transposed, so column r of C
        // is L⁻¹ applied to row r of W.
        let mut c = vec![0.0; n * n];
        for r in 0..n {
            let mut row: Vec<f64> = (0..n).map(|k| w[k * n + r]).collect();
            self.solve_lower(&mut row);
            for (i, v) in row.into_iter().enumerate() {
                c[i * n + r] = v;
            }
        }
        let mut out = DenseSymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                out.set(i, j, 0.5 * (c[i * n + j] + c[j * n + i]));
            }
        }
        out
    }
}

/// Generalized eigenpairs of `A x = λ B x` with `B` positive definite.
///
/// Eigenvectors are `B`-orthonormal. The largest eigenvalue is the supremum of
/// the Rayleigh quotient `x·Ax / x·Bx`.
pub fn gen_sym_eigen(a: &DenseSymMatrix, b: &DenseSymMatrix) -> Result<SymEigen> {
    if a.order != b.order {
        return Err(Error::Precondition(format!(
            "order mismatch {} vs {}",
            a.order, b.order
        )));
    }
    let chol = Cholesky::factor(b)?;
    let reduced = chol.reduce(a);
    let mut eig = sym_eigen(&reduced)?;
    let n = a.order;
    for k in 0..n {
        chol.solve_upper(&mut eig.vectors[k * n..(k + 1) * n]);
    }
    Ok(eig)
}

/// Column-major basis of `{x : C x = 0}` for a row-major `rows × cols`
/// constraint matrix, by Gaussian elimination with partial pivoting.
///
/// Returns the basis and its number of columns.
pub fn null_space_basis(constraints: &[f64], rows: usize, cols: usize) -> (Vec<f64>, usize) {
    let mut c = constraints.to_vec();
    let scale = c.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let (best, val) = (row..rows)
            .map(|r| (r, c[r * cols + col].abs()))
            .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= 1e-12 * scale {
            continue;
        }
        if best != row {
            for k in 0..cols {
                c.swap(best * cols + k, row * cols + k);
            }
        }
        let p = c[row * cols + col];
        for k in 0..cols {
            c[row * cols + k] /= p;
        }
        for r in 0..rows {
            if r != row {
                let f = c[r * cols + col];
                if f != 0.0 {
                    for k in 0..cols {
                        c[r * cols + k] -= f * c[row * cols + k];
                    }
                }
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let free: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = vec![0.0; cols * free.len()];
    for (b, &f) in free.iter().enumerate() {
        let col = &mut basis[b * cols..(b + 1) * cols];
        col[f] = 1.0;
        for &(r, pc) in &pivots {
            col[pc] = -c[r * cols + f];
        }
    }
    (basis, free.len())
}
