//! Spectra of the path and cycle matrices behind the nodal error bounds.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sym_eigen, DenseSymMatrix};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatchSpectraReport {
    pub j: usize,
    /// Largest deviation between analytic and computed eigenvalues over A, B, C.
    pub max_eigen_deviation: f64,
    /// `1/(2(1 − cos(π/J)))`.
    pub bound: f64,
    /// Largest sampled `|x|² / Σ (x_{j+1} − x_j)²` over sign-feasible `x`.
    pub max_sampled_ratio: f64,
    /// Largest sampled `|y|² / (Σ (y_{j+1} − y_j)² + (y_1 + y_J)²)` over
    /// the cyclic differences without the wrap term.
    pub max_sampled_ratio_b: f64,
    pub samples: usize,
}

/// Tridiagonal `(J−1)×(J−1)` matrix with 2 on the diagonal.
pub fn path_matrix(j: usize) -> DenseSymMatrix {
    let m = j - 1;
    DenseSymMatrix::from_upper_fn(m, |a, b| if a == b { 2.0 } else if b == a + 1 { -1.0 } else { 0.0 })
}

/// `J×J` tridiagonal matrix with corners 3.
pub fn corner_matrix(j: usize) -> DenseSymMatrix {
    if j == 1 {
        return DenseSymMatrix::from_row_major(1, vec![4.0]).expect("1x1");
    }
    DenseSymMatrix::from_upper_fn(j, |a, b| match (a, b) {
        _ if a == b && (a == 0 || a == j - 1) => 3.0,
        _ if a == b => 2.0,
        _ if b == a + 1 => -1.0,
        _ => 0.0,
    })
}

/// `J×J` cycle Laplacian.
pub fn cycle_matrix(j: usize) -> DenseSymMatrix {
    let mut c = DenseSymMatrix::zeros(j);
    for a in 0..j {
        let b = (a + 1) % j;
        c.add(a, a, 1.0);
        c.add(b, b, 1.0);
        c.add(a, b, -1.0);
    }
    c
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    v
}

fn deviation(computed: &[f64], analytic: &[f64]) -> f64 {
    computed.iter().zip(analytic).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Checks analytic spectra of the three matrices for one `J` and samples
/// the constrained Rayleigh quotient with a seeded generator.
pub fn patch_spectra(j: usize, samples: usize, seed: u64) -> Result<PatchSpectraReport> {
    if j < 2 {
        return Err(Error::Precondition(format!("patch size {j} < 2")));
    }
    let jf = j as f64;
    let a_exact: Vec<f64> = (1..j).map(|k| 2.0 * (1.0 - (k as f64 * PI / jf).cos())).collect();
    let b_exact = sorted((1..=j).map(|k| 2.0 * (1.0 - (k as f64 * PI / jf).cos())).collect());
    let c_exact = sorted((0..j).map(|k| 2.0 - 2.0 * (2.0 * k as f64 * PI / jf).cos()).collect());
    let dev = deviation(&sym_eigen(&path_matrix(j))?.values, &a_exact)
        .max(deviation(&sym_eigen(&corner_matrix(j))?.values, &b_exact))
        .max(deviation(&sym_eigen(&cycle_matrix(j))?.values, &c_exact));

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut best = 0.0_f64;
    let mut best_b = 0.0_f64;
    for _ in 0..samples {
        let mut x: Vec<f64> = (0..j).map(|_| rng.sample(StandardNormal)).collect();
        let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo > 0.0 || hi < 0.0 {
            // move a random entry to the origin to make the vector sign-feasible
            let i = rng.gen_range(0..j);
            x[i] = 0.0;
        }
        let norm: f64 = x.iter().map(|v| v * v).sum();
        let diffs: f64 = (0..j).map(|i| (x[(i + 1) % j] - x[i]).powi(2)).sum();
        if diffs > 0.0 {
            best = best.max(norm / diffs);
        }
        let wrap = (x[0] + x[j - 1]).powi(2) - (x[0] - x[j - 1]).powi(2);
        let den_b = diffs + wrap;
        if den_b > 0.0 {
            best_b = best_b.max(norm / den_b);
        }
    }
    Ok(PatchSpectraReport {
        j,
        max_eigen_deviation: dev,
        bound: 1.0 / (2.0 * (1.0 - (PI / jf).cos())),
        max_sampled_ratio: best,
        max_sampled_ratio_b: best_b,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let r = patch_spectra(2, 1000, 1).unwrap();
        assert!((r.bound - 0.5).abs() < 1e-15);
        assert!(r.max_sampled_ratio <= r.bound + 1e-15);
        let r = patch_spectra(4, 1000, 1).unwrap();
        assert!((r.bound - 1.0 / (2.0 - 2.0_f64.sqrt())).abs() < 1e-14);
        let a = sym_eigen(&path_matrix(4)).unwrap();
        assert!((a.values[0] - (2.0 - 2.0_f64.sqrt())).abs() < 1e-14);
        let c = sym_eigen(&cycle_matrix(4)).unwrap();
        // smallest nonzero eigenvalue of the 4-cycle
        assert!((c.values[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn spectra_up_to_twelve() {
        for j in 2..=12 {
            let r = patch_spectra(j, 2000, 7).unwrap();
            assert!(r.max_eigen_deviation <= 1e-12, "J={j}: {}", r.max_eigen_deviation);
            assert!(r.max_sampled_ratio <= r.bound * (1.0 + 1e-12));
            assert!(r.max_sampled_ratio_b <= r.bound * (1.0 + 1e-12));
        }
        assert!(patch_spectra(1, 10, 0).is_err());
    }
}
