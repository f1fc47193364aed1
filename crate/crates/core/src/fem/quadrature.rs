//! Exact barycentric integration and a few fixed rules.

/// `∫_T λ^α dx = |T| n! α! / (n + |α|)!` on an `n`-simplex of volume `|T|`.
pub fn barycentric_monomial(volume: f64, n: usize, alpha: &[usize]) -> f64 {
    let fact = |k: usize| (1..=k).map(|x| x as f64).product::<f64>();
    let total: usize = alpha.iter().sum();
    volume * fact(n) * alpha.iter().map(|&a| fact(a)).product::<f64>() / fact(n + total)
}

/// Symmetric six-point rule on the triangle, exact for degree 4.
/// Entries are `(barycentric coordinates, weight)`; weights sum to one.
pub fn triangle_degree4() -> [([f64; 3], f64); 6] {
    const A: f64 = 0.445_948_490_915_965;
    const WA: f64 = 0.223_381_589_678_011;
    const B: f64 = 0.091_576_213_509_771;
    const WB: f64 = 0.109_951_743_655_322;
    [
        ([A, A, 1.0 - 2.0 * A], WA),
        ([A, 1.0 - 2.0 * A, A], WA),
        ([1.0 - 2.0 * A, A, A], WA),
        ([B, B, 1.0 - 2.0 * B], WB),
        ([B, 1.0 - 2.0 * B, B], WB),
        ([1.0 - 2.0 * B, B, B], WB),
    ]
}

/// Gauss–Legendre on `[0, 1]`; entries are `(node, weight)`.
pub fn gauss_segment(points: usize) -> Vec<(f64, f64)> {
    match points {
        1 => vec![(0.5, 1.0)],
        2 => {
            let d = 0.5 / 3f64.sqrt();
            vec![(0.5 - d, 0.5), (0.5 + d, 0.5)]
        }
        3 => {
            let d = 0.5 * (0.6f64).sqrt();
            vec![(0.5 - d, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + d, 5.0 / 18.0)]
        }
        _ => {
            let a = (3.0 / 7.0 - 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
            let b = (3.0 / 7.0 + 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
            let wa = (18.0 + 30f64.sqrt()) / 36.0;
            let wb = (18.0 - 30f64.sqrt()) / 36.0;
            vec![
                (0.5 - 0.5 * b, 0.5 * wb),
                (0.5 - 0.5 * a, 0.5 * wa),
                (0.5 + 0.5 * a, 0.5 * wa),
                (0.5 + 0.5 * b, 0.5 * wb),
            ]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_formula_matches_known_moments() {
        // ∫ λ_j λ_k = |T|(1 + δ_jk)/((n+1)(n+2))
        assert!((barycentric_monomial(1.0, 2, &[1, 1, 0]) - 1.0 / 12.0).abs() < 1e-15);
        assert!((barycentric_monomial(1.0, 2, &[2, 0, 0]) - 1.0 / 6.0).abs() < 1e-15);
        assert!((barycentric_monomial(1.0, 3, &[1, 1, 0, 0]) - 1.0 / 20.0).abs() < 1e-15);
        assert!((barycentric_monomial(2.0, 2, &[0, 0, 0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn degree4_rule_is_exact_on_monomials() {
        let rule = triangle_degree4();
        for a in 0..=4usize {
            for b in 0..=(4 - a) {
                for c in 0..=(4 - a - b) {
                    let q: f64 = rule
                        .iter()
                        .map(|(l, w)| w * l[0].powi(a as i32) * l[1].powi(b as i32) * l[2].powi(c as i32))
                        .sum();
                    let exact = barycentric_monomial(1.0, 2, &[a, b, c]);
                    assert!((q - exact).abs() < 1e-14, "{a}{b}{c}: {q} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn gauss_rules_integrate_polynomials() {
        for (n, deg) in [(1, 1), (2, 3), (3, 5), (4, 7)] {
            let r = gauss_segment(n);
            let q: f64 = r.iter().map(|(x, w)| w * x.powi(deg)).sum();
            assert!((q - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14);
        }
    }
}
