use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::simplex::GeoSimplex;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiameterRound {
    pub round: usize,
    pub simplices: usize,
    pub max_diameter: f64,
    /// `max_diameter / h_K`.
    pub ratio: f64,
}

/// Largest diameter after each of `rounds` uniform bisection rounds.
pub fn diameter_study(reference: &GeoSimplex, rounds: usize) -> Result<Vec<DiameterRound>> {
    if rounds == 0 {
        return Err(Error::Precondition("at least one round is required".into()));
    }
    let h = reference.diameter();
    let mut level = vec![reference.clone()];
    let mut out = Vec::with_capacity(rounds);
    for round in 1..=rounds {
        level = level.iter().flat_map(|s| s.bisect()).collect();
        let max_diameter = level.iter().map(|s| s.diameter()).fold(0.0, f64::max);
        out.push(DiameterRound {
            round,
            simplices: level.len(),
            max_diameter,
            ratio: max_diameter / h,
        });
    }
    Ok(out)
}

/// The reference tetrahedron `(0, e1, e2, e3)` with the given type.
pub fn reference_tetrahedron(type_tag: u8) -> Result<GeoSimplex> {
    GeoSimplex::new(
        vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ],
        type_tag,
    )
}

/// Number of distinct similarity classes among all triangles produced by
/// `rounds` uniform bisection rounds, the input included.
pub fn similarity_classes(triangle: &GeoSimplex, rounds: usize) -> Result<usize> {
    if triangle.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: triangle.dim(),
            operation: "similarity fingerprinting",
        });
    }
    let fingerprint = |t: &GeoSimplex| {
        let mut a = t.angles().map(|x| (x * 1e8).round() as i64);
        a.sort_unstable();
        a
    };
    let mut classes = BTreeSet::new();
    let mut level = vec![triangle.clone()];
    classes.insert(fingerprint(triangle));
    for _ in 0..rounds {
        level = level.iter().flat_map(|s| s.bisect()).collect();
        classes.extend(level.iter().map(fingerprint));
    }
    Ok(classes.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_triangle_two_rounds_halves_diameter() {
        let t = GeoSimplex::new(vec![[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 1.0, 0.0]], 0).unwrap();
        let r = diameter_study(&t, 2).unwrap();
        assert_eq!(r[1].simplices, 4);
        assert!((r[1].ratio - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reference_tetrahedron_needs_seven_rounds() {
        let mut six_fails = false;
        for t in 0..3 {
            let r = diameter_study(&reference_tetrahedron(t).unwrap(), 7).unwrap();
            assert!(r[6].ratio <= 0.5 + 1e-12);
            six_fails |= r[5].ratio > 0.5;
        }
        assert!(six_fails);
    }

    #[test]
    fn zero_rounds_rejected() {
        assert!(diameter_study(&reference_tetrahedron(0).unwrap(), 0).is_err());
    }

    #[test]
    fn newest_vertex_bisection_has_few_shapes() {
        let t = GeoSimplex::new(vec![[0.0, 0.0, 0.0], [1.0, 0.2, 0.0], [0.3, 0.9, 0.0]], 0).unwrap();
        assert!(similarity_classes(&t, 10).unwrap() <= 4);
    }
}
