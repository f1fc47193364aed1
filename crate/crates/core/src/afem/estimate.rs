//! Residual estimators and bulk marking.

use serde::{Deserialize, Serialize};

use super::Method;
use crate::error::{Error, Result};
use crate::fem::{FeFunction, Load};
use crate::mesh::Triangulation;

/// Element indicators split into volume and jump contributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorBreakdown {
    /// `|K| ‖f‖²_{L²(K)}`.
    pub volume: Vec<f64>,
    /// `|K|^{1/2} Σ_E ‖[·]‖²_{L²(E)}` over the sides that count for the method.
    pub jump: Vec<f64>,
}

impl EstimatorBreakdown {
    pub fn len(&self) -> usize {
        self.volume.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volume.is_empty()
    }

    /// `η²(T, K)`.
    pub fn indicator(&self, k: usize) -> f64 {
        self.volume[k] + self.jump[k]
    }

    pub fn indicators(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.indicator(k)).collect()
    }

    /// `η²(T, S)`.
    pub fn total_over(&self, elements: impl IntoIterator<Item = usize>) -> f64 {
        elements.into_iter().map(|k| self.indicator(k)).sum()
    }

    pub fn total(&self) -> f64 {
        self.total_over(0..self.len())
    }

    pub fn eta(&self) -> f64 {
        self.total().sqrt()
    }
}

fn unit_tangent(mesh: &Triangulation, s: usize) -> [f64; 2] {
    let v = &mesh.sides()[s].vertices;
    let (a, b) = (mesh.coords()[v[0]], mesh.coords()[v[1]]);
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let l = dx.hypot(dy);
    [dx / l, dy / l]
}

/// Evaluates the residual estimator of `solution`.
///
/// Gradients are piecewise constant, so every jump is constant along its
/// side and `‖[·]‖²_E = |E| [·]²` is exact. CFEM counts normal jumps over
/// interior sides; CRFEM counts tangential jumps over all sides, where the
/// jump on a boundary side is the one-sided value.
pub fn estimate(solution: &FeFunction, f: &Load, which: Method) -> Result<EstimatorBreakdown> {
    let space = solution.space();
    if !which.accepts(space.kind()) {
        return Err(Error::SpaceMismatch(format!(
            "{} estimator needs {:?}, got {:?}",
            which.name(),
            which.space_kind(),
            space.kind()
        )));
    }
    let mesh = space.mesh();
    if mesh.dim() != 2 {
        return Err(Error::UnsupportedDimension { dim: mesh.dim(), operation: "residual estimators" });
    }
    let broken = solution.to_broken()?;
    let grads = broken.gradients();
    let mut side_term = vec![0.0; mesh.sides().len()];
    for (s, side) in mesh.sides().iter().enumerate() {
        let t = unit_tangent(mesh, s);
        let dir = match which {
            Method::Cfem => [t[1], -t[0]],
            Method::Crfem => t,
        };
        let along = |k: usize| grads[k][0] * dir[0] + grads[k][1] * dir[1];
        let jump = match (side.elements.as_slice(), which) {
            ([a, b], _) => along(*a) - along(*b),
            ([a], Method::Crfem) => along(*a),
            _ => continue,
        };
        side_term[s] = mesh.side_measure(s) * jump * jump;
    }
    let n = mesh.n_elements();
    let mut volume = Vec::with_capacity(n);
    let mut jump = Vec::with_capacity(n);
    for k in 0..n {
        let area = mesh.volume(k);
        volume.push(area * f.l2_sq_element(mesh, k));
        jump.push(area.sqrt() * mesh.element_sides(k).iter().map(|&s| side_term[s]).sum::<f64>());
    }
    Ok(EstimatorBreakdown { volume, jump })
}

/// Smallest set `M` with `θ η²(T) ≤ η²(T, M)`: indicators in descending
/// order, ties by ascending element id. A zero estimator marks nothing.
pub fn dorfler_mark(indicators: &[f64], theta: f64) -> Result<Vec<usize>> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::Domain(format!("bulk parameter {theta} outside (0, 1]")));
    }
    let mut order: Vec<usize> = (0..indicators.len()).collect();
    order.sort_by(|&a, &b| indicators[b].total_cmp(&indicators[a]).then(a.cmp(&b)));
    // summing in the same order as the greedy loop keeps θ = 1 exact
    let total: f64 = order.iter().map(|&k| indicators[k]).sum();
    if total <= 0.0 {
        return Ok(Vec::new());
    }
    if theta >= 1.0 {
        return Ok(order.into_iter().filter(|&k| indicators[k] > 0.0).collect());
    }
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for k in order {
        if acc >= theta * total {
            break;
        }
        acc += indicators[k];
        marked.push(k);
    }
    Ok(marked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{interpolate_s1, solve_poisson, FeSpace, SpaceKind};
    use crate::mesh::presets;
    use std::sync::Arc;

    #[test]
    fn zero_data_zero_estimator() {
        let mesh = Arc::new(presets::unit_square(2).unwrap());
        for which in [Method::Cfem, Method::Crfem] {
            let space = Arc::new(FeSpace::new(mesh.clone(), which.space_kind()).unwrap());
            let u = FeFunction::zeros(space);
            let e = estimate(&u, &Load::Constant(0.0), which).unwrap();
            assert_eq!(e.total(), 0.0);
        }
    }

    #[test]
    fn affine_function_has_no_normal_jumps() {
        let mesh = Arc::new(presets::unit_square(2).unwrap());
        let free = Arc::new(FeSpace::new(mesh.clone(), SpaceKind::S1Free).unwrap());
        let u = interpolate_s1(free, |p| 2.0 * p[0] - p[1] + 0.5).unwrap();
        let e = estimate(&u, &Load::Constant(0.0), Method::Cfem).unwrap();
        assert!(e.total() < 1e-24, "{}", e.total());
        let err = estimate(&u, &Load::Constant(0.0), Method::Crfem).unwrap_err();
        assert!(matches!(err, Error::SpaceMismatch(_)));
    }

    #[test]
    fn additivity_and_positivity() {
        let mesh = Arc::new(presets::l_shape(2).unwrap());
        for which in [Method::Cfem, Method::Crfem] {
            let space = Arc::new(FeSpace::new(mesh.clone(), which.space_kind()).unwrap());
            let u = solve_poisson(space, &Load::Constant(1.0)).unwrap();
            let e = estimate(&u, &Load::Constant(1.0), which).unwrap();
            assert!(e.volume.iter().chain(&e.jump).all(|&x| x >= 0.0));
            let evens = e.total_over((0..e.len()).filter(|k| k % 2 == 0));
            let odds = e.total_over((0..e.len()).filter(|k| k % 2 == 1));
            assert!((evens + odds - e.total()).abs() <= 1e-14 * e.total());
        }
    }

    #[test]
    fn dorfler_examples() {
        assert_eq!(dorfler_mark(&[4.0, 3.0, 2.0, 1.0], 0.5).unwrap(), vec![0, 1]);
        assert_eq!(dorfler_mark(&[1.0, 3.0, 4.0, 2.0], 0.5).unwrap(), vec![2, 1]);
        assert_eq!(dorfler_mark(&[0.0, 2.0, 5.0], 1e-9).unwrap(), vec![2]);
        assert_eq!(dorfler_mark(&[0.0, 2.0, 5.0, 0.1], 1.0).unwrap(), vec![2, 1, 3]);
        assert_eq!(dorfler_mark(&[2.0, 2.0, 2.0], 0.5).unwrap(), vec![0, 1]);
        assert!(dorfler_mark(&[0.0, 0.0], 0.3).unwrap().is_empty());
        assert!(dorfler_mark(&[1.0], 0.0).is_err());
        assert!(dorfler_mark(&[1.0], 1.5).is_err());
    }
}
