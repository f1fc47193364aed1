//! Discrete Helmholtz decomposition of piecewise constant vector fields,
//! `p0 = ∇_NC α + Curl β` with `α ∈ CR¹₀` and `β ∈ S¹` of mean zero.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{assemble_stiffness, ElementGeometry, FeFunction, FeSpace, SpaceKind};
use crate::mesh::Triangulation;
use crate::numerics::{cg_solve, SparseSymMatrix};

const SOLVE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Serialize)]
pub struct HelmholtzDecomposition {
    #[serde(skip)]
    pub alpha: FeFunction,
    #[serde(skip)]
    pub beta: FeFunction,
    /// `‖p0 − ∇_NC α − Curl β‖`.
    pub residual: f64,
    /// `|(∇_NC α, Curl β)|`.
    pub orthogonality: f64,
    pub norm_grad_alpha: f64,
    pub norm_curl_beta: f64,
}

/// Piecewise gradient of `f` on element `k`.
fn grad(f: &FeFunction, k: usize, g: &ElementGeometry) -> [f64; 2] {
    let cr = f.space().kind().is_cr();
    let mut d = [0.0; 2];
    for (i, dof) in f.space().local_dofs(k).into_iter().enumerate() {
        let Some(dof) = dof else { continue };
        // CR basis 1 − 2λ_i, S1 basis λ_i
        let s = if cr { -2.0 } else { 1.0 } * f.coeffs()[dof];
        d[0] += s * g.grads[i][0];
        d[1] += s * g.grads[i][1];
    }
    d
}

fn curl(f: &FeFunction, k: usize, g: &ElementGeometry) -> [f64; 2] {
    let d = grad(f, k, g);
    [d[1], -d[0]]
}

/// Splits `p0` (one vector per element) on a simply connected triangle mesh
/// whose whole boundary carries the homogeneous condition.
pub fn verify_helmholtz(mesh: Arc<Triangulation>, p0: &[[f64; 2]]) -> Result<HelmholtzDecomposition> {
    if mesh.dim() != 2 {
        return Err(Error::UnsupportedDimension { dim: mesh.dim(), operation: "Helmholtz decomposition" });
    }
    if p0.len() != mesh.n_elements() {
        return Err(Error::Precondition(format!("{} vectors for {} elements", p0.len(), mesh.n_elements())));
    }
    if !mesh.is_simply_connected()? {
        return Err(Error::Precondition("Helmholtz decomposition needs a simply connected domain".into()));
    }
    let geo: Vec<ElementGeometry> = (0..mesh.n_elements()).map(|k| ElementGeometry::of(&mesh, k)).collect();

    let cr = Arc::new(FeSpace::new(mesh.clone(), SpaceKind::CrZero)?);
    let mut rhs = vec![0.0; cr.n_dofs()];
    for (k, g) in geo.iter().enumerate() {
        for (i, dof) in cr.local_dofs(k).into_iter().enumerate() {
            if let Some(dof) = dof {
                rhs[dof] += g.volume * -2.0 * (p0[k][0] * g.grads[i][0] + p0[k][1] * g.grads[i][1]);
            }
        }
    }
    let alpha = if cr.n_dofs() == 0 {
        FeFunction::zeros(cr)
    } else {
        FeFunction::new(cr.clone(), cg_solve(&assemble_stiffness(&cr)?, &rhs, SOLVE_TOL)?)?
    };

    let s1 = Arc::new(FeSpace::new(mesh.clone(), SpaceKind::S1Free)?);
    let mut rhs = vec![0.0; s1.n_dofs()];
    for (k, g) in geo.iter().enumerate() {
        for (i, dof) in s1.local_dofs(k).into_iter().enumerate() {
            if let Some(dof) = dof {
                rhs[dof] += g.volume * (p0[k][0] * g.grads[i][1] - p0[k][1] * g.grads[i][0]);
            }
        }
    }
    // pin the first dof; the stiffness matrix of S1 without boundary
    // conditions has the constants as its kernel
    let keep: Vec<usize> = (1..s1.n_dofs()).collect();
    let a = assemble_stiffness(&s1)?;
    let reduced: SparseSymMatrix = a.principal_submatrix(&keep);
    let b: Vec<f64> = keep.iter().map(|&i| rhs[i]).collect();
    let y = cg_solve(&reduced, &b, SOLVE_TOL)?;
    let mut coeffs = vec![0.0; s1.n_dofs()];
    for (&i, v) in keep.iter().zip(y) {
        coeffs[i] = v;
    }
    let mut beta = FeFunction::new(s1, coeffs)?;
    let broken = beta.to_broken()?;
    let all: Vec<usize> = (0..mesh.n_elements()).collect();
    let mean = broken.integral_mean(&all)?;
    beta.coeffs_mut().iter_mut().for_each(|c| *c -= mean);

    let (mut res, mut orth, mut na, mut nb) = (0.0, 0.0, 0.0, 0.0);
    for (k, g) in geo.iter().enumerate() {
        let ga = grad(&alpha, k, g);
        let cb = curl(&beta, k, g);
        let r = [p0[k][0] - ga[0] - cb[0], p0[k][1] - ga[1] - cb[1]];
        res += g.volume * (r[0] * r[0] + r[1] * r[1]);
        orth += g.volume * (ga[0] * cb[0] + ga[1] * cb[1]);
        na += g.volume * (ga[0] * ga[0] + ga[1] * ga[1]);
        nb += g.volume * (cb[0] * cb[0] + cb[1] * cb[1]);
    }
    Ok(HelmholtzDecomposition {
        alpha,
        beta,
        residual: res.sqrt(),
        orthogonality: orth.abs(),
        norm_grad_alpha: na.sqrt(),
        norm_curl_beta: nb.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::presets;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(n: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect()
    }

    #[test]
    fn random_fields_split_exactly() {
        for (mesh, seed) in [(presets::unit_square(2).unwrap(), 1), (presets::l_shape(2).unwrap(), 2)] {
            let mesh = Arc::new(mesh);
            let p0 = random_field(mesh.n_elements(), seed);
            let h = verify_helmholtz(mesh.clone(), &p0).unwrap();
            let total: f64 = p0.iter().enumerate().map(|(k, p)| mesh.volume(k) * (p[0] * p[0] + p[1] * p[1])).sum();
            assert!(h.residual <= 1e-9 * total.sqrt(), "{}", h.residual);
            assert!(h.orthogonality <= 1e-10 * total);
            assert!((h.norm_grad_alpha.powi(2) + h.norm_curl_beta.powi(2) - total).abs() <= 1e-9 * total);
        }
    }

    #[test]
    fn pure_gradient_has_no_curl_part() {
        let mesh = Arc::new(presets::unit_square(2).unwrap());
        let cr = Arc::new(FeSpace::new(mesh.clone(), SpaceKind::CrZero).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = FeFunction::new(cr.clone(), (0..cr.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let p0: Vec<[f64; 2]> = (0..mesh.n_elements()).map(|k| grad(&u, k, &ElementGeometry::of(&mesh, k))).collect();
        let h = verify_helmholtz(mesh, &p0).unwrap();
        assert!(h.norm_curl_beta < 1e-10);
        let dev = h.alpha.coeffs().iter().zip(u.coeffs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-9);
    }

    #[test]
    fn refuses_holes() {
        let mesh = Arc::new(presets::square_with_hole(1).unwrap());
        let p0 = vec![[1.0, 0.0]; mesh.n_elements()];
        assert!(matches!(verify_helmholtz(mesh, &p0), Err(Error::Precondition(_))));
    }
}
