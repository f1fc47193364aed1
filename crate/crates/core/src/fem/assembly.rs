use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::geometry::ElementGeometry;
use crate::fem::quadrature::triangle_degree4;
use crate::fem::space::{FeFunction, FeSpace, SpaceKind};
use crate::mesh::{Point, Triangulation};
use crate::numerics::{cg_solve_with, CgOptions, CgReport, SparseSymMatrix};

const CHUNK: usize = 512;

/// Right-hand side data.
#[derive(Clone)]
pub enum Load {
    Constant(f64),
    /// One value per element.
    Elementwise(Vec<f64>),
    /// Integrated with the degree-4 triangle rule.
    Callable(Arc<dyn Fn(&Point) -> f64 + Send + Sync>),
}

impl fmt::Debug for Load {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Load::Constant(c) => write!(f, "Constant({c})"),
            Load::Elementwise(v) => write!(f, "Elementwise({} values)", v.len()),
            Load::Callable(_) => write!(f, "Callable"),
        }
    }
}

impl Load {
    pub fn callable(f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        Load::Callable(Arc::new(f))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Load::Constant(c) => *c == 0.0,
            Load::Elementwise(v) => v.iter().all(|&x| x == 0.0),
            Load::Callable(_) => false,
        }
    }

    fn check(&self, mesh: &Triangulation) -> Result<()> {
        match self {
            Load::Elementwise(v) if v.len() != mesh.n_elements() => Err(Error::SpaceMismatch(format!(
                "{} load values for {} elements",
                v.len(),
                mesh.n_elements()
            ))),
            Load::Callable(_) if mesh.dim() != 2 => Err(Error::UnsupportedDimension {
                dim: mesh.dim(),
                operation: "quadrature of callable loads",
            }),
            _ => Ok(()),
        }
    }

    /// `∫_K f φ` for a basis function given by its barycentric form.
    fn integrate(&self, k: usize, g: &ElementGeometry, phi: impl Fn(&[f64]) -> f64) -> f64 {
        match self {
            Load::Constant(c) => c * g.volume * phi(&centroid_bary(g.dim)),
            Load::Elementwise(v) => v[k] * g.volume * phi(&centroid_bary(g.dim)),
            Load::Callable(f) => triangle_degree4()
                .iter()
                .map(|(l, w)| w * f(&g.point_at(l)) * phi(l))
                .sum::<f64>()
                * g.volume,
        }
    }

    /// `‖f‖²_{L²(K)}`.
    pub fn l2_sq_element(&self, mesh: &Triangulation, k: usize) -> f64 {
        let vol = mesh.volume(k);
        match self {
            Load::Constant(c) => c * c * vol,
            Load::Elementwise(v) => v[k] * v[k] * vol,
            Load::Callable(f) => {
                let g = ElementGeometry::of(mesh, k);
                triangle_degree4()
                    .iter()
                    .map(|(l, w)| {
                        let y = f(&g.point_at(l));
                        w * y * y
                    })
                    .sum::<f64>()
                    * vol
            }
        }
    }
}

// affine basis functions integrate exactly at the centroid
fn centroid_bary(dim: usize) -> [f64; 4] {
    let mut l = [0.0; 4];
    for x in l.iter_mut().take(dim + 1) {
        *x = 1.0 / (dim + 1) as f64;
    }
    l
}

/// Local stiffness matrix in the element's local dof order.
pub fn local_stiffness(kind: SpaceKind, g: &ElementGeometry) -> Result<[[f64; 4]; 4]> {
    let n = g.dim;
    let scale = match kind {
        SpaceKind::S1Zero | SpaceKind::S1Free => 1.0,
        SpaceKind::CrZero | SpaceKind::CrFree => (n * n) as f64,
        _ => {
            return Err(Error::SpaceMismatch(
                "piecewise constants have no stiffness matrix".into(),
            ))
        }
    };
    let mut a = [[0.0; 4]; 4];
    for i in 0..=n {
        for j in 0..=n {
            a[i][j] = scale * g.volume * g.grad_dot(i, j);
        }
    }
    Ok(a)
}

/// Local mass matrix in the element's local dof order.
pub fn local_mass(kind: SpaceKind, g: &ElementGeometry) -> [[f64; 4]; 4] {
    let n = g.dim as f64;
    let mut m = [[0.0; 4]; 4];
    let size = match kind {
        SpaceKind::P0Scalar => 1,
        SpaceKind::P0Vector => g.dim,
        _ => g.dim + 1,
    };
    for i in 0..size {
        for j in 0..size {
            let delta = if i == j { 1.0 } else { 0.0 };
            let lam = (1.0 + delta) / ((n + 1.0) * (n + 2.0));
            m[i][j] = g.volume
                * match kind {
                    SpaceKind::S1Zero | SpaceKind::S1Free => lam,
                    // ∫(1 − nλ_i)(1 − nλ_j)
                    SpaceKind::CrZero | SpaceKind::CrFree => 1.0 - 2.0 * n / (n + 1.0) + n * n * lam,
                    SpaceKind::P0Scalar | SpaceKind::P0Vector => delta,
                };
        }
    }
    m
}

fn assemble_with(
    space: &FeSpace,
    local: impl Fn(&ElementGeometry) -> Result<[[f64; 4]; 4]> + Sync,
) -> Result<SparseSymMatrix> {
    let mesh = space.mesh();
    let nel = mesh.n_elements();
    let chunks: Vec<Result<Vec<(usize, usize, f64)>>> = (0..nel.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut out = Vec::new();
            for k in c * CHUNK..((c + 1) * CHUNK).min(nel) {
                let g = ElementGeometry::of(mesh, k);
                let a = local(&g)?;
                let dofs = space.local_dofs(k);
                for (i, di) in dofs.iter().enumerate() {
                    let Some(di) = di else { continue };
                    for (j, dj) in dofs.iter().enumerate() {
                        let Some(dj) = dj else { continue };
                        out.push((*di, *dj, a[i][j]));
                    }
                }
            }
            Ok(out)
        })
        .collect();
    let mut triplets = Vec::new();
    for c in chunks {
        triplets.extend(c?);
    }
    SparseSymMatrix::from_triplets(space.n_dofs(), triplets)
}

pub fn assemble_stiffness(space: &FeSpace) -> Result<SparseSymMatrix> {
    let kind = space.kind();
    assemble_with(space, |g| local_stiffness(kind, g))
}

pub fn assemble_mass(space: &FeSpace) -> Result<SparseSymMatrix> {
    let kind = space.kind();
    assemble_with(space, |g| Ok(local_mass(kind, g)))
}

pub fn assemble_load(space: &FeSpace, f: &Load) -> Result<Vec<f64>> {
    let mesh = space.mesh();
    f.check(mesh)?;
    let n = mesh.dim();
    let kind = space.kind();
    if kind == SpaceKind::P0Vector {
        return Err(Error::SpaceMismatch("scalar load against a vector space".into()));
    }
    let nel = mesh.n_elements();
    let parts: Vec<Vec<(usize, f64)>> = (0..nel.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut out = Vec::new();
            for k in c * CHUNK..((c + 1) * CHUNK).min(nel) {
                let g = ElementGeometry::of(mesh, k);
                for (i, d) in space.local_dofs(k).into_iter().enumerate() {
                    let Some(d) = d else { continue };
                    let val = match kind {
                        SpaceKind::S1Zero | SpaceKind::S1Free => f.integrate(k, &g, |l| l[i]),
                        SpaceKind::CrZero | SpaceKind::CrFree => {
                            f.integrate(k, &g, |l| 1.0 - n as f64 * l[i])
                        }
                        _ => f.integrate(k, &g, |_| 1.0),
                    };
                    out.push((d, val));
                }
            }
            out
        })
        .collect();
    let mut b = vec![0.0; space.n_dofs()];
    for part in parts {
        for (d, v) in part {
            b[d] += v;
        }
    }
    Ok(b)
}

/// Nodal interpolation into a conforming space.
pub fn interpolate_s1(space: Arc<FeSpace>, f: impl Fn(&Point) -> f64) -> Result<FeFunction> {
    if !space.kind().is_conforming() {
        return Err(Error::SpaceMismatch("nodal interpolation needs an S1 space".into()));
    }
    let coeffs = (0..space.n_dofs())
        .map(|d| f(&space.mesh().coords()[space.entity(d)]))
        .collect();
    FeFunction::new(space, coeffs)
}

/// Galerkin solution of `−Δu = f` with homogeneous Dirichlet data.
///
/// The residual target is 1e-12 up to 10⁴ unknowns and grows linearly
/// beyond; rounding in the matrix-vector products puts a floor of roughly
/// that size under what CG can reach.
pub fn solve_poisson(space: Arc<FeSpace>, f: &Load) -> Result<FeFunction> {
    let tol = 1e-12 * (space.n_dofs() as f64 / 1e4).max(1.0);
    solve_poisson_with(space, f, CgOptions { tol, ..CgOptions::default() }).map(|(u, _)| u)
}

pub fn solve_poisson_with(
    space: Arc<FeSpace>,
    f: &Load,
    options: CgOptions,
) -> Result<(FeFunction, CgReport)> {
    if !matches!(space.kind(), SpaceKind::S1Zero | SpaceKind::CrZero) {
        return Err(Error::Precondition(
            "Poisson solves need a space with homogeneous boundary conditions".into(),
        ));
    }
    let a = assemble_stiffness(&space)?;
    let b = assemble_load(&space, f)?;
    let report = cg_solve_with(&a, &b, options)?;
    let u = FeFunction::new(space, report.solution.clone())?;
    Ok((u, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::presets;
    use crate::numerics::{gen_sym_eigen, Cholesky, DenseSymMatrix};

    fn unit_area_triangle() -> ElementGeometry {
        ElementGeometry::new(&[[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.3, 1.0, 0.0]])
    }

    #[test]
    fn p1_mass_spectrum() {
        let g = unit_area_triangle();
        assert!((g.volume - 1.0).abs() < 1e-15);
        let m = local_mass(SpaceKind::S1Free, &g);
        let d = DenseSymMatrix::from_upper_fn(3, |i, j| m[i][j]);
        let e = crate::numerics::sym_eigen(&d).unwrap();
        for (got, want) in e.values.iter().zip([1.0 / 12.0, 1.0 / 12.0, 1.0 / 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn right_isosceles_inverse_ratio() {
        let g = ElementGeometry::new(&[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let a = local_stiffness(SpaceKind::S1Free, &g).unwrap();
        let m = local_mass(SpaceKind::S1Free, &g);
        let e = gen_sym_eigen(
            &DenseSymMatrix::from_upper_fn(3, |i, j| a[i][j]),
            &DenseSymMatrix::from_upper_fn(3, |i, j| m[i][j]),
        )
        .unwrap();
        assert!((e.max().unwrap().0 - 18.0 / g.volume).abs() < 1e-10);
    }

    #[test]
    fn cr_mass_is_diagonal_third() {
        let g = unit_area_triangle();
        let m = local_mass(SpaceKind::CrFree, &g);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 / 3.0 } else { 0.0 };
                assert!((m[i][j] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cr_stiffness_kills_constants() {
        let m = Arc::new(presets::triangle().unwrap());
        let s = FeSpace::new(m, SpaceKind::CrFree).unwrap();
        let a = assemble_stiffness(&s).unwrap();
        assert!(a.matvec(&[1.0, 1.0, 1.0]).iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn free_space_row_sums_vanish() {
        let m = Arc::new(crate::mesh::refine_conforming(&presets::l_shape(1).unwrap(), &[2, 5]).unwrap());
        for kind in [SpaceKind::S1Free, SpaceKind::CrFree] {
            let a = assemble_stiffness(&FeSpace::new(m.clone(), kind).unwrap()).unwrap();
            assert!(a.row_sums().iter().all(|r| r.abs() < 1e-12));
        }
    }

    #[test]
    fn poisson_zero_load_gives_zero() {
        let m = Arc::new(presets::unit_square(2).unwrap());
        let s = Arc::new(FeSpace::new(m, SpaceKind::CrZero).unwrap());
        let u = solve_poisson(s, &Load::Constant(0.0)).unwrap();
        assert!(u.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn cg_matches_dense_cholesky() {
        let m = Arc::new(presets::unit_square(4).unwrap());
        let s = Arc::new(FeSpace::new(m, SpaceKind::S1Zero).unwrap());
        let u = solve_poisson(s.clone(), &Load::Constant(1.0)).unwrap();
        let a = assemble_stiffness(&s).unwrap().to_dense();
        let b = assemble_load(&s, &Load::Constant(1.0)).unwrap();
        let x = Cholesky::factor(&a).unwrap().solve(&b);
        for (p, q) in u.coeffs().iter().zip(&x) {
            assert!((p - q).abs() < 1e-8);
        }
    }

    #[test]
    fn square_symmetry_of_solution() {
        let m = Arc::new(presets::unit_square(4).unwrap());
        let s = Arc::new(FeSpace::new(m.clone(), SpaceKind::S1Zero).unwrap());
        let u = solve_poisson(s.clone(), &Load::Constant(1.0)).unwrap();
        let value = |x: f64, y: f64| {
            let z = m.coords().iter().position(|p| p[0] == x && p[1] == y).unwrap();
            u.entity_value(z)
        };
        let maps: [fn(f64, f64) -> (f64, f64); 4] = [
            |x, y| (y, x),
            |x, y| (1.0 - x, y),
            |x, y| (x, 1.0 - y),
            |x, y| (1.0 - y, 1.0 - x),
        ];
        for d in 0..s.n_dofs() {
            let p = m.coords()[s.entity(d)];
            for map in maps {
                let (x, y) = map(p[0], p[1]);
                assert!((value(p[0], p[1]) - value(x, y)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn callable_load_matches_constant() {
        let m = Arc::new(presets::unit_square(2).unwrap());
        let s = FeSpace::new(m, SpaceKind::CrZero).unwrap();
        let a = assemble_load(&s, &Load::Constant(3.0)).unwrap();
        let b = assemble_load(&s, &Load::callable(|_| 3.0)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn refinement_increases_discrete_energy() {
        let m = Arc::new(presets::l_shape(1).unwrap());
        let f = Arc::new(crate::mesh::refine_uniform(&m, 2).unwrap());
        let energy = |mesh: Arc<Triangulation>| {
            let s = Arc::new(FeSpace::new(mesh, SpaceKind::S1Zero).unwrap());
            solve_poisson(s, &Load::Constant(1.0)).unwrap().to_broken().unwrap().energy_sq()
        };
        assert!(energy(f) >= energy(m));
    }
}
