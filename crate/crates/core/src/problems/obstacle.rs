//! Obstacle problem `min 1/2 ||grad u||^2 - (f, u)` over `u >= chi`,
//! `u = 0` on the boundary, split as `F = I_K`, `B = id`.

use std::f64::consts::{PI, SQRT_2};

use crate::admm::{ConvexityConstants, SplittingProblem};
use crate::error::{Error, LinalgError, MeshError};
use crate::fem::{lumped_weights, mass_matrix, stiffness_matrix};
use crate::linalg::SparseMatrix;
use crate::mesh::Triangulation;
use crate::problems::FactorCache;

pub const DEFAULT_SOURCE: f64 = -5.0;
pub const DEFAULT_OBSTACLE: f64 = -0.25;

/// Quadrature for the load term `(f, v)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SourceQuadrature {
    /// `(f, v)_h` with the lumped weights.
    #[default]
    Lumped,
    /// Consistent mass matrix.
    Consistent,
}

#[derive(Debug, Clone)]
pub struct ObstacleProblem {
    mesh: Triangulation,
    f: Vec<f64>,
    chi: Vec<f64>,
    beta: Vec<f64>,
    /// Stiffness matrix without boundary conditions.
    stiffness: SparseMatrix,
    /// Load vector `(f, phi_k)`, zero at boundary nodes.
    load: Vec<f64>,
    cache: FactorCache,
}

impl ObstacleProblem {
    /// `f = -5`, `chi = -1/4`, lumped load.
    pub fn new(mesh: Triangulation) -> Self {
        let n = mesh.n_nodes();
        Self::with_data(mesh, vec![DEFAULT_SOURCE; n], vec![DEFAULT_OBSTACLE; n], SourceQuadrature::Lumped)
            .expect("constant data is admissible")
    }

    pub fn with_data(
        mesh: Triangulation,
        f: Vec<f64>,
        chi: Vec<f64>,
        quadrature: SourceQuadrature,
    ) -> Result<Self, Error> {
        let n = mesh.n_nodes();
        for v in [&f, &chi] {
            if v.len() != n {
                return Err(MeshError::LengthMismatch {
                    expected: n,
                    found: v.len(),
                }
                .into());
            }
        }
        if mesh.boundary_nodes().iter().any(|&z| chi[z] > 0.0) {
            return Err(Error::InvalidParameter("obstacle must be nonpositive on the boundary".into()));
        }
        let beta = lumped_weights(&mesh);
        let mut load = match quadrature {
            SourceQuadrature::Lumped => f.iter().zip(&beta).map(|(f, b)| f * b).collect(),
            SourceQuadrature::Consistent => mass_matrix(&mesh).matvec(&f),
        };
        for &z in mesh.boundary_nodes() {
            load[z] = 0.0;
        }
        Ok(Self {
            stiffness: stiffness_matrix(&mesh, false),
            mesh,
            f,
            chi,
            beta,
            load,
            cache: FactorCache::new(),
        })
    }

    pub fn mesh(&self) -> &Triangulation {
        &self.mesh
    }

    pub fn source(&self) -> &[f64] {
        &self.f
    }

    pub fn obstacle(&self) -> &[f64] {
        &self.chi
    }

    pub fn lumped_weights(&self) -> &[f64] {
        &self.beta
    }

    pub fn load(&self) -> &[f64] {
        &self.load
    }

    /// Dirichlet system matrix `A + tau diag(beta)` of the `u`-step.
    pub fn u_matrix(&self, tau: f64) -> SparseMatrix {
        let shift: Vec<f64> = self.beta.iter().map(|b| tau * b).collect();
        self.stiffness.add_diagonal(&shift).with_dirichlet(self.mesh.boundary_mask())
    }

    /// `G(u) = 1/2 ||grad u||^2 - (f, u)`.
    pub fn smooth_part(&self, u: &[f64]) -> f64 {
        0.5 * self.stiffness.bilinear(u, u) - dot(&self.load, u)
    }

    /// `G'(v)[d]`.
    pub fn smooth_derivative(&self, v: &[f64], d: &[f64]) -> f64 {
        self.stiffness.bilinear(v, d) - dot(&self.load, d)
    }

    /// Riesz representative of `G'(v)` in `(grad ., grad .)`, i.e.
    /// `v - A^{-1} b` on the interior.
    pub fn smooth_gradient(&self, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let a = self.stiffness.with_dirichlet(self.mesh.boundary_mask());
        let w = crate::linalg::solve_spd(&a, &self.load, crate::linalg::DEFAULT_REL_TOL)?;
        Ok(v.iter().zip(&w).map(|(v, w)| v - w).collect())
    }

    /// `||v||_h`.
    pub fn lumped_norm(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.beta).map(|(v, b)| b * v * v).sum::<f64>().sqrt()
    }

    /// Optimized constant step size `pi / (sqrt 2 h)` and its contraction factor.
    pub fn optimal_step_size(&self) -> (f64, f64) {
        let c = self.constants();
        super::optimal_step_size(
            c.alpha_g.unwrap(),
            c.lipschitz_g.unwrap(),
            c.alpha_b.unwrap(),
            c.c_b.unwrap(),
        )
        .expect("positive constants")
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

impl SplittingProblem for ObstacleProblem {
    type X = Vec<f64>;
    type Y = Vec<f64>;

    fn apply_b(&self, u: &Vec<f64>) -> Vec<f64> {
        u.clone()
    }

    fn inner_x(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        self.stiffness.bilinear(a, b)
    }

    fn inner_y(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        a.iter().zip(b).zip(&self.beta).map(|((a, b), w)| a * b * w).sum()
    }

    fn solve_p(&self, u_prev: &Vec<f64>, lambda_prev: &Vec<f64>, tau: f64) -> Vec<f64> {
        let mask = self.mesh.boundary_mask();
        (0..u_prev.len())
            .map(|z| {
                if mask[z] {
                    0.0
                } else {
                    self.chi[z].max(u_prev[z] + lambda_prev[z] / tau)
                }
            })
            .collect()
    }

    fn solve_u(&self, p: &Vec<f64>, lambda_prev: &Vec<f64>, tau: f64) -> Result<Vec<f64>, LinalgError> {
        let solver = self.cache.get_or_build(tau, || self.u_matrix(tau))?;
        let mask = self.mesh.boundary_mask();
        let rhs: Vec<f64> = (0..p.len())
            .map(|z| {
                if mask[z] {
                    0.0
                } else {
                    self.load[z] + self.beta[z] * (tau * p[z] - lambda_prev[z])
                }
            })
            .collect();
        solver.solve(&rhs, None)
    }

    fn c0_bound(&self, u: &Vec<f64>, lambda: &Vec<f64>, tau: f64) -> f64 {
        (self.lumped_norm(lambda) / tau + self.lumped_norm(u)).max(1.0)
    }

    fn error_norm(&self, reference: &Vec<f64>, u: &Vec<f64>) -> f64 {
        let e: Vec<f64> = reference.iter().zip(u).map(|(r, u)| r - u).collect();
        self.stiffness.bilinear(&e, &e).max(0.0).sqrt()
    }

    fn energy(&self, u: &Vec<f64>) -> f64 {
        if u.iter().zip(&self.chi).any(|(u, c)| *u < c - 1e-12) {
            return f64::INFINITY;
        }
        self.smooth_part(u)
    }

    fn constants(&self) -> ConvexityConstants {
        ConvexityConstants {
            alpha_g: Some(0.5),
            lipschitz_g: Some(1.0),
            alpha_b: Some(self.mesh.h() / 2.0),
            c_b: Some(2.0 * SQRT_2 / PI),
        }
    }

    fn zero_x(&self) -> Vec<f64> {
        vec![0.0; self.mesh.n_nodes()]
    }

    fn zero_y(&self) -> Vec<f64> {
        vec![0.0; self.mesh.n_nodes()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;
    use proptest::prelude::*;

    fn problem(level: u32) -> ObstacleProblem {
        ObstacleProblem::new(build_mesh(level).unwrap())
    }

    /// Minimizer of a convex differentiable scalar function over `[a, b]`
    /// by bisection on the sign of its derivative.
    fn bisect_min(df: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        if df(a) >= 0.0 {
            return a;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if df(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn p_step_examples() {
        let p = problem(2);
        let n = p.mesh().n_nodes();
        let z = (0..n).find(|&z| !p.mesh().is_boundary(z)).unwrap();
        let mut u = vec![0.0; n];
        u[z] = 0.5;
        assert_eq!(p.solve_p(&u, &vec![0.0; n], 1.0)[z], 0.5);
        u[z] = -0.5;
        assert_eq!(p.solve_p(&u, &vec![0.0; n], 1.0)[z], -0.25);
    }

    #[test]
    fn p_step_matches_scalar_minimization() {
        let p = problem(2);
        let n = p.mesh().n_nodes();
        let mut seed = 7u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..20 {
            let u: Vec<f64> = (0..n).map(|_| next()).collect();
            let lam: Vec<f64> = (0..n).map(|_| next()).collect();
            let tau = 0.1 + 5.0 * next().abs();
            let out = p.solve_p(&u, &lam, tau);
            for z in 0..n {
                if p.mesh().is_boundary(z) {
                    assert_eq!(out[z], 0.0);
                    continue;
                }
                let chi = p.obstacle()[z];
                let b = p.lumped_weights()[z];
                let d_obj = |q: f64| -lam[z] * b - tau * b * (u[z] - q);
                let q = bisect_min(d_obj, chi, 10.0);
                assert!((q - out[z]).abs() < 1e-8, "{q} vs {}", out[z]);
            }
        }
    }

    #[test]
    fn u_step_zero_data() {
        let mesh = build_mesh(3).unwrap();
        let n = mesh.n_nodes();
        let p = ObstacleProblem::with_data(mesh, vec![0.0; n], vec![-0.25; n], SourceQuadrature::Lumped).unwrap();
        let u = p.solve_u(&vec![0.0; n], &vec![0.0; n], 3.0).unwrap();
        assert!(u.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn u_step_penalty_limit() {
        let p = problem(3);
        let n = p.mesh().n_nodes();
        let target: Vec<f64> = p
            .mesh()
            .nodes()
            .iter()
            .map(|x| (PI * x[0]).sin() * (PI * x[1]).sin())
            .collect();
        let u = p.solve_u(&target, &vec![0.0; n], 1e8).unwrap();
        let diff: Vec<f64> = u.iter().zip(&target).map(|(a, b)| a - b).collect();
        assert!(p.lumped_norm(&diff) <= 1e-5);
    }

    #[test]
    fn u_step_solves_optimality_system() {
        let p = problem(3);
        let n = p.mesh().n_nodes();
        let pp: Vec<f64> = (0..n).map(|z| if p.mesh().is_boundary(z) { 0.0 } else { 0.1 * (z % 5) as f64 }).collect();
        let lam: Vec<f64> = (0..n).map(|z| if p.mesh().is_boundary(z) { 0.0 } else { -0.3 + 0.01 * z as f64 }).collect();
        let tau = 4.0;
        let u = p.solve_u(&pp, &lam, tau).unwrap();
        let au = p.stiffness.matvec(&u);
        for z in 0..n {
            if p.mesh().is_boundary(z) {
                assert_eq!(u[z], 0.0);
                continue;
            }
            let g = au[z] - p.load()[z] + p.beta[z] * (lam[z] + tau * (u[z] - pp[z]));
            assert!(g.abs() < 1e-10, "{g}");
        }
    }

    #[test]
    fn c0_examples() {
        let p = problem(3);
        let n = p.mesh().n_nodes();
        assert_eq!(p.c0_bound(&vec![0.0; n], &vec![0.0; n], 2.0), 1.0);
        let u = vec![3.0; n];
        let c = p.c0_bound(&u, &vec![0.0; n], 2.0);
        assert!((c - 3.0).abs() < 1e-12);
    }

    #[test]
    fn energy_of_zero() {
        let p = problem(3);
        assert_eq!(p.energy(&p.zero_x()), 0.0);
        let mut u = p.zero_x();
        u[10] = -1.0;
        assert_eq!(p.energy(&u), f64::INFINITY);
    }

    #[test]
    fn consistent_load_of_constant_matches_lumped() {
        let mesh = build_mesh(3).unwrap();
        let lumped = ObstacleProblem::new(mesh.clone());
        let n = mesh.n_nodes();
        let consistent =
            ObstacleProblem::with_data(mesh, vec![-5.0; n], vec![-0.25; n], SourceQuadrature::Consistent).unwrap();
        for (a, b) in lumped.load().iter().zip(consistent.load()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_positive_boundary_obstacle() {
        let mesh = build_mesh(2).unwrap();
        let n = mesh.n_nodes();
        assert!(ObstacleProblem::with_data(mesh, vec![0.0; n], vec![0.1; n], SourceQuadrature::Lumped).is_err());
    }

    #[test]
    fn optimal_step_matches_closed_form() {
        for l in 2..=7 {
            let p = problem(l);
            let h = p.mesh().h();
            let (tau, gamma) = p.optimal_step_size();
            assert!((tau * h / (PI / SQRT_2) - 1.0).abs() < 1e-12);
            assert!((gamma - 1.0 / (1.0 + PI * h / 32f64.sqrt())).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn co_coercive_and_strongly_convex(seed in 0u64..1000) {
            let p = problem(3);
            let n = p.mesh().n_nodes();
            let mut s = seed.wrapping_add(1);
            let mut next = || {
                s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            let interior = |z: usize, x: f64| if p.mesh().is_boundary(z) { 0.0 } else { x };
            let v: Vec<f64> = (0..n).map(|z| interior(z, next())).collect();
            let w: Vec<f64> = (0..n).map(|z| interior(z, next())).collect();
            let gv = p.smooth_gradient(&v).unwrap();
            let gw = p.smooth_gradient(&w).unwrap();
            let dg: Vec<f64> = gv.iter().zip(&gw).map(|(a, b)| a - b).collect();
            let d: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a - b).collect();
            let lhs = p.inner_x(&dg, &d);
            prop_assert!(lhs >= p.inner_x(&dg, &dg) - 1e-10);
            let e: Vec<f64> = w.iter().zip(&v).map(|(a, b)| a - b).collect();
            let rhs = p.smooth_part(&v) + p.smooth_derivative(&v, &e) + 0.5 * p.inner_x(&e, &e);
            prop_assert!(p.smooth_part(&w) >= rhs - 1e-10);
        }
    }
}
