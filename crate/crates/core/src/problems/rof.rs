//! ROF model `min int |grad u| + alpha/2 ||u - g||^2` split with `B = grad`,
//! `Y` the elementwise constant vector fields with `(p, q)_w = h^2 sum_T |T| p_T . q_T`.

use crate::admm::{ConvexityConstants, SplittingProblem};
use crate::error::{Error, LinalgError, MeshError};
use crate::fem::{gradient, gradient_transpose, inner_weighted, mass_matrix, stiffness_matrix};
use crate::linalg::SparseMatrix;
use crate::mesh::Triangulation;
use crate::problems::FactorCache;

pub const DEFAULT_ALPHA: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct RofProblem {
    mesh: Triangulation,
    alpha: f64,
    g: Vec<f64>,
    mass: SparseMatrix,
    stiffness: SparseMatrix,
    /// `alpha M g`.
    fidelity_load: Vec<f64>,
    cache: FactorCache,
}

/// Minimizer of `c |p| + tau/2 |p - v|^2`: shrinks `v` by `c / tau`.
pub fn shrink(v: [f64; 2], threshold: f64) -> [f64; 2] {
    let norm = v[0].hypot(v[1]);
    if norm <= threshold {
        return [0.0, 0.0];
    }
    let s = (norm - threshold) / norm;
    [s * v[0], s * v[1]]
}

impl RofProblem {
    pub fn new(mesh: Triangulation, alpha: f64, g: Vec<f64>) -> Result<Self, Error> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if g.len() != mesh.n_nodes() {
            return Err(MeshError::LengthMismatch {
                expected: mesh.n_nodes(),
                found: g.len(),
            }
            .into());
        }
        let mass = mass_matrix(&mesh);
        let fidelity_load = mass.matvec(&g).iter().map(|v| alpha * v).collect();
        Ok(Self {
            stiffness: stiffness_matrix(&mesh, false),
            mesh,
            alpha,
            g,
            mass,
            fidelity_load,
            cache: FactorCache::new(),
        })
    }

    pub fn mesh(&self) -> &Triangulation {
        &self.mesh
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn datum(&self) -> &[f64] {
        &self.g
    }

    pub fn mass(&self) -> &SparseMatrix {
        &self.mass
    }

    /// Shrinkage threshold factor `c = h^-2`.
    pub fn threshold_scale(&self) -> f64 {
        self.mesh.h().powi(-2)
    }

    /// System matrix `alpha M + tau h^2 A` of the `u`-step.
    pub fn u_matrix(&self, tau: f64) -> SparseMatrix {
        let h2 = self.mesh.h().powi(2);
        self.mass.linear_combination(self.alpha, &self.stiffness, tau * h2)
    }

    /// `int |grad u|`.
    pub fn total_variation(&self, u: &[f64]) -> f64 {
        gradient(&self.mesh, u)
            .iter()
            .zip(self.mesh.areas())
            .map(|(g, a)| a * g[0].hypot(g[1]))
            .sum()
    }

    /// `G(u) = alpha/2 ||u - g||^2`.
    pub fn smooth_part(&self, u: &[f64]) -> f64 {
        let e: Vec<f64> = u.iter().zip(&self.g).map(|(u, g)| u - g).collect();
        0.5 * self.alpha * self.mass.bilinear(&e, &e)
    }

    /// `G'(v)[d]`.
    pub fn smooth_derivative(&self, v: &[f64], d: &[f64]) -> f64 {
        let e: Vec<f64> = v.iter().zip(&self.g).map(|(v, g)| v - g).collect();
        self.alpha * self.mass.bilinear(&e, d)
    }
}

impl SplittingProblem for RofProblem {
    type X = Vec<f64>;
    type Y = Vec<[f64; 2]>;

    fn apply_b(&self, u: &Vec<f64>) -> Vec<[f64; 2]> {
        gradient(&self.mesh, u)
    }

    fn inner_x(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        self.mass.bilinear(a, b)
    }

    fn inner_y(&self, a: &Vec<[f64; 2]>, b: &Vec<[f64; 2]>) -> f64 {
        inner_weighted(a, b, &self.mesh).expect("element fields match the mesh")
    }

    fn solve_p(&self, u_prev: &Vec<f64>, lambda_prev: &Vec<[f64; 2]>, tau: f64) -> Vec<[f64; 2]> {
        let threshold = self.threshold_scale() / tau;
        gradient(&self.mesh, u_prev)
            .iter()
            .zip(lambda_prev)
            .map(|(g, l)| shrink([g[0] + l[0] / tau, g[1] + l[1] / tau], threshold))
            .collect()
    }

    fn solve_u(&self, p: &Vec<[f64; 2]>, lambda_prev: &Vec<[f64; 2]>, tau: f64) -> Result<Vec<f64>, LinalgError> {
        let solver = self.cache.get_or_build(tau, || self.u_matrix(tau))?;
        let h2 = self.mesh.h().powi(2);
        let q: Vec<[f64; 2]> = p
            .iter()
            .zip(lambda_prev)
            .map(|(p, l)| [tau * p[0] - l[0], tau * p[1] - l[1]])
            .collect();
        let rhs: Vec<f64> = gradient_transpose(&self.mesh, &q)
            .iter()
            .zip(&self.fidelity_load)
            .map(|(r, f)| f + h2 * r)
            .collect();
        solver.solve(&rhs, None)
    }

    fn c0_bound(&self, u: &Vec<f64>, lambda: &Vec<[f64; 2]>, tau: f64) -> f64 {
        let first = 1.0 / (self.mesh.h() * tau);
        let second = self.norm_y(lambda) / tau + self.norm_y(&self.apply_b(u));
        first.max(second)
    }

    fn error_norm(&self, reference: &Vec<f64>, u: &Vec<f64>) -> f64 {
        let e: Vec<f64> = reference.iter().zip(u).map(|(r, u)| r - u).collect();
        (self.alpha * self.mass.bilinear(&e, &e)).max(0.0).sqrt()
    }

    fn energy(&self, u: &Vec<f64>) -> f64 {
        self.total_variation(u) + self.smooth_part(u)
    }

    fn constants(&self) -> ConvexityConstants {
        ConvexityConstants {
            alpha_g: Some(self.alpha / 2.0),
            lipschitz_g: Some(self.alpha),
            alpha_b: None,
            c_b: None,
        }
    }

    fn zero_x(&self) -> Vec<f64> {
        vec![0.0; self.mesh.n_nodes()]
    }

    fn zero_y(&self) -> Vec<[f64; 2]> {
        vec![[0.0; 2]; self.mesh.n_elements()]
    }
}
