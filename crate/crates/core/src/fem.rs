//! P1 finite element spaces on a [`Triangulation`].
//!
//! Nodal functions (continuous piecewise affine) are plain `[f64]` slices
//! indexed by node; elementwise constant fields are `[f64]` (scalar) or
//! `[[f64; 2]]` (vector) slices indexed by element.

use crate::error::{Error, LinalgError, MeshError};
use crate::linalg::{solve_spd, SparseMatrix, DEFAULT_REL_TOL};
use crate::mesh::Triangulation;

/// Elementwise constant value: a scalar or a 2-vector.
pub trait ElementValue: Copy {
    fn dot(&self, other: &Self) -> f64;
}

impl ElementValue for f64 {
    fn dot(&self, other: &Self) -> f64 {
        self * other
    }
}

impl ElementValue for [f64; 2] {
    fn dot(&self, other: &Self) -> f64 {
        self[0] * other[0] + self[1] * other[1]
    }
}

fn check_len(expected: usize, found: usize) -> Result<(), MeshError> {
    if expected == found {
        Ok(())
    } else {
        Err(MeshError::LengthMismatch { expected, found })
    }
}

/// Lumped mass weights `beta_z`, one third of the area of the patch of `z`.
pub fn lumped_weights(mesh: &Triangulation) -> Vec<f64> {
    let mut beta = vec![0.0; mesh.n_nodes()];
    for (tri, &area) in mesh.elements().iter().zip(mesh.areas()) {
        for &v in tri {
            beta[v] += area / 3.0;
        }
    }
    beta
}

/// Discrete product `(v, w)_h = sum_z beta_z v(z) w(z)`.
pub fn inner_lumped(v: &[f64], w: &[f64], beta: &[f64]) -> Result<f64, MeshError> {
    check_len(beta.len(), v.len())?;
    check_len(beta.len(), w.len())?;
    Ok(v.iter().zip(w).zip(beta).map(|((a, b), c)| a * b * c).sum())
}

/// Weighted product `(p, q)_w = h^2 sum_T |T| p_T . q_T`.
pub fn inner_weighted<V: ElementValue>(p: &[V], q: &[V], mesh: &Triangulation) -> Result<f64, MeshError> {
    check_len(mesh.n_elements(), p.len())?;
    check_len(mesh.n_elements(), q.len())?;
    let sum: f64 = p.iter().zip(q).zip(mesh.areas()).map(|((a, b), t)| t * a.dot(b)).sum();
    Ok(mesh.h().powi(2) * sum)
}

/// Stiffness matrix `(grad phi_i, grad phi_j)`. With `dirichlet`, boundary
/// rows and columns are replaced by identity rows.
pub fn stiffness_matrix(mesh: &Triangulation, dirichlet: bool) -> SparseMatrix {
    let mut triplets = Vec::with_capacity(9 * mesh.n_elements());
    for (t, tri) in mesh.elements().iter().enumerate() {
        let g = mesh.basis_gradients(t);
        let area = mesh.areas()[t];
        for a in 0..3 {
            for b in 0..3 {
                triplets.push((tri[a], tri[b], area * g[a].dot(&g[b])));
            }
        }
    }
    let a = SparseMatrix::from_triplets(mesh.n_nodes(), &triplets).expect("mesh indices in range");
    if dirichlet {
        a.with_dirichlet(mesh.boundary_mask())
    } else {
        a
    }
}

/// Consistent P1 mass matrix `(phi_i, phi_j)`.
pub fn mass_matrix(mesh: &Triangulation) -> SparseMatrix {
    let mut triplets = Vec::with_capacity(9 * mesh.n_elements());
    for (tri, &area) in mesh.elements().iter().zip(mesh.areas()) {
        for a in 0..3 {
            for b in 0..3 {
                let w = if a == b { area / 6.0 } else { area / 12.0 };
                triplets.push((tri[a], tri[b], w));
            }
        }
    }
    SparseMatrix::from_triplets(mesh.n_nodes(), &triplets).expect("mesh indices in range")
}

/// Elementwise gradient of a nodal function.
pub fn gradient(mesh: &Triangulation, u: &[f64]) -> Vec<[f64; 2]> {
    assert_eq!(u.len(), mesh.n_nodes(), "gradient: nodal vector length");
    mesh.elements()
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let g = mesh.basis_gradients(t);
            let mut out = [0.0; 2];
            for a in 0..3 {
                out[0] += u[tri[a]] * g[a][0];
                out[1] += u[tri[a]] * g[a][1];
            }
            out
        })
        .collect()
}

/// Transpose of [`gradient`] with respect to the unweighted element
/// product: returns `r` with `r_k = sum_T |T| q_T . grad phi_k|_T`, so that
/// `sum_T |T| grad(u)_T . q_T = u . r`.
pub fn gradient_transpose(mesh: &Triangulation, q: &[[f64; 2]]) -> Vec<f64> {
    assert_eq!(q.len(), mesh.n_elements(), "gradient_transpose: field length");
    let mut r = vec![0.0; mesh.n_nodes()];
    for (t, tri) in mesh.elements().iter().enumerate() {
        let g = mesh.basis_gradients(t);
        let area = mesh.areas()[t];
        for a in 0..3 {
            r[tri[a]] += area * g[a].dot(&q[t]);
        }
    }
    r
}

/// Discrete divergence defined by `-(div q, v) = (q, grad v)_w` for all
/// nodal `v`, with the consistent mass matrix on the left.
pub fn divergence(mesh: &Triangulation, mass: &SparseMatrix, q: &[[f64; 2]]) -> Result<Vec<f64>, LinalgError> {
    let h2 = mesh.h().powi(2);
    let rhs: Vec<f64> = gradient_transpose(mesh, q).iter().map(|r| -h2 * r).collect();
    solve_spd(mass, &rhs, DEFAULT_REL_TOL)
}

/// Nodal interpolant of a pointwise function.
pub fn interpolate(mesh: &Triangulation, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    mesh.nodes().iter().map(|&x| f(x)).collect()
}

/// Evaluates a nodal function of level `coarse_level` at the nodes of
/// level `fine_level`.
pub fn prolongate(coarse: &[f64], coarse_level: u32, fine_level: u32) -> Result<Vec<f64>, Error> {
    if fine_level < coarse_level || fine_level > crate::mesh::MAX_LEVEL {
        return Err(MeshError::NonNested {
            coarse: coarse_level,
            fine: fine_level,
        }
        .into());
    }
    let side = (1usize << coarse_level) + 1;
    check_len(side * side, coarse.len())?;
    let mut values = coarse.to_vec();
    for level in coarse_level..fine_level {
        values = refine_once(&values, level);
    }
    Ok(values)
}

/// Midpoint interpolation onto the next level. Every new node is the
/// midpoint of a horizontal, vertical or diagonal edge of the coarse mesh.
fn refine_once(coarse: &[f64], level: u32) -> Vec<f64> {
    let cs = (1usize << level) + 1;
    let fs = 2 * cs - 1;
    let c = |i: usize, k: usize| coarse[k * cs + i];
    let mut fine = vec![0.0; fs * fs];
    for k in 0..fs {
        for i in 0..fs {
            let (ci, ck) = (i / 2, k / 2);
            fine[k * fs + i] = match (i % 2, k % 2) {
                (0, 0) => c(ci, ck),
                (1, 0) => 0.5 * (c(ci, ck) + c(ci + 1, ck)),
                (0, 1) => 0.5 * (c(ci, ck) + c(ci, ck + 1)),
                _ => 0.5 * (c(ci, ck) + c(ci + 1, ck + 1)),
            };
        }
    }
    fine
}

/// Weighted L2 norm `sqrt(v^T M v)`.
pub fn matrix_norm(m: &SparseMatrix, v: &[f64]) -> f64 {
    m.bilinear(v, v).max(0.0).sqrt()
}
