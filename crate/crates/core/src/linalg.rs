//! Sparse symmetric positive definite linear algebra.
//!
//! Matrices are stored in compressed row form. Two solvers are provided for
//! the quadratic subproblems: an unpreconditioned/Jacobi conjugate gradient
//! method ([`solve_spd`], [`solve_spd_with`]) and a banded Cholesky
//! factorization ([`BandedCholesky`]) that can be reused across iterations
//! while the step size is unchanged.

use crate::error::LinalgError;

/// Default relative residual tolerance for subproblem solves.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

/// Compressed-row sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Square `n x n` matrix with no stored entries.
    pub fn zeros(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: vec![0; n + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Assembles a square matrix from `(row, col, value)` triplets.
    ///
    /// Duplicates are summed and entries that sum to exactly zero are dropped.
    /// The result does not depend on the order of the triplets beyond the
    /// floating point order of summation of duplicates, which follows the
    /// input order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self, LinalgError> {
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(LinalgError::IndexOutOfRange { row: i, col: j, n });
            }
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        // stable sort keeps input order among duplicates
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));

        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut k = 0;
        while k < order.len() {
            let (i, j, _) = triplets[order[k]];
            let mut sum = 0.0;
            while k < order.len() && triplets[order[k]].0 == i && triplets[order[k]].1 == j {
                sum += triplets[order[k]].2;
                k += 1;
            }
            if sum != 0.0 {
                col_idx.push(j);
                values.push(sum);
                row_ptr[i + 1] += 1;
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            n_rows: n,
            n_cols: n,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Entry `(i, j)`, zero if not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols, "matvec: dimension mismatch");
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &a)| a * x[j]).sum();
        }
    }

    /// Quadratic form `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n_rows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                x[i] * cols.iter().zip(vals).map(|(&j, &a)| a * y[j]).sum::<f64>()
            })
            .sum()
    }

    /// `self + diag(d)`.
    pub fn add_diagonal(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.n_rows);
        let mut triplets = self.triplets();
        triplets.extend(d.iter().enumerate().map(|(i, &v)| (i, i, v)));
        Self::from_triplets(self.n_rows, &triplets).expect("indices in range")
    }

    /// `a * self + b * other` for matrices of equal size.
    pub fn linear_combination(&self, a: f64, other: &SparseMatrix, b: f64) -> Self {
        assert_eq!(self.n_rows, other.n_rows);
        let mut triplets: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (i, j, a * v)).collect();
        triplets.extend(other.triplets().into_iter().map(|(i, j, v)| (i, j, b * v)));
        Self::from_triplets(self.n_rows, &triplets).expect("indices in range")
    }

    /// Replaces the rows and columns flagged in `fixed` by identity rows.
    pub fn with_dirichlet(&self, fixed: &[bool]) -> Self {
        assert_eq!(fixed.len(), self.n_rows);
        let mut triplets: Vec<_> = self
            .triplets()
            .into_iter()
            .filter(|&(i, j, _)| !fixed[i] && !fixed[j])
            .collect();
        triplets.extend(fixed.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| (i, i, 1.0)));
        Self::from_triplets(self.n_rows, &triplets).expect("indices in range")
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            out.extend(cols.iter().zip(vals).map(|(&j, &v)| (i, j, v)));
        }
        out
    }

    /// Exact symmetry check `a(i,j) == a(j,i)`.
    pub fn is_symmetric(&self) -> bool {
        self.triplets().iter().all(|&(i, j, v)| self.get(j, i) == v)
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.triplets().iter().map(|&(i, j, _)| i.abs_diff(j)).max().unwrap_or(0)
    }

    /// Dense row-major copy, for small matrices and tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
        }
        d
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Options for the conjugate gradient solver.
#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    pub rel_tol: f64,
    /// Iteration cap; `None` means `10 * n`.
    pub max_iter: Option<usize>,
    /// Diagonal (Jacobi) preconditioning.
    pub jacobi: bool,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            max_iter: None,
            jacobi: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `||b - Ax||_2 / ||b||_2`, computed from the true residual.
    pub rel_residual: f64,
}

/// Solves `A x = b` for symmetric positive definite `A` so that
/// `||Ax - b||_2 <= rel_tol * ||b||_2`.
pub fn solve_spd(a: &SparseMatrix, b: &[f64], rel_tol: f64) -> Result<Vec<f64>, LinalgError> {
    let opts = CgOptions {
        rel_tol,
        ..CgOptions::default()
    };
    solve_spd_with(a, b, None, &opts).map(|o| o.x)
}

/// Conjugate gradients with an optional initial guess.
///
/// The stopping test is applied to the recursively updated residual and then
/// confirmed on the true residual `b - Ax`; if the two disagree the
/// iteration is restarted from the current iterate.
pub fn solve_spd_with(
    a: &SparseMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &CgOptions,
) -> Result<CgOutcome, LinalgError> {
    let n = a.n_rows();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    if opts.rel_tol.is_nan() || opts.rel_tol <= 0.0 {
        return Err(LinalgError::InvalidTolerance(opts.rel_tol));
    }
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            rel_residual: 0.0,
        });
    }
    let target = opts.rel_tol * b_norm;
    let max_iter = opts.max_iter.unwrap_or(10 * n.max(1));
    let inv_diag: Option<Vec<f64>> = opts
        .jacobi
        .then(|| a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect());
    let precondition = |r: &[f64], z: &mut [f64]| match &inv_diag {
        Some(m) => z.iter_mut().zip(r).zip(m).for_each(|((zi, ri), mi)| *zi = ri * mi),
        None => z.copy_from_slice(r),
    };

    let mut x = match x0 {
        Some(g) if g.len() == n => g.to_vec(),
        _ => vec![0.0; n],
    };
    let mut r = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut iterations = 0;
    // at most a few true-residual restarts
    for _ in 0..8 {
        a.matvec_into(&x, &mut ap);
        r.iter_mut().zip(b).zip(&ap).for_each(|((ri, bi), ai)| *ri = bi - ai);
        let true_res = norm2(&r);
        if true_res <= target {
            return Ok(CgOutcome {
                x,
                iterations,
                rel_residual: true_res / b_norm,
            });
        }
        if iterations >= max_iter {
            return Err(LinalgError::NotConverged {
                iterations,
                rel_residual: true_res / b_norm,
            });
        }
        precondition(&r, &mut z);
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        while iterations < max_iter {
            a.matvec_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                return Err(LinalgError::NotPositiveDefinite);
            }
            let step = rz / pap;
            x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += step * pi);
            r.iter_mut().zip(&ap).for_each(|(ri, ai)| *ri -= step * ai);
            iterations += 1;
            if norm2(&r) <= target {
                break;
            }
            precondition(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        }
    }
    a.matvec_into(&x, &mut ap);
    let res = b.iter().zip(&ap).map(|(bi, ai)| (bi - ai).powi(2)).sum::<f64>().sqrt();
    Err(LinalgError::NotConverged {
        iterations,
        rel_residual: res / b_norm,
    })
}

/// Cholesky factor `A = L L^T` of a banded SPD matrix.
///
/// Row `i` of `L` is stored densely over columns `i - bw ..= i`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(a: &SparseMatrix) -> Result<Self, LinalgError> {
        let n = a.n_rows();
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j <= i {
                    l[i * w + (j + bw - i)] = v;
                }
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let k0 = lo.max(j.saturating_sub(bw));
                // L[i][k] at i*w + k + bw - i, L[j][k] at j*w + k + bw - j
                let ri = i * w + bw - i;
                let rj = j * w + bw - j;
                let mut s = l[ri + j];
                for k in k0..j {
                    s -= l[ri + k] * l[rj + k];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(LinalgError::NotPositiveDefinite);
                    }
                    l[ri + i] = s.sqrt();
                } else {
                    l[ri + j] = s / l[rj + j];
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let mut y = b.to_vec();
        for i in 0..n {
            let ri = i * w + bw - i;
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[ri + k] * y[k];
            }
            y[i] = s / self.l[ri + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= self.l[k * w + bw - k + i] * y[k];
            }
            y[i] = s / self.l[i * w + bw];
        }
        y
    }
}

/// Stored entries above which the banded factor is not used (`n * (bw + 1)`).
pub const BANDED_STORAGE_LIMIT: usize = 20_000_000;

/// A prepared solver for one SPD system matrix.
#[derive(Debug, Clone)]
pub enum SpdSolver {
    Direct(BandedCholesky),
    Iterative { matrix: SparseMatrix, options: CgOptions },
}

impl SpdSolver {
    /// Factorizes when the band fits in [`BANDED_STORAGE_LIMIT`], otherwise
    /// falls back to conjugate gradients at [`DEFAULT_REL_TOL`].
    pub fn new(a: SparseMatrix) -> Result<Self, LinalgError> {
        let storage = a.n_rows().saturating_mul(a.bandwidth() + 1);
        if storage <= BANDED_STORAGE_LIMIT {
            Ok(Self::Direct(BandedCholesky::factor(&a)?))
        } else {
            Ok(Self::iterative(a))
        }
    }

    pub fn iterative(a: SparseMatrix) -> Self {
        Self::Iterative {
            matrix: a,
            options: CgOptions {
                jacobi: true,
                ..CgOptions::default()
            },
        }
    }

    pub fn solve(&self, b: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>, LinalgError> {
        match self {
            Self::Direct(f) => Ok(f.solve(b)),
            Self::Iterative { matrix, options } => solve_spd_with(matrix, b, guess, options).map(|o| o.x),
        }
    }
}
