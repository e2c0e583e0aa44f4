use crate::error::LinalgError;

/// Minimal vector-space operations needed by the iteration.
pub trait Field: Clone + Send + Sync {
    /// `a * self + b * other`.
    fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self;
}

impl Field for Vec<f64> {
    fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.len(), other.len());
        self.iter().zip(other).map(|(x, y)| a * x + b * y).collect()
    }
}

impl Field for Vec<[f64; 2]> {
    fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.len(), other.len());
        self.iter()
            .zip(other)
            .map(|(x, y)| [a * x[0] + b * y[0], a * x[1] + b * y[1]])
            .collect()
    }
}

/// Constants entering the optimized step size; `None` where unknown.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConvexityConstants {
    /// Strong convexity of `G` in the `X` norm.
    pub alpha_g: Option<f64>,
    /// Lipschitz constant of the `X`-gradient of `G`.
    pub lipschitz_g: Option<f64>,
    /// Lower bound `||B' mu||_X >= alpha_b ||mu||_Y`.
    pub alpha_b: Option<f64>,
    /// Upper bound `||B v||_Y <= c_b ||v||_X`.
    pub c_b: Option<f64>,
}

/// A problem `inf_u F(Bu) + G(u)` with the two partial minimizations of the
/// augmented Lagrangian
/// `L_tau(u, p; lambda) = F(p) + G(u) + (lambda, Bu - p)_Y + tau/2 ||Bu - p||_Y^2`.
pub trait SplittingProblem: Sync {
    type X: Field;
    type Y: Field;

    fn apply_b(&self, u: &Self::X) -> Self::Y;
    fn inner_x(&self, a: &Self::X, b: &Self::X) -> f64;
    fn inner_y(&self, a: &Self::Y, b: &Self::Y) -> f64;

    /// Minimizer of `p -> L_tau(u_prev, p; lambda_prev)`.
    fn solve_p(&self, u_prev: &Self::X, lambda_prev: &Self::Y, tau: f64) -> Self::Y;

    /// Minimizer of `u -> L_tau(u, p; lambda_prev)`.
    fn solve_u(&self, p: &Self::Y, lambda_prev: &Self::Y, tau: f64) -> Result<Self::X, LinalgError>;

    /// Computable bound on the constant relating the residual to the error.
    fn c0_bound(&self, u: &Self::X, lambda: &Self::Y, tau: f64) -> f64;

    /// `sqrt(rho_G(v, w) + rho_G(w, v))`, the error measure controlled by the residual.
    fn error_norm(&self, reference: &Self::X, u: &Self::X) -> f64;

    /// `I(u) = F(Bu) + G(u)`.
    fn energy(&self, u: &Self::X) -> f64;

    fn constants(&self) -> ConvexityConstants;

    fn zero_x(&self) -> Self::X;
    fn zero_y(&self) -> Self::Y;

    fn norm_x(&self, a: &Self::X) -> f64 {
        self.inner_x(a, a).max(0.0).sqrt()
    }

    fn norm_y(&self, a: &Self::Y) -> f64 {
        self.inner_y(a, a).max(0.0).sqrt()
    }
}
