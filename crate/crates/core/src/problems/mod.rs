//! Model problems: the obstacle problem and the ROF (TV-L2) problem.

mod cache;
pub mod data;
pub mod obstacle;
pub mod rof;

pub use cache::FactorCache;
pub use data::{make_rof_data, RofData};
pub use obstacle::{ObstacleProblem, SourceQuadrature};
pub use rof::RofProblem;

use crate::error::Error;

/// Step size minimizing the linear contraction bound, and the resulting
/// contraction factor.
pub fn optimal_step_size(alpha_g: f64, lipschitz_g: f64, alpha_b: f64, c_b: f64) -> Result<(f64, f64), Error> {
    for (name, v) in [("alpha_G", alpha_g), ("L_G", lipschitz_g), ("alpha_B", alpha_b), ("c_B", c_b)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    let tau = (2.0 * alpha_g * lipschitz_g / (alpha_b * alpha_b * c_b * c_b)).sqrt();
    let gamma = 1.0 / (1.0 + (2.0 * alpha_g * lipschitz_g * alpha_b * alpha_b / (c_b * c_b)).sqrt());
    Ok((tau, gamma))
}
