use std::fmt;
use std::str::FromStr;

use crate::admm::problem::SplittingProblem;
use crate::admm::run::Residual;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StopKind {
    RefError,
    Residual,
    DualOnly,
    PrimalOnly,
}

impl StopKind {
    pub const ALL: [StopKind; 4] = [Self::RefError, Self::Residual, Self::DualOnly, Self::PrimalOnly];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::RefError => "ref-error",
            Self::Residual => "residual",
            Self::DualOnly => "dual-only",
            Self::PrimalOnly => "primal-only",
        }
    }
}

impl fmt::Display for StopKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StopKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown stop rule '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub enum StopCriterion<X> {
    /// `error_norm(reference, u_j) <= eps`.
    RefError { reference: X, eps: f64 },
    /// `R_j <= eps / C0`.
    Residual { eps: f64 },
    /// `||lambda_j - lambda_{j-1}||_Y <= eps / C0`.
    DualOnly { eps: f64 },
    /// `tau_j ||B(u_j - u_{j-1})||_Y <= eps / C0`.
    PrimalOnly { eps: f64 },
}

#[derive(Debug, Clone)]
pub struct StopRule<X> {
    pub criterion: StopCriterion<X>,
    pub max_iter: usize,
}

impl<X> StopRule<X> {
    pub fn new(criterion: StopCriterion<X>, max_iter: usize) -> Self {
        Self { criterion, max_iter }
    }

    pub fn kind(&self) -> StopKind {
        match self.criterion {
            StopCriterion::RefError { .. } => StopKind::RefError,
            StopCriterion::Residual { .. } => StopKind::Residual,
            StopCriterion::DualOnly { .. } => StopKind::DualOnly,
            StopCriterion::PrimalOnly { .. } => StopKind::PrimalOnly,
        }
    }

    pub fn eps(&self) -> f64 {
        match self.criterion {
            StopCriterion::RefError { eps, .. }
            | StopCriterion::Residual { eps }
            | StopCriterion::DualOnly { eps }
            | StopCriterion::PrimalOnly { eps } => eps,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let eps = self.eps();
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("stopping tolerance {eps}")));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn is_met<P>(&self, problem: &P, u: &X, lambda: &P::Y, tau: f64, r: &Residual) -> bool
    where
        P: SplittingProblem<X = X>,
    {
        match &self.criterion {
            StopCriterion::RefError { reference, eps } => problem.error_norm(reference, u) <= *eps,
            StopCriterion::Residual { eps } => r.total <= eps / problem.c0_bound(u, lambda, tau),
            StopCriterion::DualOnly { eps } => r.dual <= eps / problem.c0_bound(u, lambda, tau),
            StopCriterion::PrimalOnly { eps } => r.primal <= eps / problem.c0_bound(u, lambda, tau),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admm::toy::Toy;

    #[test]
    fn names_round_trip() {
        for k in StopKind::ALL {
            assert_eq!(k.to_string().parse::<StopKind>().unwrap(), k);
        }
        assert!("residuals".parse::<StopKind>().is_err());
    }

    #[test]
    fn kind_and_eps() {
        let rules = [
            StopRule::new(StopCriterion::RefError { reference: vec![0.0], eps: 1.0 }, 5),
            StopRule::new(StopCriterion::Residual { eps: 2.0 }, 5),
            StopRule::new(StopCriterion::DualOnly { eps: 3.0 }, 5),
            StopRule::new(StopCriterion::PrimalOnly { eps: 4.0 }, 5),
        ];
        for (i, r) in rules.iter().enumerate() {
            assert_eq!(r.kind(), StopKind::ALL[i]);
            assert_eq!(r.eps(), (i + 1) as f64);
            assert!(r.validate().is_ok());
        }
    }

    #[test]
    fn validate_rejects() {
        for eps in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(StopRule::<Vec<f64>>::new(StopCriterion::Residual { eps }, 5).validate().is_err());
        }
        assert!(StopRule::<Vec<f64>>::new(StopCriterion::Residual { eps: 1.0 }, 0).validate().is_err());
    }

    #[test]
    fn thresholds_scale_with_c0() {
        let p = Toy::new(vec![0.0], vec![0.0]);
        // C0 = |lambda| / tau + |u| = 2 + 2 = 4
        let (u, l, tau) = (vec![2.0], vec![4.0], 2.0);
        let r = Residual { total: 0.5, dual: 0.3, primal: 0.4 };
        let met = |c: StopCriterion<Vec<f64>>| StopRule::new(c, 1).is_met(&p, &u, &l, tau, &r);
        assert!(met(StopCriterion::Residual { eps: 2.0 }));
        assert!(!met(StopCriterion::Residual { eps: 1.99 }));
        assert!(met(StopCriterion::DualOnly { eps: 1.2 }));
        assert!(!met(StopCriterion::DualOnly { eps: 1.1 }));
        assert!(met(StopCriterion::PrimalOnly { eps: 1.6 }));
        assert!(!met(StopCriterion::PrimalOnly { eps: 1.5 }));
        assert!(met(StopCriterion::RefError { reference: vec![2.5], eps: 0.5 }));
        assert!(!met(StopCriterion::RefError { reference: vec![2.5], eps: 0.49 }));
    }
}
