//! Step size policies: fixed, contraction-adaptive (variable) and
//! accelerated with restart (fast).

use crate::admm::problem::Field;
use crate::error::Error;

/// Initial value `R_0` of the stored previous residual.
pub const R_BAR: f64 = 1e30;

/// Parameters of the contraction-adaptive policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableParams {
    pub tau_min: f64,
    pub tau_max: f64,
    /// Reduction factor applied to `tau` when the contraction test fails.
    pub delta: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub restart: RestartTrigger,
}

/// When a failed contraction test at small `tau` restarts the iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum RestartTrigger {
    /// As soon as the reduced step `delta * tau` would reach `tau_min`, so
    /// that no iteration is spent at `tau_min` itself. Between two restarts
    /// at least `ceil(log(tau_min / tau_max) / log(delta))` iterations run.
    #[default]
    BeforeFloor,
    /// Only after an iteration with `tau = tau_min` fails the test.
    AtFloor,
}

impl VariableParams {
    /// Defaults `tau_min = 1`, `delta = 0.5`, `gamma in [0.5, 0.999]`.
    pub fn with_tau_max(tau_max: f64) -> Self {
        Self {
            tau_min: 1.0,
            tau_max,
            delta: 0.5,
            gamma_min: 0.5,
            gamma_max: 0.999,
            restart: RestartTrigger::BeforeFloor,
        }
    }

    pub fn with_restart(mut self, restart: RestartTrigger) -> Self {
        self.restart = restart;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        let ok = self.tau_min > 0.0
            && self.tau_max >= self.tau_min
            && self.delta > 0.0
            && self.delta < 1.0
            && self.gamma_min > 0.0
            && self.gamma_min <= self.gamma_max
            && self.gamma_max < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("variable policy parameters {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastParams {
    pub tau: f64,
    /// Required residual reduction per step before a restart is triggered.
    pub gamma: f64,
}

impl FastParams {
    pub fn with_tau(tau: f64) -> Self {
        Self { tau, gamma: 0.999 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepPolicy {
    Fixed { tau: f64 },
    Variable(VariableParams),
    Fast(FastParams),
}

impl StepPolicy {
    pub fn validate(&self) -> Result<(), Error> {
        match self {
            Self::Fixed { tau } if *tau > 0.0 && tau.is_finite() => Ok(()),
            Self::Fixed { tau } => Err(Error::InvalidParameter(format!("step size {tau}"))),
            Self::Variable(p) => p.validate(),
            Self::Fast(p) if p.tau > 0.0 && p.tau.is_finite() && p.gamma > 0.0 && p.gamma < 1.0 => Ok(()),
            Self::Fast(p) => Err(Error::InvalidParameter(format!("fast policy parameters {p:?}"))),
        }
    }

    pub fn initial_tau(&self) -> f64 {
        match self {
            Self::Fixed { tau } => *tau,
            Self::Variable(p) => p.tau_max,
            Self::Fast(p) => p.tau,
        }
    }
}

/// Mutable state of the variable policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableState {
    pub tau: f64,
    pub gamma: f64,
    /// `tau` reductions since the last restart.
    pub n_tau: usize,
    /// `gamma` increases over the whole run.
    pub n_gamma: usize,
}

impl VariableState {
    pub fn new(params: &VariableParams) -> Self {
        Self {
            tau: params.tau_max,
            gamma: params.gamma_min,
            n_tau: 0,
            n_gamma: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariableAction {
    Keep,
    DecreaseTau,
    /// Raise `gamma`, reset `tau` to its upper bound and restart from the
    /// initial iterates.
    Restart,
    /// Raise `gamma` without touching the iterates; only reachable when
    /// `tau_min == tau_max`, where a restart would repeat the same run.
    IncreaseGamma,
}

/// One application of the contraction test with residuals `r = R_j` and
/// `r_prev = R_{j-1}`.
pub fn variable_policy_update(
    params: &VariableParams,
    state: &VariableState,
    r: f64,
    r_prev: f64,
) -> (VariableState, VariableAction) {
    let floor_reached = state.tau <= params.tau_min
        || (params.restart == RestartTrigger::BeforeFloor && params.delta * state.tau <= params.tau_min);
    let saturated = floor_reached && state.gamma >= params.gamma_max;
    let mut next = *state;
    if r <= state.gamma * r_prev || saturated {
        return (next, VariableAction::Keep);
    }
    if !floor_reached {
        next.tau = (params.delta * state.tau).max(params.tau_min);
        next.n_tau += 1;
        return (next, VariableAction::DecreaseTau);
    }
    next.gamma = (0.5 * (state.gamma + 1.0)).min(params.gamma_max);
    next.n_gamma += 1;
    if params.tau_max > params.tau_min {
        next.tau = params.tau_max;
        next.n_tau = 0;
        (next, VariableAction::Restart)
    } else {
        (next, VariableAction::IncreaseGamma)
    }
}

/// `theta_j = (1 + sqrt(1 + 4 theta_{j-1}^2)) / 2`.
pub fn fast_theta_next(theta_prev: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * theta_prev * theta_prev).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FastAction {
    Extrapolate { coefficient: f64 },
    Restart,
}

/// Result of the accelerated policy step: the next `theta`, the pair fed to
/// the next subproblems and the residual stored for the next comparison.
#[derive(Debug, Clone)]
pub struct FastUpdate<X, Y> {
    pub theta: f64,
    pub u_hat: X,
    pub lambda_hat: Y,
    pub stored_residual: f64,
    pub action: FastAction,
}

#[allow(clippy::too_many_arguments)]
pub fn fast_policy_update<X: Field, Y: Field>(
    params: &FastParams,
    theta_prev: f64,
    r: f64,
    r_prev: f64,
    u: &X,
    u_prev: &X,
    lambda: &Y,
    lambda_prev: &Y,
) -> FastUpdate<X, Y> {
    if r < params.gamma * r_prev {
        let theta = fast_theta_next(theta_prev);
        let c = (theta_prev - 1.0) / theta;
        FastUpdate {
            theta,
            u_hat: u.lin_comb(1.0 + c, u_prev, -c),
            lambda_hat: lambda.lin_comb(1.0 + c, lambda_prev, -c),
            stored_residual: r,
            action: FastAction::Extrapolate { coefficient: c },
        }
    } else {
        FastUpdate {
            theta: 1.0,
            u_hat: u_prev.clone(),
            lambda_hat: lambda_prev.clone(),
            stored_residual: r_prev / params.gamma,
            action: FastAction::Restart,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RestartBounds {
    pub max_restarts: u64,
    pub min_iters_between: u64,
    /// Worst case over the admissible contraction factors, i.e. evaluated
    /// at `gamma_max`.
    pub max_iters_between: u64,
}

/// Bounds on restarts and on the iterations between two restarts of the
/// variable policy, given the stopping tolerance and the first residual.
pub fn restart_bounds(params: &VariableParams, eps_stop: f64, first_residual: f64) -> Result<RestartBounds, Error> {
    let VariableParams {
        tau_min,
        tau_max,
        delta,
        gamma_min,
        gamma_max,
        ..
    } = *params;
    if !(0.0 < gamma_min && gamma_min <= gamma_max && gamma_max < 1.0) {
        return Err(Error::InvalidParameter(format!("gamma range [{gamma_min}, {gamma_max}]")));
    }
    if !(0.0 < delta && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta {delta}")));
    }
    if !(0.0 < tau_min && tau_min < tau_max) {
        return Err(Error::InvalidParameter(format!("tau range [{tau_min}, {tau_max}]")));
    }
    if !(eps_stop > 0.0 && first_residual > 0.0) {
        return Err(Error::InvalidParameter("tolerance and first residual must be positive".into()));
    }
    let max_restarts = (((gamma_min - 1.0) / (gamma_max - 1.0)).ln() / 2f64.ln()).ceil().max(0.0) as u64;
    let min_between = ((tau_min / tau_max).ln() / delta.ln()).ceil() as u64;
    let contraction_steps = ((eps_stop / first_residual).ln() / gamma_max.ln()).floor().max(0.0) as u64;
    Ok(RestartBounds {
        max_restarts,
        min_iters_between: min_between,
        max_iters_between: min_between + contraction_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(tau_max: f64) -> VariableParams {
        VariableParams::with_tau_max(tau_max)
    }

    #[test]
    fn contraction_satisfied_keeps_parameters() {
        let p = params(8.0);
        let s = VariableState::new(&p);
        let (next, action) = variable_policy_update(&p, &s, 0.4, 1.0);
        assert_eq!(action, VariableAction::Keep);
        assert_eq!(next, s);
    }

    #[test]
    fn contraction_violated_reduces_tau() {
        let p = params(8.0);
        let s = VariableState::new(&p);
        let (next, action) = variable_policy_update(&p, &s, 0.6, 1.0);
        assert_eq!(action, VariableAction::DecreaseTau);
        assert_eq!(next.tau, 4.0);
        assert_eq!(next.gamma, 0.5);
        assert_eq!(next.n_tau, 1);
    }

    #[test]
    fn tau_reduction_is_clamped() {
        let p = params(1.5).with_restart(RestartTrigger::AtFloor);
        let s = VariableState::new(&p);
        let (next, _) = variable_policy_update(&p, &s, 0.6, 1.0);
        assert_eq!(next.tau, 1.0);
    }

    #[test]
    fn violation_at_floor_restarts() {
        let p = params(8.0);
        let s = VariableState {
            tau: 1.0,
            gamma: 0.5,
            n_tau: 3,
            n_gamma: 0,
        };
        let (next, action) = variable_policy_update(&p, &s, 0.6, 1.0);
        assert_eq!(action, VariableAction::Restart);
        assert_eq!(next.gamma, 0.75);
        assert_eq!(next.tau, 8.0);
        assert_eq!(next.n_tau, 0);
        assert_eq!(next.n_gamma, 1);
    }

    #[test]
    fn restart_before_floor() {
        let p = params(8.0);
        let s = VariableState {
            tau: 2.0,
            gamma: 0.5,
            n_tau: 2,
            n_gamma: 0,
        };
        let (next, action) = variable_policy_update(&p, &s, 0.6, 1.0);
        assert_eq!(action, VariableAction::Restart);
        assert_eq!(next.tau, 8.0);
        let p = p.with_restart(RestartTrigger::AtFloor);
        let (next, action) = variable_policy_update(&p, &s, 0.6, 1.0);
        assert_eq!(action, VariableAction::DecreaseTau);
        assert_eq!(next.tau, 1.0);
    }

    #[test]
    fn saturated_before_floor_keeps() {
        let p = params(8.0);
        let s = VariableState {
            tau: 2.0,
            gamma: 0.999,
            n_tau: 0,
            n_gamma: 9,
        };
        assert_eq!(variable_policy_update(&p, &s, 5.0, 1.0).1, VariableAction::Keep);
    }

    #[test]
    fn saturated_policy_keeps() {
        let p = params(8.0);
        let s = VariableState {
            tau: 1.0,
            gamma: 0.999,
            n_tau: 0,
            n_gamma: 9,
        };
        assert_eq!(variable_policy_update(&p, &s, 5.0, 1.0).1, VariableAction::Keep);
    }

    #[test]
    fn equal_bounds_raise_gamma_without_restart() {
        let p = params(1.0);
        let s = VariableState::new(&p);
        let (next, action) = variable_policy_update(&p, &s, 0.9, 1.0);
        assert_eq!(action, VariableAction::IncreaseGamma);
        assert_eq!(next.gamma, 0.75);
        assert_eq!(next.tau, 1.0);
    }

    #[test]
    fn theta_recurrence() {
        let t1 = fast_theta_next(1.0);
        assert!((t1 - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        let t2 = fast_theta_next(t1);
        // 1 + 4 * phi^2 = 7 + 2 sqrt(5)
        assert!((t2 - 0.5 * (1.0 + (7.0 + 2.0 * 5f64.sqrt()).sqrt())).abs() < 1e-14);
        assert!((t2 - 2.1935).abs() < 1e-4);
    }

    #[test]
    fn first_fast_step_does_not_extrapolate() {
        let p = FastParams::with_tau(1.0);
        let u = vec![1.0, 2.0];
        let u0 = vec![0.0, 0.0];
        let up = fast_policy_update(&p, 1.0, 0.5, R_BAR, &u, &u0, &u, &u0);
        assert_eq!(up.u_hat, u);
        assert_eq!(up.lambda_hat, u);
        assert!((up.theta - 1.618_033_988_749_895).abs() < 1e-15);
    }

    #[test]
    fn fast_restart_branch() {
        let p = FastParams { tau: 1.0, gamma: 0.999 };
        let u = vec![1.0];
        let u_prev = vec![3.0];
        let up = fast_policy_update(&p, 2.0, 1.0, 1.0, &u, &u_prev, &u, &u_prev);
        assert_eq!(up.action, FastAction::Restart);
        assert_eq!(up.theta, 1.0);
        assert_eq!(up.u_hat, u_prev);
        assert_eq!(up.stored_residual, 1.0 / 0.999);
    }

    #[test]
    fn restart_bound_examples() {
        let mut p = params(32.0);
        let b = restart_bounds(&p, 1e-3, 1.0).unwrap();
        assert_eq!(b.max_restarts, 9);
        assert_eq!(b.min_iters_between, 5);
        assert_eq!(b.max_iters_between, 5 + ((1e-3f64).ln() / 0.999f64.ln()).floor() as u64);
        p.gamma_max = p.gamma_min;
        assert_eq!(restart_bounds(&p, 1e-3, 1.0).unwrap().max_restarts, 0);
        p.delta = 1.5;
        assert!(restart_bounds(&p, 1e-3, 1.0).is_err());
    }

    #[test]
    fn gamma_increases_reach_the_bound_in_max_restarts() {
        let p = params(8.0);
        let mut s = VariableState::new(&p);
        s.tau = 1.0;
        let mut count = 0;
        while s.gamma < p.gamma_max {
            let (next, action) = variable_policy_update(&p, &s, 1.0, 1.0);
            assert_eq!(action, VariableAction::Restart);
            s = next;
            s.tau = 1.0;
            count += 1;
        }
        assert_eq!(count as u64, restart_bounds(&p, 1e-3, 1.0).unwrap().max_restarts);
    }
}
