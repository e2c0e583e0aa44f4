use std::time::Instant;

use crate::admm::policy::{
    fast_policy_update, variable_policy_update, FastAction, StepPolicy, VariableAction, VariableState, R_BAR,
};
use crate::admm::problem::{Field, SplittingProblem};
use crate::admm::report::{Event, RunError, RunReport, Termination, TraceRecord};
use crate::admm::stop::StopRule;
use crate::error::Error;

/// Residual `R = (||dlambda||_Y^2 + tau^2 ||B du||_Y^2)^(1/2)` and its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub total: f64,
    pub dual: f64,
    pub primal: f64,
}

/// Residual between two consecutive `(u, lambda)` pairs at step size `tau`.
pub fn residual<P: SplittingProblem>(
    problem: &P,
    prev: (&P::X, &P::Y),
    cur: (&P::X, &P::Y),
    tau: f64,
) -> Residual {
    let dual = problem.norm_y(&cur.1.lin_comb(1.0, prev.1, -1.0));
    let du = cur.0.lin_comb(1.0, prev.0, -1.0);
    let primal = tau * problem.norm_y(&problem.apply_b(&du));
    Residual {
        total: dual.hypot(primal),
        dual,
        primal,
    }
}

/// `D = (||lambda_ref - lambda||_Y^2 + tau^2 ||B(u_ref - u)||_Y^2)^(1/2)`.
pub fn distance_to_saddle<P: SplittingProblem>(
    problem: &P,
    state: (&P::X, &P::Y),
    reference: (&P::X, &P::Y),
    tau: f64,
) -> f64 {
    let dl = problem.norm_y(&reference.1.lin_comb(1.0, state.1, -1.0));
    let du = reference.0.lin_comb(1.0, state.0, -1.0);
    dl.hypot(tau * problem.norm_y(&problem.apply_b(&du)))
}

/// Borrowed view of one completed iteration, handed to observers.
#[derive(Debug)]
pub struct IterationView<'a, P: SplittingProblem> {
    pub j: usize,
    pub tau: f64,
    /// Pair consumed by the subproblems of this iteration.
    pub u_in: &'a P::X,
    pub lambda_in: &'a P::Y,
    pub u: &'a P::X,
    pub p: &'a P::Y,
    pub lambda: &'a P::Y,
    pub residual: Residual,
}

/// Runs the iteration from `(u0, lambda0)`.
pub fn run<P: SplittingProblem>(
    problem: &P,
    policy: &StepPolicy,
    stop: &StopRule<P::X>,
    u0: P::X,
    lambda0: P::Y,
) -> Result<RunReport<P::X, P::Y>, Error> {
    run_observed(problem, policy, stop, u0, lambda0, |_| {})
}

/// [`run`] with a callback after every iteration (before the stop check).
///
/// Each iteration computes, with one step size `tau_j`,
/// the `p`-minimizer from the input pair, the `u`-minimizer from `p` and
/// the input multiplier, the multiplier update
/// `lambda = lambda_in + tau_j (B u - p)` and the residual against the input
/// pair. The stop rule is checked before the policy picks the next step.
pub fn run_observed<P, F>(
    problem: &P,
    policy: &StepPolicy,
    stop: &StopRule<P::X>,
    u0: P::X,
    lambda0: P::Y,
    mut observer: F,
) -> Result<RunReport<P::X, P::Y>, Error>
where
    P: SplittingProblem,
    F: FnMut(&IterationView<'_, P>),
{
    policy.validate()?;
    stop.validate()?;
    let start = Instant::now();

    let mut tau = policy.initial_tau();
    let mut variable = match policy {
        StepPolicy::Variable(params) => Some(VariableState::new(params)),
        _ => None,
    };
    let mut theta = 1.0;
    let mut n_re = 0;

    // pair consumed by the next subproblems
    let mut u_in = u0.clone();
    let mut lambda_in = lambda0.clone();
    // previous computed iterate, used by the extrapolation
    let mut u_prev = u0.clone();
    let mut lambda_prev = lambda0.clone();
    let mut r_prev = R_BAR;
    let mut trace = Vec::new();

    for j in 1..=stop.max_iter {
        let p = problem.solve_p(&u_in, &lambda_in, tau);
        let u = match problem.solve_u(&p, &lambda_in, tau) {
            Ok(u) => u,
            Err(source) => {
                return Err(RunError {
                    source,
                    iteration: j,
                    trace,
                }
                .into())
            }
        };
        let constraint = problem.apply_b(&u).lin_comb(1.0, &p, -1.0);
        let lambda = lambda_in.lin_comb(1.0, &constraint, tau);
        let r = residual(problem, (&u_in, &lambda_in), (&u, &lambda), tau);
        observer(&IterationView {
            j,
            tau,
            u_in: &u_in,
            lambda_in: &lambda_in,
            u: &u,
            p: &p,
            lambda: &lambda,
            residual: r,
        });

        let gamma = match (policy, &variable) {
            (StepPolicy::Variable(_), Some(s)) => Some(s.gamma),
            (StepPolicy::Fast(params), _) => Some(params.gamma),
            _ => None,
        };
        let mut record = TraceRecord {
            j,
            tau,
            gamma,
            residual: r.total,
            dual: r.dual,
            primal: r.primal,
            event: Event::None,
        };

        let met = stop.is_met(problem, &u, &lambda, tau, &r);
        if met || j == stop.max_iter {
            trace.push(record);
            let terminated_by = if met {
                Termination::Criterion(stop.kind())
            } else {
                Termination::Cap
            };
            let (n_tau, n_gamma) = variable.map_or((0, 0), |s| (s.n_tau, s.n_gamma));
            return Ok(RunReport {
                trace,
                n_tau,
                n_gamma,
                n_re,
                terminated_by,
                u,
                p,
                lambda,
                tau,
                wall_time: start.elapsed(),
            });
        }

        match policy {
            StepPolicy::Fixed { .. } => {
                r_prev = r.total;
                u_in = u;
                lambda_in = lambda;
            }
            StepPolicy::Variable(params) => {
                let state = variable.as_mut().expect("variable state");
                let (next, action) = variable_policy_update(params, state, r.total, r_prev);
                *state = next;
                tau = next.tau;
                match action {
                    VariableAction::Restart => {
                        record.event = Event::Restarted;
                        u_in = u0.clone();
                        lambda_in = lambda0.clone();
                        r_prev = R_BAR;
                    }
                    other => {
                        record.event = match other {
                            VariableAction::DecreaseTau => Event::TauDecreased,
                            VariableAction::IncreaseGamma => Event::GammaIncreased,
                            _ => Event::None,
                        };
                        r_prev = r.total;
                        u_in = u;
                        lambda_in = lambda;
                    }
                }
            }
            StepPolicy::Fast(params) => {
                let up = fast_policy_update(params, theta, r.total, r_prev, &u, &u_prev, &lambda, &lambda_prev);
                if up.action == FastAction::Restart {
                    record.event = Event::FastRestarted;
                    n_re += 1;
                }
                theta = up.theta;
                r_prev = up.stored_residual;
                u_in = up.u_hat;
                lambda_in = up.lambda_hat;
                u_prev = u;
                lambda_prev = lambda;
            }
        }
        trace.push(record);
    }
    unreachable!("loop returns at the iteration cap")
}
