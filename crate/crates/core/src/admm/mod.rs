//! The generalized ADMM iteration with pluggable step size policies.

pub mod policy;
pub mod problem;
pub mod report;
pub mod run;
pub mod stop;

pub use policy::{
    fast_policy_update, fast_theta_next, restart_bounds, variable_policy_update, FastAction, FastParams, FastUpdate,
    RestartBounds, RestartTrigger, StepPolicy, VariableAction, VariableParams, VariableState, R_BAR,
};
pub use problem::{ConvexityConstants, Field, SplittingProblem};
pub use report::{Event, RunError, RunReport, Termination, TraceRecord, CAP_MARK, TRACE_HEADER};
pub use run::{distance_to_saddle, residual, run, run_observed, IterationView, Residual};
pub use stop::{StopCriterion, StopKind, StopRule};
