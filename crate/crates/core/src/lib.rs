//! Alternating direction method of multipliers with fixed, accelerated and
//! contraction-adaptive step sizes, applied to P1 finite element
//! discretizations of an obstacle problem and of the ROF denoising model.

pub mod admm;
pub mod error;
pub mod experiment;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod problems;

pub use admm::{
    run, run_observed, Event, RunReport, SplittingProblem, StepPolicy, StopCriterion, StopKind, StopRule, Termination,
};
pub use error::{Error, LinalgError, MeshError, Result};
pub use mesh::{build_mesh, Triangulation};
pub use problems::{make_rof_data, optimal_step_size, ObstacleProblem, RofProblem};
