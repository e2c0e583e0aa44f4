use std::fmt;
use std::str::FromStr;

use crate::admm::{
    run, FastParams, RunReport, SplittingProblem, StepPolicy, StopCriterion, StopKind, StopRule, Termination,
    VariableParams, CAP_MARK,
};
use crate::error::Error;
use crate::experiment::reference::{ReferenceCache, ReferenceSpec};
use crate::mesh::{build_mesh, MAX_LEVEL};
use crate::problems::rof::DEFAULT_ALPHA;
use crate::problems::{make_rof_data, ObstacleProblem, RofProblem};

pub const SUMMARY_HEADER: &str = "problem,level,m,alg,N,N_tau,N_gamma,N_re,E_h,ratio";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemKind {
    Obstacle,
    Rof,
}

impl ProblemKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Obstacle => "obstacle",
            Self::Rof => "rof",
        }
    }

    /// Tolerance of the reference-error criterion.
    pub fn ref_error_eps(&self) -> f64 {
        match self {
            Self::Obstacle => 1e-3,
            Self::Rof => 1e-2,
        }
    }

    /// Residual tolerance: `h^2` for the obstacle problem, `h` for ROF.
    pub fn residual_eps(&self, h: f64) -> f64 {
        match self {
            Self::Obstacle => h * h,
            Self::Rof => h,
        }
    }

    pub fn default_max_iter(&self) -> usize {
        match self {
            Self::Obstacle => 1_000,
            Self::Rof => 10_000,
        }
    }

    /// Error scale of the discretization: `h` or `sqrt(h)`.
    pub fn error_scale(&self, h: f64) -> f64 {
        match self {
            Self::Obstacle => h,
            Self::Rof => h.sqrt(),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "obstacle" => Ok(Self::Obstacle),
            "rof" => Ok(Self::Rof),
            _ => Err(Error::InvalidParameter(format!("unknown problem '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Admm,
    Fast,
    Variable,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Self::Admm, Self::Fast, Self::Variable];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Admm => "admm",
            Self::Fast => "fast",
            Self::Variable => "variable",
        }
    }

    /// Policy started at `tau_bar`, with the default parameters.
    pub fn policy(&self, tau_bar: f64) -> StepPolicy {
        match self {
            Self::Admm => StepPolicy::Fixed { tau: tau_bar },
            Self::Fast => StepPolicy::Fast(FastParams::with_tau(tau_bar)),
            Self::Variable => StepPolicy::Variable(VariableParams::with_tau_max(tau_bar)),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm '{s}'")))
    }
}

/// One experiment: problem, level, initial step `h^-m`, algorithm and stop rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub level: u32,
    pub tau_exp: u32,
    pub algorithm: Algorithm,
    pub stop: StopKind,
    /// Overrides the default tolerance of `stop`.
    pub eps: Option<f64>,
    pub seed: u64,
    /// Overrides the default iteration cap of the problem.
    pub max_iter: Option<usize>,
}

impl RunConfig {
    pub fn new(problem: ProblemKind, level: u32, tau_exp: u32, algorithm: Algorithm, stop: StopKind) -> Self {
        Self {
            problem,
            level,
            tau_exp,
            algorithm,
            stop,
            eps: None,
            seed: 0,
            max_iter: None,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.tau_exp > 3 {
            return Err(Error::InvalidParameter(format!(
                "step size exponent must be in 0..=3, got {}",
                self.tau_exp
            )));
        }
        if self.level > MAX_LEVEL {
            return Err(Error::InvalidParameter(format!("level {} above {MAX_LEVEL}", self.level)));
        }
        if self.problem == ProblemKind::Rof && self.level < 3 {
            return Err(Error::InvalidParameter("ROF runs need level >= 3".into()));
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidParameter(format!("tolerance {eps}")));
            }
        }
        if self.max_iter == Some(0) {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        std::f64::consts::SQRT_2 * 0.5f64.powi(self.level as i32)
    }

    /// `tau_bar = h^-m`.
    pub fn tau_bar(&self) -> f64 {
        self.h().powi(-(self.tau_exp as i32))
    }

    pub fn effective_eps(&self) -> f64 {
        self.eps.unwrap_or_else(|| match self.stop {
            StopKind::RefError => self.problem.ref_error_eps(),
            _ => self.problem.residual_eps(self.h()),
        })
    }

    pub fn effective_max_iter(&self) -> usize {
        self.max_iter.unwrap_or_else(|| self.problem.default_max_iter())
    }

    pub fn reference_spec(&self) -> ReferenceSpec {
        ReferenceSpec::for_problem(self.problem, self.level, self.seed)
    }

    /// Runs the experiment from `u = 0`, `lambda = 0`.
    pub fn execute(&self, cache: &ReferenceCache) -> Result<RunOutcome, Error> {
        self.validate()?;
        let reference = cache.load_or_compute(&self.reference_spec())?;
        let instance = Instance::build(self.problem, self.level, self.seed)?;
        match &instance {
            Instance::Obstacle(p) => self.execute_on(p, &reference.u),
            Instance::Rof(p) => self.execute_on(p, &reference.u),
        }
    }

    fn execute_on<P>(&self, problem: &P, reference: &[f64]) -> Result<RunOutcome, Error>
    where
        P: SplittingProblem<X = Vec<f64>>,
    {
        let eps = self.effective_eps();
        let criterion = match self.stop {
            StopKind::RefError => StopCriterion::RefError {
                reference: reference.to_vec(),
                eps,
            },
            StopKind::Residual => StopCriterion::Residual { eps },
            StopKind::DualOnly => StopCriterion::DualOnly { eps },
            StopKind::PrimalOnly => StopCriterion::PrimalOnly { eps },
        };
        let stop = StopRule::new(criterion, self.effective_max_iter());
        let policy = self.algorithm.policy(self.tau_bar());
        let report = run(problem, &policy, &stop, problem.zero_x(), problem.zero_y())?;
        let e_h = problem.error_norm(&reference.to_vec(), &report.u);
        Ok(RunOutcome::new(self, &report, e_h))
    }
}

/// A constructed model problem.
#[derive(Debug, Clone)]
pub enum Instance {
    Obstacle(ObstacleProblem),
    Rof(RofProblem),
}

impl Instance {
    /// Default data; `seed` only affects ROF.
    pub fn build(problem: ProblemKind, level: u32, seed: u64) -> Result<Self, Error> {
        let mesh = build_mesh(level)?;
        Ok(match problem {
            ProblemKind::Obstacle => Self::Obstacle(ObstacleProblem::new(mesh)),
            ProblemKind::Rof => {
                let g = make_rof_data(level, seed)?.g;
                Self::Rof(RofProblem::new(mesh, DEFAULT_ALPHA, g)?)
            }
        })
    }
}

/// The summary line of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub problem: ProblemKind,
    pub level: u32,
    pub tau_exp: u32,
    pub algorithm: Algorithm,
    pub n_iter: usize,
    pub n_tau: usize,
    pub n_gamma: usize,
    pub n_re: usize,
    pub terminated_by: Termination,
    pub e_h: f64,
    /// `E_h / h` (obstacle) or `E_h / sqrt(h)` (ROF).
    pub ratio: f64,
}

impl Summary {
    pub fn capped(&self) -> bool {
        self.terminated_by == Termination::Cap
    }

    pub fn csv_line(&self) -> String {
        if self.capped() {
            format!(
                "{},{},{},{},{m},{m},{m},{m},{m},{m}",
                self.problem,
                self.level,
                self.tau_exp,
                self.algorithm,
                m = CAP_MARK
            )
        } else {
            format!(
                "{},{},{},{},{},{},{},{},{:.6e},{:.4}",
                self.problem,
                self.level,
                self.tau_exp,
                self.algorithm,
                self.n_iter,
                self.n_tau,
                self.n_gamma,
                self.n_re,
                self.e_h,
                self.ratio
            )
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: Summary,
    pub trace_csv: String,
    pub u: Vec<f64>,
}

impl RunOutcome {
    fn new<Y>(config: &RunConfig, report: &RunReport<Vec<f64>, Y>, e_h: f64) -> Self {
        let scale = config.problem.error_scale(config.h());
        Self {
            summary: Summary {
                problem: config.problem,
                level: config.level,
                tau_exp: config.tau_exp,
                algorithm: config.algorithm,
                n_iter: report.n_iter(),
                n_tau: report.n_tau,
                n_gamma: report.n_gamma,
                n_re: report.n_re,
                terminated_by: report.terminated_by,
                e_h,
                ratio: e_h / scale,
            },
            trace_csv: report.trace_csv(),
            u: report.u.clone(),
        }
    }
}
