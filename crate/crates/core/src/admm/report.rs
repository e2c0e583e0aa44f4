use std::fmt::{self, Write as _};
use std::time::Duration;

use crate::admm::stop::StopKind;
use crate::error::LinalgError;

/// Marker written for runs that reached the iteration cap.
pub const CAP_MARK: &str = "–";

pub const TRACE_HEADER: &str = "j,tau,gamma,R,R_dual,R_primal,event";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    None,
    TauDecreased,
    /// Variable policy restart from the initial iterates.
    Restarted,
    /// Variable policy contraction factor raised with `tau_min == tau_max`.
    GammaIncreased,
    FastRestarted,
}

impl Event {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::TauDecreased => "tau-decreased",
            Self::Restarted => "restarted",
            Self::GammaIncreased => "gamma-increased",
            Self::FastRestarted => "fast-restarted",
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One iteration: the step size and contraction factor used in it, the
/// residual and the policy event decided after it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub j: usize,
    pub tau: f64,
    pub gamma: Option<f64>,
    pub residual: f64,
    pub dual: f64,
    pub primal: f64,
    pub event: Event,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Criterion(StopKind),
    Cap,
}

impl Termination {
    pub fn by_criterion(&self) -> bool {
        matches!(self, Self::Criterion(_))
    }
}

#[derive(Debug, Clone)]
pub struct RunReport<X, Y> {
    pub trace: Vec<TraceRecord>,
    /// `tau` reductions after the last restart.
    pub n_tau: usize,
    /// Contraction factor increases.
    pub n_gamma: usize,
    /// Fast policy restarts.
    pub n_re: usize,
    pub terminated_by: Termination,
    /// Last computed iterate.
    pub u: X,
    pub p: Y,
    pub lambda: Y,
    pub tau: f64,
    pub wall_time: Duration,
}

impl<X, Y> RunReport<X, Y> {
    /// Iterations performed, discarded ones included.
    pub fn n_iter(&self) -> usize {
        self.trace.len()
    }

    pub fn count(&self, event: Event) -> usize {
        self.trace.iter().filter(|r| r.event == event).count()
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from(TRACE_HEADER);
        out.push('\n');
        for r in &self.trace {
            let gamma = r.gamma.map(|g| g.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{:e},{:e},{:e},{}",
                r.j, r.tau, gamma, r.residual, r.dual, r.primal, r.event
            );
        }
        out
    }
}

/// A subproblem solve failed; the trace up to the failing iteration is kept.
#[derive(Debug)]
pub struct RunError {
    pub source: LinalgError,
    pub iteration: usize,
    pub trace: Vec<TraceRecord>,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "subproblem solve failed in iteration {}: {}", self.iteration, self.source)
    }
}

impl std::error::Error for RunError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}
