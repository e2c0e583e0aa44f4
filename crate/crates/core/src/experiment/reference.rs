use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};

use crate::admm::{run, SplittingProblem, StepPolicy, StopCriterion, StopRule, Termination};
use crate::error::Error;
use crate::experiment::config::{Instance, ProblemKind};
use crate::mesh::build_mesh;

/// Environment variable naming the reference cache directory.
pub const CACHE_DIR_ENV: &str = "VARADMM_CACHE_DIR";

/// Iteration cap of reference runs.
pub const REFERENCE_MAX_ITER: usize = 200_000;

/// Fixed-step ADMM run stopped by `R_j <= eps / C0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSpec {
    pub problem: ProblemKind,
    pub level: u32,
    pub tau: f64,
    pub eps: f64,
    /// Noise seed; always 0 for the obstacle problem.
    pub seed: u64,
}

impl ReferenceSpec {
    /// Obstacle: `tau = 1/h`, `eps = 1e-9`. ROF: `tau = h^-1.5`, `eps = 1e-4`.
    pub fn for_problem(problem: ProblemKind, level: u32, seed: u64) -> Self {
        let h = std::f64::consts::SQRT_2 * 0.5f64.powi(level as i32);
        match problem {
            ProblemKind::Obstacle => Self {
                problem,
                level,
                tau: 1.0 / h,
                eps: 1e-9,
                seed: 0,
            },
            ProblemKind::Rof => Self {
                problem,
                level,
                tau: h.powf(-1.5),
                eps: 1e-4,
                seed,
            },
        }
    }

    pub fn header(&self) -> String {
        format!("{} {} {:e} {:e} {}", self.problem, self.level, self.tau, self.eps, self.seed)
    }

    /// Hex digest of the defining parameters.
    pub fn key(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.problem.as_str().as_bytes());
        hasher.update(self.level.to_le_bytes());
        hasher.update(self.seed.to_le_bytes());
        hasher.update(self.tau.to_bits().to_le_bytes());
        hasher.update(self.eps.to_bits().to_le_bytes());
        hex::encode(&hasher.finalize()[..8])
    }

    pub fn file_name(&self) -> String {
        format!("{}-l{}-{}.ref", self.problem, self.level, self.key())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Multiplier {
    Nodal(Vec<f64>),
    Elementwise(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub spec: ReferenceSpec,
    pub u: Vec<f64>,
    pub lambda: Multiplier,
    /// Iterations of the reference run; `None` when read from a file.
    pub iterations: Option<usize>,
}

impl ReferenceSolution {
    pub fn to_text(&self) -> String {
        let mut out = self.spec.header();
        out.push('\n');
        for v in &self.u {
            let _ = writeln!(out, "{v:e}");
        }
        match &self.lambda {
            Multiplier::Nodal(l) => {
                for v in l {
                    let _ = writeln!(out, "{v:e}");
                }
            }
            Multiplier::Elementwise(l) => {
                for v in l {
                    let _ = writeln!(out, "{:e} {:e}", v[0], v[1]);
                }
            }
        }
        out
    }

    /// Parses a file written by [`Self::to_text`] for `spec`.
    pub fn from_text(text: &str, spec: &ReferenceSpec) -> Result<Self, Error> {
        let mesh = build_mesh(spec.level)?;
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty file".into()))?;
        if header != spec.header() {
            return Err(Error::Format(format!("header '{header}' does not match '{}'", spec.header())));
        }
        let parse = |s: &str| -> Result<f64, Error> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("bad number '{s}': {e}")))
        };
        let mut u = Vec::with_capacity(mesh.n_nodes());
        for _ in 0..mesh.n_nodes() {
            let line = lines.next().ok_or_else(|| Error::Format("truncated primal block".into()))?;
            u.push(parse(line)?);
        }
        let lambda = match spec.problem {
            ProblemKind::Obstacle => {
                let mut l = Vec::with_capacity(mesh.n_nodes());
                for _ in 0..mesh.n_nodes() {
                    let line = lines.next().ok_or_else(|| Error::Format("truncated multiplier block".into()))?;
                    l.push(parse(line)?);
                }
                Multiplier::Nodal(l)
            }
            ProblemKind::Rof => {
                let mut l = Vec::with_capacity(mesh.n_elements());
                for _ in 0..mesh.n_elements() {
                    let line = lines.next().ok_or_else(|| Error::Format("truncated multiplier block".into()))?;
                    let mut parts = line.split_whitespace();
                    let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                        return Err(Error::Format(format!("expected two components, got '{line}'")));
                    };
                    l.push([parse(a)?, parse(b)?]);
                }
                Multiplier::Elementwise(l)
            }
        };
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Error::Format("trailing data".into()));
        }
        Ok(Self {
            spec: *spec,
            u,
            lambda,
            iterations: None,
        })
    }
}

/// Runs the reference computation; fails if the cap is reached first.
pub fn compute_reference(spec: &ReferenceSpec) -> Result<ReferenceSolution, Error> {
    let instance = Instance::build(spec.problem, spec.level, spec.seed)?;
    match &instance {
        Instance::Obstacle(p) => {
            let (u, l, n) = solve(p, spec)?;
            Ok(ReferenceSolution {
                spec: *spec,
                u,
                lambda: Multiplier::Nodal(l),
                iterations: Some(n),
            })
        }
        Instance::Rof(p) => {
            let (u, l, n) = solve(p, spec)?;
            Ok(ReferenceSolution {
                spec: *spec,
                u,
                lambda: Multiplier::Elementwise(l),
                iterations: Some(n),
            })
        }
    }
}

fn solve<P: SplittingProblem>(problem: &P, spec: &ReferenceSpec) -> Result<(P::X, P::Y, usize), Error> {
    let stop = StopRule::new(StopCriterion::Residual { eps: spec.eps }, REFERENCE_MAX_ITER);
    let report = run(
        problem,
        &StepPolicy::Fixed { tau: spec.tau },
        &stop,
        problem.zero_x(),
        problem.zero_y(),
    )?;
    if report.terminated_by == Termination::Cap {
        return Err(Error::ReferenceNotConverged(REFERENCE_MAX_ITER));
    }
    let n = report.n_iter();
    Ok((report.u, report.lambda, n))
}

type Slot = Arc<Mutex<Option<Arc<ReferenceSolution>>>>;

/// Reference solutions memoized in memory and, optionally, on disk.
///
/// Concurrent requests for the same reference wait for a single computation.
#[derive(Debug, Default)]
pub struct ReferenceCache {
    dir: Option<PathBuf>,
    memo: Mutex<HashMap<String, Slot>>,
}

impl ReferenceCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: Some(dir.into()),
            memo: Mutex::default(),
        }
    }

    /// Directory from [`CACHE_DIR_ENV`], else `varadmm-cache` in the system
    /// temporary directory.
    pub fn from_env() -> Self {
        let dir = std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| std::env::temp_dir().join("varadmm-cache"));
        Self::with_dir(dir)
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn path_for(&self, spec: &ReferenceSpec) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(spec.file_name()))
    }

    pub fn load_or_compute(&self, spec: &ReferenceSpec) -> Result<Arc<ReferenceSolution>, Error> {
        let slot = Arc::clone(
            self.memo
                .lock()
                .expect("reference memo poisoned")
                .entry(spec.file_name())
                .or_default(),
        );
        let mut guard = slot.lock().expect("reference slot poisoned");
        if let Some(r) = guard.as_ref() {
            return Ok(Arc::clone(r));
        }
        let solution = match self.path_for(spec) {
            Some(path) if path.exists() => ReferenceSolution::from_text(&fs::read_to_string(&path)?, spec)?,
            Some(path) => {
                let s = compute_reference(spec)?;
                write_atomic(&path, &s.to_text())?;
                s
            }
            None => compute_reference(spec)?,
        };
        let solution = Arc::new(solution);
        *guard = Some(Arc::clone(&solution));
        Ok(solution)
    }
}

fn write_atomic(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs() {
        let o = ReferenceSpec::for_problem(ProblemKind::Obstacle, 3, 17);
        assert_eq!(o.seed, 0);
        assert!((o.tau - 8.0 / 2f64.sqrt()).abs() < 1e-12);
        let r = ReferenceSpec::for_problem(ProblemKind::Rof, 3, 17);
        let h: f64 = 2f64.sqrt() / 8.0;
        assert!((r.tau - h.powf(-1.5)).abs() < 1e-12);
        assert_ne!(r.key(), ReferenceSpec::for_problem(ProblemKind::Rof, 3, 18).key());
        assert!(o.header().starts_with("obstacle 3 "));
    }

    #[test]
    fn text_round_trip() {
        for problem in [ProblemKind::Obstacle, ProblemKind::Rof] {
            let spec = ReferenceSpec::for_problem(problem, 3, 5);
            let s = compute_reference(&spec).unwrap();
            let back = ReferenceSolution::from_text(&s.to_text(), &spec).unwrap();
            assert_eq!(back.u, s.u);
            assert_eq!(back.lambda, s.lambda);
            assert_eq!(back.to_text(), s.to_text());
        }
    }

    #[test]
    fn rejects_mismatched_header() {
        let spec = ReferenceSpec::for_problem(ProblemKind::Obstacle, 3, 0);
        let s = compute_reference(&spec).unwrap();
        let other = ReferenceSpec::for_problem(ProblemKind::Obstacle, 4, 0);
        assert!(ReferenceSolution::from_text(&s.to_text(), &other).is_err());
        let text = s.to_text();
        let truncated: String = text.lines().take(20).collect::<Vec<_>>().join("\n");
        assert!(ReferenceSolution::from_text(&truncated, &spec).is_err());
    }
}
