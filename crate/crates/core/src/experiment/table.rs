use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::admm::{StopKind, CAP_MARK};
use crate::error::Error;
use crate::experiment::config::{Algorithm, ProblemKind, RunConfig, Summary};
use crate::experiment::reference::ReferenceCache;

/// One of the five iteration-count tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSpec {
    pub id: u8,
    pub levels: Vec<u32>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct TableCell {
    pub config: RunConfig,
    /// Failed runs keep their error message.
    pub result: Result<Summary, String>,
}

impl TableCell {
    fn n_text(&self) -> String {
        match &self.result {
            Ok(s) if !s.capped() => s.n_iter.to_string(),
            _ => CAP_MARK.to_string(),
        }
    }

    fn ratio_text(&self) -> String {
        match &self.result {
            Ok(s) if !s.capped() => format!("{:.4}", s.ratio),
            _ => CAP_MARK.to_string(),
        }
    }

    fn annotation(&self) -> String {
        match (&self.result, self.config.algorithm) {
            (_, Algorithm::Admm) => String::new(),
            (Ok(s), Algorithm::Fast) if !s.capped() => format!("({})", s.n_re),
            (Ok(s), Algorithm::Variable) if !s.capped() => format!("\"({},{})\"", s.n_tau, s.n_gamma),
            (_, Algorithm::Fast) => format!("({CAP_MARK})"),
            (_, Algorithm::Variable) => format!("\"({CAP_MARK},{CAP_MARK})\""),
        }
    }
}

impl TableSpec {
    pub fn new(id: u8) -> Result<Self, Error> {
        if !(1..=5).contains(&id) {
            return Err(Error::InvalidParameter(format!("table id must be in 1..=5, got {id}")));
        }
        let levels = if id == 5 { (3..=7).collect() } else { (3..=9).collect() };
        Ok(Self { id, levels, seed: 0 })
    }

    pub fn with_levels(mut self, levels: Vec<u32>) -> Self {
        self.levels = levels;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// `(problem, stop, step exponents, cap)` blocks of the table.
    fn blocks(&self) -> Vec<(ProblemKind, StopKind, Vec<u32>, usize)> {
        match self.id {
            1 => vec![(ProblemKind::Obstacle, StopKind::RefError, (0..=3).collect(), 1_000)],
            2 => vec![(ProblemKind::Obstacle, StopKind::Residual, (0..=3).collect(), 1_000)],
            3 => vec![(ProblemKind::Rof, StopKind::RefError, (0..=3).collect(), 10_000)],
            4 => vec![(ProblemKind::Rof, StopKind::Residual, (0..=3).collect(), 10_000)],
            _ => vec![
                (ProblemKind::Obstacle, StopKind::DualOnly, vec![3], 10_000),
                (ProblemKind::Rof, StopKind::PrimalOnly, vec![0], 10_000),
            ],
        }
    }

    /// All runs of the table, sorted by (problem, level, m, algorithm).
    pub fn configs(&self) -> Vec<RunConfig> {
        let mut out = Vec::new();
        for (problem, stop, ms, cap) in self.blocks() {
            for &level in &self.levels {
                for &m in &ms {
                    for alg in Algorithm::ALL {
                        let mut c = RunConfig::new(problem, level, m, alg, stop);
                        c.seed = self.seed;
                        c.max_iter = Some(cap);
                        out.push(c);
                    }
                }
            }
        }
        out.sort_by_key(|c| (c.problem, c.level, c.tau_exp, c.algorithm));
        out
    }

    fn with_ratio(&self) -> bool {
        matches!(self.id, 2 | 4 | 5)
    }

    pub fn header(&self) -> String {
        if self.id == 5 {
            let mut h = String::from("problem,level");
            for alg in Algorithm::ALL {
                let _ = write!(h, ",N_{alg},ratio_{alg}");
            }
            return h;
        }
        let mut h = String::from("problem,alg,level");
        for m in 0..=3 {
            if self.with_ratio() {
                let _ = write!(h, ",N_m{m},ratio_m{m}");
            } else {
                let _ = write!(h, ",N_m{m},info_m{m}");
            }
        }
        h
    }

    /// Renders completed cells in the row/column layout of the table.
    pub fn render(&self, cells: &[TableCell]) -> String {
        let index: BTreeMap<_, _> = cells
            .iter()
            .map(|c| ((c.config.problem, c.config.level, c.config.tau_exp, c.config.algorithm), c))
            .collect();
        let mut out = self.header();
        out.push('\n');
        for (problem, _, ms, _) in self.blocks() {
            if self.id == 5 {
                for &level in &self.levels {
                    let _ = write!(out, "{problem},{level}");
                    for alg in Algorithm::ALL {
                        match index.get(&(problem, level, ms[0], alg)) {
                            Some(c) => {
                                let _ = write!(out, ",{},{}", c.n_text(), c.ratio_text());
                            }
                            None => out.push_str(",,"),
                        }
                    }
                    out.push('\n');
                }
                continue;
            }
            for alg in Algorithm::ALL {
                for &level in &self.levels {
                    let _ = write!(out, "{problem},{alg},{level}");
                    for &m in &ms {
                        match index.get(&(problem, level, m, alg)) {
                            Some(c) => {
                                let second = if self.with_ratio() { c.ratio_text() } else { c.annotation() };
                                let _ = write!(out, ",{},{}", c.n_text(), second);
                            }
                            None => out.push_str(",,"),
                        }
                    }
                    out.push('\n');
                }
            }
        }
        out
    }
}

/// Runs every cell of `spec` in parallel and renders the table.
pub fn build_table(spec: &TableSpec, cache: &ReferenceCache) -> (String, Vec<TableCell>) {
    let configs = spec.configs();
    let mut refs: Vec<_> = configs.iter().map(|c| c.reference_spec()).collect();
    refs.dedup_by_key(|r| r.file_name());
    refs.par_iter().for_each(|r| {
        let _ = cache.load_or_compute(r);
    });
    let cells: Vec<TableCell> = configs
        .into_par_iter()
        .map(|config| {
            let result = config.execute(cache).map(|o| o.summary).map_err(|e| e.to_string());
            TableCell { config, result }
        })
        .collect();
    (spec.render(&cells), cells)
}
