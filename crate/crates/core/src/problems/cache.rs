use std::sync::{Arc, Mutex};

use crate::error::LinalgError;
use crate::linalg::{SparseMatrix, SpdSolver};

const CAPACITY: usize = 4;

/// Prepared system solvers keyed by step size, most recent first.
#[derive(Debug, Default)]
pub struct FactorCache {
    entries: Mutex<Vec<(u64, Arc<SpdSolver>)>>,
}

impl FactorCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the solver for `tau`, assembling and preparing it with
    /// `build` on a miss.
    pub fn get_or_build(
        &self,
        tau: f64,
        build: impl FnOnce() -> SparseMatrix,
    ) -> Result<Arc<SpdSolver>, LinalgError> {
        let key = tau.to_bits();
        {
            let mut entries = self.entries.lock().expect("factor cache poisoned");
            if let Some(pos) = entries.iter().position(|(k, _)| *k == key) {
                let entry = entries.remove(pos);
                let solver = Arc::clone(&entry.1);
                entries.insert(0, entry);
                return Ok(solver);
            }
        }
        let solver = Arc::new(SpdSolver::new(build())?);
        let mut entries = self.entries.lock().expect("factor cache poisoned");
        entries.insert(0, (key, Arc::clone(&solver)));
        entries.truncate(CAPACITY);
        Ok(solver)
    }
}

impl Clone for FactorCache {
    fn clone(&self) -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    fn scaled_identity(s: f64) -> SparseMatrix {
        SparseMatrix::from_triplets(2, &[(0, 0, s), (1, 1, s)]).unwrap()
    }

    #[test]
    fn hit_returns_same_solver() {
        let cache = FactorCache::new();
        let builds = Cell::new(0);
        let get = |tau: f64| {
            cache
                .get_or_build(tau, || {
                    builds.set(builds.get() + 1);
                    scaled_identity(tau)
                })
                .unwrap()
        };
        let a = get(2.0);
        let b = get(2.0);
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(builds.get(), 1);
        let x = a.solve(&[4.0, 2.0], None).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn least_recently_used_is_evicted() {
        let cache = FactorCache::new();
        let builds = Cell::new(0);
        let get = |tau: f64| {
            cache
                .get_or_build(tau, || {
                    builds.set(builds.get() + 1);
                    scaled_identity(tau)
                })
                .unwrap()
        };
        for tau in [1.0, 2.0, 3.0, 4.0] {
            get(tau);
        }
        get(1.0);
        get(5.0);
        assert_eq!(builds.get(), 5);
        get(1.0);
        assert_eq!(builds.get(), 5);
        get(2.0);
        assert_eq!(builds.get(), 6);
    }

    #[test]
    fn clone_starts_empty_and_errors_propagate() {
        let cache = FactorCache::new();
        cache.get_or_build(1.0, || scaled_identity(1.0)).unwrap();
        let copy = cache.clone();
        let built = Cell::new(false);
        copy.get_or_build(1.0, || {
            built.set(true);
            scaled_identity(1.0)
        })
        .unwrap();
        assert!(built.get());
        assert_eq!(
            cache.get_or_build(-1.0, || scaled_identity(-1.0)).unwrap_err(),
            LinalgError::NotPositiveDefinite
        );
    }
}
