//! Criterion benchmarks for the subproblem solvers live in `benches/`.
