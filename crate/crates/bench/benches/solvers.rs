use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use varadmm::admm::{run, StepPolicy, StopCriterion, StopRule};
use varadmm::fem::stiffness_matrix;
use varadmm::linalg::{solve_spd, BandedCholesky};
use varadmm::{build_mesh, make_rof_data, ObstacleProblem, RofProblem, SplittingProblem};

fn spd_solves(c: &mut Criterion) {
    let mut group = c.benchmark_group("spd_solve");
    for level in [5u32, 6] {
        let mesh = build_mesh(level).unwrap();
        let a = stiffness_matrix(&mesh, true);
        let b = vec![1.0; a.n_rows()];
        group.bench_with_input(BenchmarkId::new("cg", level), &level, |bench, _| {
            bench.iter(|| solve_spd(black_box(&a), black_box(&b), 1e-10).unwrap())
        });
        let chol = BandedCholesky::factor(&a).unwrap();
        group.bench_with_input(BenchmarkId::new("cholesky_solve", level), &level, |bench, _| {
            bench.iter(|| chol.solve(black_box(&b)))
        });
        group.bench_with_input(BenchmarkId::new("cholesky_factor", level), &level, |bench, _| {
            bench.iter(|| BandedCholesky::factor(black_box(&a)).unwrap())
        });
    }
    group.finish();
}

fn ten_iterations<P: SplittingProblem>(problem: &P, tau: f64) {
    let stop = StopRule::new(StopCriterion::Residual { eps: f64::MIN_POSITIVE }, 10);
    let report = run(problem, &StepPolicy::Fixed { tau }, &stop, problem.zero_x(), problem.zero_y()).unwrap();
    black_box(report.u);
}

fn admm_iterations(c: &mut Criterion) {
    let mut group = c.benchmark_group("admm_10_iterations");
    for level in [5u32, 6] {
        let mesh = build_mesh(level).unwrap();
        let h = mesh.h();
        let obstacle = ObstacleProblem::new(mesh.clone());
        group.bench_with_input(BenchmarkId::new("obstacle", level), &level, |bench, _| {
            bench.iter(|| ten_iterations(&obstacle, 1.0 / h))
        });
        let rof = RofProblem::new(mesh, 20.0, make_rof_data(level, 0).unwrap().g).unwrap();
        group.bench_with_input(BenchmarkId::new("rof", level), &level, |bench, _| {
            bench.iter(|| ten_iterations(&rof, 1.0 / h))
        });
    }
    group.finish();
}

criterion_group!(benches, spd_solves, admm_iterations);
criterion_main!(benches);
