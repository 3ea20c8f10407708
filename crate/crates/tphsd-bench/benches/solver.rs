use criterion::{black_box, criterion_group, criterion_main, Criterion};
use tphsd_core::{
    a_map, grad_p_fd, make_problem, random_init, run_tphsd, stationarity_measure, tmg_step,
    GradPMode, MomentumState, ProblemSpec, RunConfig,
};

fn bench_steps(c: &mut Criterion) {
    let spec = ProblemSpec::SinSynthetic { n: 100, c: 2.0 };
    let oracle = make_problem(&spec).unwrap();
    let pt = random_init(&spec, 1);
    let cfg = RunConfig::default();
    let m = MomentumState::new(pt.dim());

    c.bench_function("tmg_step sin n=100 analytic", |b| {
        b.iter(|| tmg_step(oracle.as_ref(), black_box(&pt), &m, 10, &cfg).unwrap())
    });

    let fd_cfg = RunConfig {
        grad_p_mode: GradPMode::FiniteDifference,
        ..RunConfig::default()
    };
    c.bench_function("tmg_step sin n=100 fd", |b| {
        b.iter(|| tmg_step(oracle.as_ref(), black_box(&pt), &m, 10, &fd_cfg).unwrap())
    });

    c.bench_function("grad_p_fd sin n=100", |b| {
        b.iter(|| grad_p_fd(oracle.as_ref(), black_box(&pt), 1e-4).unwrap())
    });
}

fn bench_dense_ops(c: &mut Criterion) {
    let spec = ProblemSpec::SinSynthetic { n: 100, c: 2.0 };
    let oracle = make_problem(&spec).unwrap();
    let pt = random_init(&spec, 2);

    c.bench_function("a_map sin n=100", |b| {
        b.iter(|| a_map(oracle.as_ref(), black_box(&pt), 1e-12).unwrap())
    });

    c.bench_function("stationarity sin n=100", |b| {
        b.iter(|| stationarity_measure(oracle.as_ref(), black_box(&pt), 1e-12).unwrap())
    });
}

fn bench_full_run(c: &mut Criterion) {
    let spec = ProblemSpec::quadratic_default();
    let oracle = make_problem(&spec).unwrap();
    let x0 = tphsd_core::Point::from_xy(2.0, -1.0).unwrap();
    let cfg = RunConfig {
        max_iters: 1000,
        ..RunConfig::default()
    };

    c.bench_function("run_tphsd quad 1e3 iters", |b| {
        b.iter(|| run_tphsd(oracle.as_ref(), black_box(&x0), &cfg).unwrap())
    });
}

criterion_group!(benches, bench_steps, bench_dense_ops, bench_full_run);
criterion_main!(benches);
