//! Benchmarks for the stages that dominate a convergence sweep: Gram
//! assembly, the Cholesky fit, periodic-kernel evaluation, spectral L2
//! measurement, and the constrained RBF solve.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ratedouble_core::interp::assemble_gram;
use ratedouble_core::{
    fit, fit_rbf, l2_error_spectral, spectral_target, CpdBasis, KernelSpec, KorobovSpace,
    PointSet, StudyConfig,
};

fn bench_gram_assembly(c: &mut Criterion) {
    let korobov = KernelSpec::Korobov(KorobovSpace::isotropic(1, 1.0, 1.0).unwrap());
    let planar = KernelSpec::Korobov(KorobovSpace::isotropic(2, 1.0, 0.9).unwrap());
    let nodes_1d = PointSet::equispaced(256).unwrap();
    let nodes_2d = PointSet::random(2, 256, 11, true).unwrap();
    let mk_nodes = PointSet::random(1, 256, 13, false).unwrap();

    let mut group = c.benchmark_group("gram_assembly_n256");
    group.bench_function("korobov_d1", |b| {
        b.iter(|| assemble_gram(black_box(&korobov), black_box(&nodes_1d)).unwrap())
    });
    group.bench_function("korobov_d2", |b| {
        b.iter(|| assemble_gram(black_box(&planar), black_box(&nodes_2d)).unwrap())
    });
    group.bench_function("min_kernel", |b| {
        b.iter(|| assemble_gram(black_box(&KernelSpec::MinKernel), black_box(&mk_nodes)).unwrap())
    });
    group.finish();
}

fn bench_cholesky_fit(c: &mut Criterion) {
    let kernel = KernelSpec::Korobov(KorobovSpace::isotropic(1, 1.0, 1.0).unwrap());
    let nodes = PointSet::equispaced(512).unwrap();
    let values: Vec<f64> = nodes
        .iter()
        .map(|x| (2.0 * std::f64::consts::PI * x[0]).sin() + 0.3 * x[0])
        .collect();
    c.bench_function("cholesky_fit_n512", |b| {
        b.iter(|| fit(black_box(&kernel), black_box(&nodes), black_box(&values)).unwrap())
    });
}

fn bench_kernel_eval(c: &mut Criterion) {
    let closed = KorobovSpace::isotropic(1, 2.0, 1.0).unwrap();
    let series = KorobovSpace::isotropic(1, 2.5, 1.0).unwrap();
    let grid: Vec<f64> = (0..1000).map(|k| k as f64 / 1000.0).collect();
    let mut group = c.benchmark_group("eta_grid_1000");
    group.bench_function("alpha2_closed_form", |b| {
        b.iter(|| grid.iter().map(|&t| closed.eta_fast(black_box(t))).sum::<f64>())
    });
    group.bench_function("alpha2p5_series", |b| {
        b.iter(|| grid.iter().map(|&t| series.eta_fast(black_box(t))).sum::<f64>())
    });
    group.finish();
}

fn bench_spectral_l2(c: &mut Criterion) {
    let space = KorobovSpace::isotropic(1, 1.0, 1.0).unwrap();
    let kernel = KernelSpec::Korobov(space.clone());
    let (rough_cfg, _) = StudyConfig::korobov_pair(1.0, 7);
    let g = spectral_target(&rough_cfg).unwrap();
    let nodes = PointSet::equispaced(64).unwrap();
    let values: Vec<f64> = nodes.iter().map(|x| g.value(x)).collect();
    let interp = fit(&kernel, &nodes, &values).unwrap();
    c.bench_function("spectral_l2_trunc_65536", |b| {
        b.iter(|| {
            l2_error_spectral(black_box(&space), black_box(&g), black_box(&interp), 65_536)
                .unwrap()
        })
    });
}

fn bench_rbf_solve(c: &mut Criterion) {
    let pts = PointSet::random(2, 200, 17, false).unwrap();
    let values: Vec<f64> = pts.iter().map(|x| (x[0] - 0.4).hypot(x[1] - 0.6)).collect();
    c.bench_function("thin_plate_saddle_n200", |b| {
        b.iter(|| fit_rbf(black_box(&CpdBasis::ThinPlate), black_box(&pts), black_box(&values)))
    });
}

criterion_group!(
    benches,
    bench_gram_assembly,
    bench_cholesky_fit,
    bench_kernel_eval,
    bench_spectral_l2,
    bench_rbf_solve
);
criterion_main!(benches);
