use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use shellspec_core::convex_geometry::{steiner_fit, ConvexBody, ConvexBody3D};
use shellspec_core::exec::Execution;
use shellspec_core::fem::{richardson_estimate, RichardsonOptions};
use shellspec_core::mesh::fixtures;
use shellspec_core::morse3d::classify_critical_points;
use shellspec_core::BoundaryCondition::Robin;

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn steiner(c: &mut Criterion) {
    let cube = ConvexBody::Polytope { polytope: ConvexBody3D::cube(1.0).unwrap() };
    let mut g = c.benchmark_group("steiner_fit");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| steiner_fit(black_box(&cube), &[0.1, 0.2, 0.3, 0.4], 100_000, 1, exec).unwrap())
        });
    }
    g.finish();
}

fn richardson(c: &mut Criterion) {
    let d = fixtures::eccentric_annulus(0.3).unwrap();
    let mut g = c.benchmark_group("richardson_levels");
    g.sample_size(10);
    for (name, exec) in MODES {
        let mut opts = RichardsonOptions::new(32, 4, 3);
        opts.exec = exec;
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| richardson_estimate(black_box(&d), Robin(1.0), Robin(1.0), &opts).unwrap())
        });
    }
    g.finish();
}

fn morse(c: &mut Criterion) {
    let mut g = c.benchmark_group("morse3d_scan");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| classify_critical_points(black_box([-2.0; 3]), [2.0; 3], 24, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, steiner, richardson, morse);
criterion_main!(benches);
