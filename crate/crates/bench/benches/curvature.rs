use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use noncurv_bench::fixture;
use noncurv_core::certify::{min_curvature, OptimizerConfig};
use noncurv_core::curvature::{k_direct, CurvatureForm};
use noncurv_core::series::series_general;

fn oracle(c: &mut Criterion) {
    for key in ["su2-so4-g2", "spin7p-spin8-spin10"] {
        let f = fixture(key);
        c.bench_function(&format!("k_direct/{key}"), |b| {
            b.iter(|| k_direct(&f.chain, &f.def, black_box(0.2), &f.x, &f.y).unwrap())
        });
        c.bench_function(&format!("series_general/{key}"), |b| {
            b.iter(|| series_general(&f.chain, &f.def, black_box(&f.x), &f.y).unwrap())
        });
    }
}

fn forms(c: &mut Criterion) {
    let f = fixture("su3-spin6-spin7");
    c.bench_function("curvature_form/su3-spin6-spin7", |b| {
        b.iter(|| CurvatureForm::new(&f.chain, &f.def, black_box(0.2), true).unwrap())
    });
    let form = CurvatureForm::new(&f.chain, &f.def, 0.2, true).unwrap();
    let (xi, eta) = (f.chain.to_p(&f.x), f.chain.to_p(&f.y));
    c.bench_function("curvature_form_value_grad/su3-spin6-spin7", |b| {
        b.iter(|| form.value_grad(black_box(&xi), &eta))
    });
}

fn optimization(c: &mut Criterion) {
    let f = fixture("so4-so5-so6");
    let cfg = OptimizerConfig {
        starts: 8,
        ..OptimizerConfig::default()
    };
    let mut group = c.benchmark_group("min_curvature");
    group.sample_size(10);
    group.bench_function("so4-so5-so6/t=0.35", |b| {
        b.iter(|| min_curvature(&f.chain, &f.def, black_box(0.35), &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, oracle, forms, optimization);
criterion_main!(benches);
