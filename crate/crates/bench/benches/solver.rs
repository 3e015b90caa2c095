use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ncbase::random::{random_sa_element, random_system, rng_for};
use ncbase::{build_paulsen, nc_base_norm_sa, BaseSpec, ClassicalBaseSpace, ComplexPoint, ConeProvider, Field, OperatorSpaceRep};

fn norms(c: &mut Criterion) {
    let sys = Arc::new(random_system(&mut rng_for(0, 0), 3, 5, Field::Complex).unwrap());
    let dual = BaseSpec::normalized_trace(sys.clone());
    let inherited = BaseSpec::new(ConeProvider::inherited(sys.clone()), sys.unit_coords()).unwrap();
    let mut group = c.benchmark_group("nc_base_norm_sa");
    group.sample_size(10);
    for n in 1..=3 {
        let x = random_sa_element(&mut rng_for(0, n as u64), &sys, n);
        group.bench_with_input(BenchmarkId::new("dual_cp", n), &x, |b, x| b.iter(|| nc_base_norm_sa(&dual, x).unwrap()));
        group.bench_with_input(BenchmarkId::new("inherited", n), &x, |b, x| {
            b.iter(|| nc_base_norm_sa(&inherited, x).unwrap())
        });
    }
    group.finish();
}

fn paulsen(c: &mut Criterion) {
    let v = OperatorSpaceRep::random(&mut rng_for(0, 1), 2, 2, 2, Field::Complex).unwrap();
    let ps = build_paulsen(&v).unwrap();
    let x = random_sa_element(&mut rng_for(1, 0), ps.system(), 2);
    let mut group = c.benchmark_group("paulsen");
    group.sample_size(10);
    group.bench_function("base_norm_level2", |b| b.iter(|| nc_base_norm_sa(ps.base(), &x).unwrap()));
    group.finish();
}

fn classical(c: &mut Criterion) {
    let sp = ClassicalBaseSpace::simplex(4);
    let u = ComplexPoint { re: vec![0.3, -0.2, 0.5, 0.1], im: vec![-0.4, 0.2, 0.0, 0.3] };
    c.bench_function("extended_base_norm_simplex4", |b| b.iter(|| sp.extended_base_norm(&u).unwrap()));
}

criterion_group!(benches, norms, paulsen, classical);
criterion_main!(benches);
