use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use srgkit::lti::{self, Tf};
use srgkit::par;
use srgkit::region::{self, CalcConfig, DiskAlgebraRegion, Region};

fn lattice_ops(c: &mut Criterion) {
    let cfg = CalcConfig::with_cells(400);
    let a = Region::DiskAlgebra(DiskAlgebraRegion::disk(2.0, 1.0)).to_cover(&cfg).unwrap();
    let b = Region::DiskAlgebra(DiskAlgebraRegion { upper: vec![(0.0, 1.5)], lower: vec![(0.0, 0.5)], infinity: false })
        .to_cover(&cfg)
        .unwrap();
    let mut group = c.benchmark_group("lattice");
    group.sample_size(10);
    for (name, sequential) in [("parallel", false), ("sequential", true)] {
        par::set_sequential(sequential);
        group.bench_with_input(BenchmarkId::new("product", name), &(), |bch, _| {
            bch.iter(|| region::minkowski_product(&a, &b, &cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sum", name), &(), |bch, _| bch.iter(|| region::minkowski_sum(&a, &b, &cfg).unwrap()));
    }
    par::set_sequential(false);
    group.finish();
}

fn lti_bound(c: &mut Criterion) {
    let g = Tf::new(&[1.0, 2.0], &lti::poly_mul(&[1.0, 1.0], &[1.0, 0.4, 4.0])).to_ss().unwrap();
    let (grid, ups, lam) = lti::auto_grids(&g).unwrap();
    let mut group = c.benchmark_group("lti_bound");
    for (name, sequential) in [("parallel", false), ("sequential", true)] {
        par::set_sequential(sequential);
        group.bench_function(name, |bch| bch.iter(|| lti::lti_srg_bound(&g, &ups, &lam, &grid, lti::Inflation::default()).unwrap()));
    }
    par::set_sequential(false);
    group.finish();
}

criterion_group!(benches, lattice_ops, lti_bound);
criterion_main!(benches);
