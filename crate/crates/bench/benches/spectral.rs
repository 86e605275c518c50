use criterion::{black_box, criterion_group, criterion_main, Criterion};
use sturm_core::bands::{BandTree, TransferContext};
use sturm_core::characteristics::{asymptotic_constants, characteristics_with};
use sturm_core::symbolic::{charpoly, incidence_matrix};
use sturm_core::thermo::{mean_cycles, Depth, Potential};
use sturm_core::check_alpha;

fn band_tree(c: &mut Criterion) {
    let ctx = TransferContext::new(check_alpha(&[1]).unwrap(), 24.0, 64).unwrap();
    c.bench_function("band tree a=1 to level 8", |b| {
        b.iter(|| BandTree::build(black_box(ctx.clone()), 8, None).unwrap())
    });
}

fn exact(c: &mut Criterion) {
    let m = incidence_matrix(&[2, 3]).unwrap().to_i64();
    c.bench_function("charpoly a=2,3", |b| b.iter(|| charpoly(black_box(&m))));
    c.bench_function("mean cycles a=2,3", |b| b.iter(|| mean_cycles(black_box(&[2, 3])).unwrap()));
    c.bench_function("asymptotic constants a=1", |b| b.iter(|| asymptotic_constants(black_box(&[1])).unwrap()));
}

fn pressure(c: &mut Criterion) {
    let mut g = c.benchmark_group("pressure");
    g.sample_size(10);
    let depth = Depth { max_len: 8, budget: 20_000 };
    g.bench_function("potential a=1 N=8", |b| b.iter(|| Potential::new(black_box(&[1]), 24.0, depth).unwrap()));
    let pot = Potential::new(&[1], 24.0, depth).unwrap();
    g.bench_function("pressure value", |b| b.iter(|| pot.pressure_value(black_box(0.7))));
    g.bench_function("characteristics a=1 N=8", |b| b.iter(|| characteristics_with(black_box(&pot)).unwrap()));
    g.finish();
}

criterion_group!(benches, band_tree, exact, pressure);
criterion_main!(benches);
