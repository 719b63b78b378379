use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use wfr_core::exponents::{check_recursion, exponent_row, int, rat, rational_grid};
use wfr_core::extension::{extend_grid, FrequencyProfile, Profile, RuleSpec};
use wfr_core::fractal::{cantor_measure, decay_fit};
use wfr_core::wavepackets::{decompose, PartitionParams};
use wfr_core::Grid;

fn exponents(c: &mut Criterion) {
    let grid = rational_grid(&int(0), &int(6), &rat(1, 100), true);
    c.bench_function("exponent_row d=6 x600", |b| {
        b.iter(|| {
            grid.iter()
                .map(|a| exponent_row(6, a).unwrap().beta_lower)
                .count()
        })
    });
    c.bench_function("check_recursion d=6 x600", |b| {
        b.iter(|| check_recursion(6, black_box(&grid)).unwrap().checked)
    });
}

fn decay(c: &mut Criterion) {
    let mu = cantor_measure(2, 2, 0.25, 6).unwrap();
    c.bench_function("decay_fit four-corner depth 6", |b| {
        b.iter(|| decay_fit(&mu, 1.0, 64.0, 6, None).unwrap().fitted_beta)
    });
}

fn extension(c: &mut Criterion) {
    let f =
        FrequencyProfile::sample(&Profile::random(1, 3, 6), 2, RuleSpec::for_radius(64.0)).unwrap();
    let grid = Grid::cube(2, 64.0, 0.5).unwrap();
    c.bench_function("extend_grid d=2 R=64", |b| {
        b.iter(|| extend_grid(&f, &grid, 64.0, None).unwrap().len())
    });
}

fn wavepackets(c: &mut Criterion) {
    let r = 256.0;
    let f = FrequencyProfile::sample(
        &Profile::random(1, 3, 6),
        2,
        RuleSpec::midpoint_for_radius(r),
    )
    .unwrap();
    c.bench_function("decompose d=2 R=256", |b| {
        b.iter(|| {
            decompose(&f, r, 0.05, PartitionParams::default())
                .unwrap()
                .pieces
                .len()
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = exponents, decay, extension, wavepackets
}
criterion_main!(benches);
