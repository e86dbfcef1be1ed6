use carpet_core::billiard::{simulate, BilliardState, BilliardTable};
use carpet_core::compat::build_sequence;
use carpet_core::segment::{classify_segment, classify_segment_exhaustive, corner_hit_solver, SegmentQuery};
use carpet_core::slopes::{slopes_a, slopes_a_new};
use carpet_core::surface::{build_surface, euler_count, genus_census};
use carpet_core::{CarpetParams, Direction, Point, Rational};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn slopes(c: &mut Criterion) {
    c.bench_function("slopes_a(99)", |b| b.iter(|| slopes_a(black_box(99)).unwrap()));
    c.bench_function("corner_hit_solver(99, 49/50)", |b| {
        let s = Rational::frac(49, 50);
        b.iter(|| corner_hit_solver(99, black_box(&s)).unwrap())
    });
    c.bench_function("new slopes a<=99", |b| {
        b.iter(|| (5..=99u64).step_by(2).map(|a| slopes_a_new(a).unwrap().len()).sum::<usize>())
    });
}

fn classify(c: &mut Criterion) {
    let mut g = c.benchmark_group("classify a=7 slope 1/2");
    for depth in [2u32, 3, 4] {
        let q =
            SegmentQuery { start: Point::origin(), slope: Rational::frac(1, 2), params: CarpetParams::new(7, depth).unwrap() };
        g.bench_with_input(BenchmarkId::new("walker", depth), &q, |b, q| b.iter(|| classify_segment(q).unwrap()));
        g.bench_with_input(BenchmarkId::new("exhaustive", depth), &q, |b, q| b.iter(|| classify_segment_exhaustive(q).unwrap()));
    }
    g.finish();
}

fn orbits(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate");
    for (a, n, x, (dx, dy)) in [(7u64, 2u32, (1, 7), (2, 1)), (5, 3, (3, 10), (3, 1)), (3, 4, (1, 2), (1, 1))] {
        let table = BilliardTable::new(CarpetParams::new(a, n).unwrap());
        let init = BilliardState::new(Point::new(Rational::frac(x.0, x.1), Rational::zero()), Direction::new(dx, dy).unwrap());
        g.bench_function(format!("a={a} n={n} ({}/{},0) dir ({dx},{dy})", x.0, x.1), |b| {
            b.iter(|| simulate(&table, black_box(&init), 1_000_000).unwrap())
        });
    }
    g.finish();
    c.bench_function("sequence a=5 (3/10,0) 1/3 levels 0..3", |b| {
        let init = BilliardState::new(Point::frac(3, 10, 0, 1), Direction::new(3, 1).unwrap());
        b.iter(|| build_sequence(5, black_box(&init), 0..=3, 1_000_000).unwrap())
    });
}

fn surfaces(c: &mut Criterion) {
    let mut g = c.benchmark_group("surface a=3");
    for n in [1u32, 2, 3] {
        g.bench_with_input(BenchmarkId::new("census genus", n), &n, |b, &n| {
            b.iter(|| genus_census(&build_surface(3, n).unwrap()).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("euler count", n), &n, |b, &n| {
            b.iter(|| euler_count(&CarpetParams::new(3, n).unwrap()).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, slopes, classify, orbits, surfaces);
criterion_main!(benches);
