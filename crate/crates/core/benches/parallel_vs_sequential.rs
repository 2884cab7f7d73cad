use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gabor_core::asymptotics::convergence_study;
use gabor_core::domain::LatticeDomain;
use gabor_core::lattice::Lattice2D;
use gabor_core::localization::{pf_double_sum, PfMethod, DEFAULT_MATRIX_CAP};
use gabor_core::par;
use gabor_core::window::{kernel_table, painless_window, KernelTable, Window};

fn setup() -> (Window, Lattice2D, KernelTable, LatticeDomain) {
    let w = painless_window(FRAC_1_SQRT_2, FRAC_1_SQRT_2, SQRT_2, SQRT_2 - FRAC_1_SQRT_2).unwrap();
    let l = Lattice2D::rectangular(FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap();
    let t = kernel_table(&w, &l, 1e-10).unwrap();
    let d = LatticeDomain::square(1, l.clone()).unwrap();
    (w, l, t, d)
}

/// Runs `f` either on the current rayon pool or forced onto the calling thread.
fn mode<R>(parallel: bool, f: impl FnOnce() -> R) -> R {
    if parallel {
        f()
    } else {
        par::sequential(f)
    }
}

fn benches(c: &mut Criterion) {
    let (w, l, t, d) = setup();

    let mut g = c.benchmark_group("kernel_table");
    g.sample_size(10);
    for parallel in [true, false] {
        let label = if parallel { "parallel" } else { "sequential" };
        g.bench_function(label, |b| b.iter(|| mode(parallel, || kernel_table(black_box(&w), &l, 1e-10).unwrap())));
    }
    g.finish();

    let mut g = c.benchmark_group("pf_double_sum");
    g.sample_size(10);
    for r in [8i64, 32] {
        let region = d.dilate_integer(r);
        for parallel in [true, false] {
            let label = if parallel { "parallel" } else { "sequential" };
            g.bench_with_input(BenchmarkId::new(label, r), &region, |b, region| {
                b.iter(|| mode(parallel, || pf_double_sum(&t, black_box(region), None).unwrap()))
            });
        }
    }
    g.finish();

    let mut g = c.benchmark_group("convergence_study");
    g.sample_size(10);
    for parallel in [true, false] {
        let label = if parallel { "parallel" } else { "sequential" };
        g.bench_function(label, |b| {
            b.iter(|| {
                mode(parallel, || {
                    convergence_study(&t, &d, &[4, 8, 16], PfMethod::DoubleSum, DEFAULT_MATRIX_CAP).unwrap()
                })
            })
        });
    }
    g.finish();
}

criterion_group!(parallel_vs_sequential, benches);
criterion_main!(parallel_vs_sequential);
