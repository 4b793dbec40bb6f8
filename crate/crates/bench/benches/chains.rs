use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use puchain::oracle::brute_partition;
use puchain::puniform::{detect_puniform, DEFAULT_MATCH_TOL};
use puchain::simulate::sample_chain;
use puchain_bench::{density_family, density_model, stability_matrix};

fn partition(c: &mut Criterion) {
    let mut group = c.benchmark_group("log_partition");
    for n in [3usize, 4, 5] {
        let model = density_model(n);
        let family = density_family(n);
        group.bench_with_input(BenchmarkId::new("fast", n), &n, |b, _| {
            b.iter(|| model.fast_log_partition(black_box(&[0.7])).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("brute", n), &n, |b, _| {
            b.iter(|| brute_partition(&family, black_box(&[0.7])).unwrap())
        });
    }
    group.finish();
}

fn detection(c: &mut Criterion) {
    let p = stability_matrix(4, 0.3);
    c.bench_function("detect_puniform/stability_n4", |b| {
        b.iter(|| detect_puniform(black_box(&p), DEFAULT_MATCH_TOL))
    });
}

fn simulation(c: &mut Criterion) {
    let p = stability_matrix(4, 0.3);
    c.bench_function("sample_chain/stability_n4_10k", |b| {
        b.iter(|| sample_chain(&p, 0, 10_000, black_box(7)).unwrap())
    });
}

criterion_group!(benches, partition, detection, simulation);
criterion_main!(benches);
