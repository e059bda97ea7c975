use criterion::{criterion_group, criterion_main, Criterion};
use lgle::polymer::log_partition_final_row;
use lgle::sampling::{sample_gamma_ln, sample_gig0};
use lgle::tw::tw_gue_cdf;
use lgle_bench::{bench_rng, small_boundary};
use std::hint::black_box;

fn bench_samplers(c: &mut Criterion) {
    let mut rng = bench_rng();
    c.bench_function("gamma_ln theta=2", |b| {
        b.iter(|| sample_gamma_ln(black_box(2.0), &mut rng).unwrap())
    });
    c.bench_function("gig0 (2,2)", |b| {
        b.iter(|| sample_gig0(black_box(2.0), black_box(2.0), &mut rng).unwrap())
    });
}

fn bench_partition(c: &mut Criterion) {
    c.bench_function("log_partition 256x256", |b| {
        let mut rep = 0u64;
        b.iter(|| {
            rep += 1;
            let mut rng = lgle::RngStream::new(1, rep);
            log_partition_final_row(256, 256, 2.0, &mut rng).unwrap()
        })
    });
}

fn bench_coupling(c: &mut Criterion) {
    let (sampler, boundary) = small_boundary(8);
    let window = sampler.default_window(&boundary);
    let ctx = sampler.coupling_context(&boundary, window).unwrap();
    let mut rng = bench_rng();
    c.bench_function("grand_coupling T=8 (shared ladder)", |b| {
        b.iter(|| {
            let u: Vec<f64> = (0..6).map(|_| rng.uniform()).collect();
            ctx.sample(&u).unwrap()
        })
    });
    c.bench_function("coupling ladder build T=8", |b| {
        b.iter(|| sampler.coupling_context(&boundary, window).unwrap())
    });
}

fn bench_bridge(c: &mut Criterion) {
    let sampler = lgle::GibbsSampler::new(2.0).unwrap();
    let cache = sampler.bridge_cache(512, 0.0, 295.0).unwrap();
    let mut rng = bench_rng();
    let mut out = vec![0.0; 512];
    c.bench_function("bridge draw T=512", |b| {
        b.iter(|| cache.sample_into(&mut out, &mut rng))
    });
}

fn bench_tw(c: &mut Criterion) {
    c.bench_function("tw_gue_cdf(-1)", |b| b.iter(|| tw_gue_cdf(black_box(-1.0)).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench_samplers, bench_partition, bench_coupling, bench_bridge, bench_tw
}
criterion_main!(benches);
