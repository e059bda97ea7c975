//! Shared fixtures for the benchmarks.

use lgle::gibbs::{BoundaryData, GibbsSampler};
use lgle::RngStream;

pub fn bench_rng() -> RngStream {
    RngStream::new(0xBE7C_4A11, 0)
}

pub fn small_boundary(t_len: usize) -> (GibbsSampler, BoundaryData) {
    let sampler = GibbsSampler::new(1.0).expect("theta > 0");
    let z = (0..t_len).map(|s| Some(-1.0 + 0.02 * s as f64)).collect();
    let boundary = BoundaryData::new(0.0, 0.4, z).expect("valid boundary");
    (sampler, boundary)
}
