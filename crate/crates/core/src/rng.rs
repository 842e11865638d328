//! Deterministic random streams.
//!
//! All Monte Carlo code draws from ChaCha8 keyed by the run seed, with the
//! trial index as the ChaCha stream id. Trial `i` therefore sees the same
//! numbers whether trials run serially, in parallel, or in a different order.
//! Normal variates use the inverse CDF of one uniform each, so draw counts
//! never depend on rejection.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform on the open interval (0, 1) with 53 random bits.
pub fn open_unit<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

pub fn standard_normal<R: RngCore>(rng: &mut R) -> f64 {
    thread_local! {
        static STD: Normal = Normal::new(0.0, 1.0).expect("unit normal");
    }
    let u = open_unit(rng);
    STD.with(|n| n.inverse_cdf(u))
}
