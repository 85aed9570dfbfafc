//! Seeding and low-level sampling helpers.
//!
//! Every replica owns one ChaCha8 generator seeded from a 64-bit value.
//! Replica seeds derive from the master seed through the fixed mixing
//! function below, so an ensemble is a pure function of
//! `(master_seed, replica_index)`. Reproducibility is bit-exact within
//! one build of this crate, not across implementations.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The per-replica generator.
pub type SimRng = ChaCha8Rng;

/// SplitMix64 output function (Steele, Lea, Flood 2014).
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of replica `index` from the master seed.
///
/// `seed_i = splitmix64(master ^ splitmix64(index + 1))`; the inner hash
/// decorrelates consecutive indices, the outer one mixes in the master.
pub fn replica_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index.wrapping_add(1)))
}

/// Builds the generator for one replica.
pub fn replica_rng(master_seed: u64, index: u64) -> SimRng {
    SimRng::seed_from_u64(replica_seed(master_seed, index))
}

/// One Bernoulli(p) draw. Consumes exactly one `f64` from the stream.
#[inline]
pub fn bernoulli(rng: &mut SimRng, p: f64) -> bool {
    rng.random::<f64>() < p
}

/// Number of failures before the first success in a Bernoulli(q) process,
/// by inversion of the geometric CDF. Returned as `f64` so that callers
/// can compare against a remaining-slot budget without overflow; the
/// value is `+inf` when the uniform draw is exactly zero.
#[inline]
pub fn geometric_failures(rng: &mut SimRng, q: f64) -> f64 {
    debug_assert!(q > 0.0 && q < 1.0);
    geometric_failures_with(rng, (-q).ln_1p())
}

/// As [`geometric_failures`], with `ln(1-q)` precomputed (scans drawing
/// many gaps at the same rate hoist the logarithm).
#[inline]
pub fn geometric_failures_with(rng: &mut SimRng, ln_one_minus_q: f64) -> f64 {
    let u: f64 = rng.random();
    // ln(u)/ln(1-q), with u ~ U[0,1) standing in for 1-U.
    (u.ln() / ln_one_minus_q).floor()
}
