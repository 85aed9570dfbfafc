//! Exact Poisson and Binomial variate generation.
//!
//! All samplers are exact (inversion for small parameters, exact
//! rejection for large ones); no normal approximation is used anywhere,
//! because the verification harness is distribution-sensitive. Large
//! cases delegate to `rand_distr`, whose Poisson (Knuth inversion /
//! rejection) and Binomial (BINV / BTPE) samplers are exact.

use rand::distr::Distribution;
use rand::Rng;

use crate::rng::SimRng;

/// Threshold between the inline Knuth product loop and `rand_distr`.
const POISSON_INLINE_MAX_MEAN: f64 = 10.0;

/// Buckets at most this wide are sampled by counting Bernoulli draws.
const BINOMIAL_BERNOULLI_MAX_N: u64 = 16;

/// Draws Poisson(`mean`) given `exp(-mean)` precomputed by the caller.
///
/// Knuth's product-of-uniforms inversion; exact for any mean, efficient
/// only for small ones. The innovation stream evaluates `exp(-lambda_t)`
/// once per time step (or reads it from a shared table), so the common
/// zero outcome costs a single uniform draw.
#[inline]
pub fn poisson_with_exp(rng: &mut SimRng, mean: f64, exp_neg_mean: f64) -> u64 {
    if mean > POISSON_INLINE_MAX_MEAN {
        return poisson_large(rng, mean);
    }
    let mut product: f64 = rng.random();
    let mut count = 0u64;
    while product > exp_neg_mean {
        product *= rng.random::<f64>();
        count += 1;
    }
    count
}

/// Draws Poisson(`mean`) without a cached exponential.
pub fn poisson(rng: &mut SimRng, mean: f64) -> u64 {
    if mean > POISSON_INLINE_MAX_MEAN {
        poisson_large(rng, mean)
    } else {
        poisson_with_exp(rng, mean, (-mean).exp())
    }
}

fn poisson_large(rng: &mut SimRng, mean: f64) -> u64 {
    let dist = rand_distr::Poisson::new(mean).expect("poisson mean must be positive and finite");
    dist.sample(rng) as u64
}

/// Draws Binomial(`n`, `p`). Narrow buckets count Bernoulli successes
/// (identical in distribution); wide ones use `rand_distr`.
#[inline]
pub fn binomial(rng: &mut SimRng, n: u64, p: f64) -> u64 {
    debug_assert!((0.0..=1.0).contains(&p), "binomial p out of range: {p}");
    if n <= BINOMIAL_BERNOULLI_MAX_N {
        let mut hits = 0u64;
        for _ in 0..n {
            if rng.random::<f64>() < p {
                hits += 1;
            }
        }
        hits
    } else {
        rand_distr::Binomial::new(n, p)
            .expect("binomial p validated by caller")
            .sample(rng)
    }
}
