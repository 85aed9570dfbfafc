//! Check the iterated-logarithm envelope of the distinct-dish count:
//! |D_t - Lambda_t| should stay inside c * sqrt(2 Lambda ln ln Lambda)
//! for c comfortably above 1.
//!
//!     cargo run --release --example lil_band

use std::sync::Arc;

use buffet_lab::ensemble::{lil_band_check, par_replicas};
use buffet_lab::observables::LambdaTable;
use buffet_lab::params::Parameters;
use buffet_lab::rng::replica_seed;
use buffet_lab::state::StepMode;
use buffet_lab::trajectory::{geometric_checkpoints, simulate_with};

fn main() {
    let replicas = 50;
    let horizon = 300_000;
    for beta in [0.0, 0.5, 1.0] {
        let params = Parameters::new(2.0, beta, 1.0, 0.4, 0.0).unwrap();
        let cps = geometric_checkpoints(horizon, 20);
        let table = Arc::new(LambdaTable::new(&params, horizon));
        for c in [1.0, 3.0] {
            let (checked, violations) = par_replicas(replicas, |i| {
                let tr = simulate_with(
                    &params,
                    horizon,
                    &cps,
                    0,
                    replica_seed(77, i as u64),
                    StepMode::Histogram,
                    Some(Arc::clone(&table)),
                )
                .unwrap();
                let lil = lil_band_check(&tr.rows, c);
                (lil.checked, lil.violations)
            })
            .into_iter()
            .fold((0u64, 0u64), |acc, x| (acc.0 + x.0, acc.1 + x.1));
            println!(
                "beta={beta}: c={c}: {violations}/{checked} checkpoints outside the band \
                 ({:.4})",
                violations as f64 / checked as f64
            );
        }
    }
}
