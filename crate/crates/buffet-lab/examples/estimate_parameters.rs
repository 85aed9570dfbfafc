//! Closed-loop parameter recovery: simulate with known parameters,
//! then recover (alpha, beta, w, iota) from log-log fits of the
//! ensemble-averaged observables.
//!
//!     cargo run --release --example estimate_parameters

use std::sync::Arc;

use buffet_lab::ensemble::par_replicas;
use buffet_lab::estimate::{averaged_series, estimate_parameters};
use buffet_lab::export::estimation_to_text;
use buffet_lab::observables::LambdaTable;
use buffet_lab::params::Parameters;
use buffet_lab::rng::replica_seed;
use buffet_lab::state::StepMode;
use buffet_lab::trajectory::{geometric_checkpoints, simulate_with};

fn main() {
    let truth = Parameters::new(1.0, 0.4, 1.0, 0.9, 0.2).unwrap();
    let horizon = 300_000;
    let replicas = 16;
    println!("ground truth: alpha=1, beta=0.4, w=0.9, iota=0.2");
    println!("simulating {replicas} replicas to t = {horizon} ...");
    let cps = geometric_checkpoints(horizon, 40);
    let table = Arc::new(LambdaTable::new(&truth, horizon));
    let trajectories: Vec<_> = par_replicas(replicas, |i| {
        simulate_with(
            &truth,
            horizon,
            &cps,
            4,
            replica_seed(2026, i as u64),
            StepMode::Histogram,
            Some(Arc::clone(&table)),
        )
        .unwrap()
    });
    let series = averaged_series(&trajectories).unwrap();
    let report = estimate_parameters(&series, 2.0).unwrap();
    print!("{}", estimation_to_text(&report, &[]));
}
