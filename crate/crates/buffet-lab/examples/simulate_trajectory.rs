//! Run a single replica and print its checkpointed trajectory as CSV.
//!
//!     cargo run --release --example simulate_trajectory

use buffet_lab::config::{resolve, ConfigDraft};
use buffet_lab::export::trajectory_to_csv;
use buffet_lab::params::Parameters;
use buffet_lab::trajectory::{geometric_checkpoints, simulate};

fn main() {
    let params = Parameters::new(2.0, 0.5, 1.0, 1.0, 0.0).unwrap();
    let horizon = 100_000;
    let checkpoints = geometric_checkpoints(horizon, 10);
    let trajectory = simulate(&params, horizon, &checkpoints, 4, 7).unwrap();

    // The provenance echo normally comes from the CLI configuration.
    let mut draft = ConfigDraft::default();
    draft.set("alpha", "2");
    draft.set("beta", "0.5");
    draft.set("master-seed", "7");
    draft.set("horizon", horizon);
    draft.set("n-tagged", "4");
    let cfg = resolve(&draft, "simulate").unwrap();
    print!("{}", trajectory_to_csv(&trajectory, &cfg.echo()));
}
