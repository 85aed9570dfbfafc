//! Strong-law demonstration: rescaled observables against their
//! regime's predicted limits, for a handful of parameter sets.
//!
//!     cargo run --release --example strong_laws

use buffet_lab::params::Parameters;
use buffet_lab::regime::classify_regime;
use buffet_lab::rng::replica_seed;
use buffet_lab::scaling::{scaling_rule, LimitKind, Quantity};
use buffet_lab::stats::mean;
use buffet_lab::trajectory::simulate;

fn main() {
    let cases = [
        ("D power law", Parameters::new(2.0, 0.5, 1.0, 0.4, 0.0).unwrap(), Quantity::D, 200_000),
        ("Z strong forcing", Parameters::new(1.0, 0.8, 1.0, 0.4, 0.0).unwrap(), Quantity::Z, 100_000),
        ("Kbar strong forcing", Parameters::new(1.0, 0.8, 1.0, 0.4, 0.0).unwrap(), Quantity::Kbar, 100_000),
        ("Tbar critical", Parameters::new(2.0, 0.5, 1.0, 0.5, 0.0).unwrap(), Quantity::Tbar, 1_000_000),
    ];
    for (name, params, quantity, horizon) in cases {
        let regime = classify_regime(&params);
        let rule = scaling_rule(&regime, quantity, &params).unwrap();
        let replicas = 24;
        let values: Vec<f64> = (0..replicas)
            .map(|i| {
                let tr = simulate(&params, horizon, &[horizon], 2, replica_seed(42, i)).unwrap();
                let row = tr.last();
                let raw = match quantity {
                    Quantity::D => row.d as f64,
                    Quantity::Z => row.z,
                    Quantity::Tbar => row.tbar,
                    Quantity::Kbar => row.kbar.unwrap_or(f64::NAN),
                    _ => unreachable!(),
                };
                rule.rescale(horizon as f64, raw)
            })
            .collect();
        let m = mean(&values);
        match rule.limit {
            LimitKind::Deterministic(limit) => {
                println!(
                    "{name}: mean rescaled {quantity} = {m:.4}, predicted limit {limit:.4} \
                     (ratio {:.3})",
                    m / limit
                );
            }
            _ => println!("{name}: mean rescaled {quantity} = {m:.4} (random limit)"),
        }
    }
}
