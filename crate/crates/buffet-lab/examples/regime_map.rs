//! Print the regime classification and the scaling rules (factor,
//! limit) of every observable for a grid of parameter choices.
//!
//!     cargo run --release --example regime_map

use buffet_lab::params::Parameters;
use buffet_lab::regime::{boundary_proximity, classify_regime};
use buffet_lab::scaling::{scaling_rule, LimitKind, Quantity};

fn main() {
    let cases = [
        (1.0, 0.0, 1.0, 0.7, 0.0),
        (1.0, 0.3, 1.0, 0.7, 0.0),
        (1.0, 0.3, 1.0, 0.7, 0.6),
        (1.0, 0.35, 1.0, 0.7, 0.5),
        (1.0, 0.7, 1.0, 0.7, 0.2),
        (1.0, 0.9, 1.0, 0.4, 0.0),
        (1.0, 0.5, 1.0, 0.8, 1.0),
    ];
    for (alpha, beta, theta, w, iota) in cases {
        let params = Parameters::new(alpha, beta, theta, w, iota).unwrap();
        let regime = classify_regime(&params);
        println!("== alpha={alpha} beta={beta} theta={theta} w={w} iota={iota}");
        println!("   mean case: {}", regime.mean_case);
        println!("   dish case: {}", regime.dish_case);
        for warning in boundary_proximity(&params, 1e-9) {
            println!("   warning: {warning}");
        }
        for q in [
            Quantity::D,
            Quantity::Z,
            Quantity::Tbar,
            Quantity::Pbar,
            Quantity::Kbar,
            Quantity::KTagged,
            Quantity::PTagged,
        ] {
            match scaling_rule(&regime, q, &params) {
                Ok(rule) => {
                    let limit = match rule.limit {
                        LimitKind::Deterministic(v) => format!("{v:.4}"),
                        LimitKind::RandomZstar { coeff } => format!("{coeff:.4} * Zstar"),
                        LimitKind::RandomKstar { coeff } => format!("{coeff:.4} * Kstar_j"),
                    };
                    println!("   {q:<9} factor {:<18} -> {limit}", rule.factor.to_string());
                }
                Err(e) => println!("   {q:<9} {e}"),
            }
        }
    }
}
