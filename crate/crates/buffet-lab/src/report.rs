//! The `report` subcommand: regime classification, scaling-rule table
//! with the run's parameters substituted, and a set of fast
//! verification checks suitable for CI gating.

use std::fmt::Write as _;

use crate::config::RunConfig;
use crate::ensemble::{convergence_diagnostic, run_ensemble, EnsembleConfig};
use crate::error::Result;
use crate::observables::identity_residual;
use crate::regime::{boundary_proximity, classify_regime};
use crate::scaling::{scaling_rule, LimitKind, Quantity};
use crate::trajectory::{geometric_checkpoints, simulate_with};

pub struct ReportOutcome {
    pub text: String,
    pub all_passed: bool,
}

const ALL_QUANTITIES: [Quantity; 7] = [
    Quantity::D,
    Quantity::Z,
    Quantity::Tbar,
    Quantity::Pbar,
    Quantity::Kbar,
    Quantity::KTagged,
    Quantity::PTagged,
];

/// Builds the report. Checks are desk-scale (seconds); the full
/// acceptance suite lives in the integration tests.
pub fn run_report(cfg: &RunConfig) -> Result<ReportOutcome> {
    let params = &cfg.params;
    let mut out = String::new();
    let mut all_passed = true;
    let mut check = |out: &mut String, name: &str, pass: bool, detail: String| {
        writeln!(out, "[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" }).unwrap();
        if !pass {
            all_passed = false;
        }
        pass
    };

    writeln!(out, "# regime classification").unwrap();
    let regime = classify_regime(params);
    writeln!(out, "mean case: {}", regime.mean_case).unwrap();
    writeln!(out, "dish case: {}", regime.dish_case).unwrap();
    for warning in boundary_proximity(params, 1e-9) {
        writeln!(out, "warning: {warning}").unwrap();
    }

    writeln!(out, "\n# scaling rules (parameters substituted)").unwrap();
    for q in ALL_QUANTITIES {
        match scaling_rule(&regime, q, params) {
            Ok(rule) => {
                let limit = match rule.limit {
                    LimitKind::Deterministic(v) => format!("-> {v}"),
                    LimitKind::RandomZstar { coeff } => format!("-> {coeff} * Zstar_inf"),
                    LimitKind::RandomKstar { coeff } => format!("-> {coeff} * Kstar_inf_j"),
                };
                writeln!(out, "{q}: factor {} {limit}", rule.factor).unwrap();
            }
            Err(e) => writeln!(out, "{q}: {e}").unwrap(),
        }
    }

    writeln!(out, "\n# checks").unwrap();
    let horizon = cfg.horizon.min(20_000).max(100);
    let cps = geometric_checkpoints(horizon, 20);

    // Identity suite on one trajectory.
    let tr = simulate_with(params, horizon, &cps, cfg.n_tagged, cfg.master_seed, cfg.mode, None)?;
    let mut worst = 0.0f64;
    let mut ordered = true;
    for row in &tr.rows {
        worst = worst.max(identity_residual(row, params));
        if !(0.0 <= row.r && row.r <= row.s && row.s <= row.z) {
            ordered = false;
        }
    }
    check(
        &mut out,
        "identities",
        worst <= 1e-12 && ordered,
        format!("max relative residual {worst:.3e} over {} checkpoints; 0<=R<=S<=Z {ordered}", tr.rows.len()),
    );

    // Determinism.
    let tr2 = simulate_with(params, horizon, &cps, cfg.n_tagged, cfg.master_seed, cfg.mode, None)?;
    check(
        &mut out,
        "determinism",
        tr.rows == tr2.rows,
        "same seed twice gives identical trajectories".into(),
    );

    // Synchronization at iota = 1 (exact), otherwise probability range.
    if params.iota == 1.0 {
        let sync = tr.rows.iter().all(|row| {
            row.tagged
                .iter()
                .all(|obs| Some(obs.inclusion_probability) == row.pbar)
        });
        check(
            &mut out,
            "synchronization",
            sync,
            "tagged inclusion probabilities equal Pbar bitwise".into(),
        );
    }
    let in_range = tr.rows.iter().all(|row| {
        row.tagged
            .iter()
            .all(|obs| (0.0..=1.0).contains(&obs.inclusion_probability))
    });
    check(&mut out, "probability range", in_range, "all recorded P in [0,1]".into());

    // Scaling-rule convergence trend on a small ensemble for D and the
    // regime's mean quantity (lenient desk-scale thresholds).
    let ens = run_ensemble(
        params,
        &EnsembleConfig {
            horizon,
            replicas: cfg.replicas.clamp(4, 16),
            master_seed: cfg.master_seed,
            n_tagged: cfg.n_tagged,
            checkpoints: cps.clone(),
            mode: cfg.mode,
            lil_c: Some(cfg.lil_c),
        },
        &[Quantity::D],
    )?;
    let dq = &ens.quantities[0];
    if let Some(rule) = &dq.rule {
        if let Some(limit) = rule.deterministic_limit() {
            let rel = (dq.mean - limit).abs() / limit;
            check(
                &mut out,
                "D scaling",
                rel < 0.25,
                format!("mean rescaled D {:.4} vs limit {limit:.4} (rel {rel:.3})", dq.mean),
            );
        }
    }
    if let Some(lil) = &ens.lil {
        check(
            &mut out,
            "LIL band",
            lil.fraction() < 0.05,
            format!("violation fraction {:.4} over {} checkpoints", lil.fraction(), lil.checked),
        );
    }
    let rule = scaling_rule(&regime, Quantity::Z, params)?;
    let diag = convergence_diagnostic(&tr, &rule, cfg.gap_fraction.max(0.5))?;
    check(
        &mut out,
        "Z rescaled trend",
        diag.converged,
        format!("last-decade Cauchy gap {:.3} (desk-scale threshold {})", diag.gap, cfg.gap_fraction.max(0.5)),
    );

    Ok(ReportOutcome { text: out, all_passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, ConfigDraft};

    #[test]
    fn report_passes_on_a_sane_config() {
        let mut d = ConfigDraft::default();
        d.set("master-seed", "5");
        d.set("alpha", "1");
        d.set("beta", "0.5");
        d.set("w", "0.8");
        d.set("iota", "0.3");
        d.set("horizon", "5000");
        let cfg = resolve(&d, "report").unwrap();
        let outcome = run_report(&cfg).unwrap();
        assert!(outcome.all_passed, "{}", outcome.text);
        assert!(outcome.text.contains("mean case"));
    }

    #[test]
    fn report_substitutes_table_cells() {
        let mut d = ConfigDraft::default();
        d.set("master-seed", "5");
        d.set("beta", "0.8");
        d.set("w", "0.4");
        d.set("horizon", "2000");
        let cfg = resolve(&d, "report").unwrap();
        let outcome = run_report(&cfg).unwrap();
        // Kbar cell beta/(beta-w) = 2
        assert!(outcome.text.contains("Kbar: factor t^0 -> 2"), "{}", outcome.text);
    }
}
