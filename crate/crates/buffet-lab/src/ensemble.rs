//! Replica orchestration and first-order verification statistics.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::observables::{AggregateRow, LambdaTable};
use crate::params::Parameters;
use crate::regime::{classify_regime, Regime};
use crate::rng::replica_seed;
use crate::scaling::{scaling_rule, Quantity, ScalingRule};
use crate::state::StepMode;
use crate::stats::{mean, normality_check, std_error, NormalityReport, NORMALITY_MIN_N};
use crate::trajectory::{simulate_with, Trajectory};

/// Runs `f` over replica indices `0..replicas` in parallel, returning
/// the results in replica order regardless of scheduling.
pub fn par_replicas<T: Send>(replicas: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..replicas).into_par_iter().map(f).collect()
}

/// Ensemble execution settings.
#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub horizon: u64,
    pub replicas: usize,
    pub master_seed: u64,
    pub n_tagged: usize,
    pub checkpoints: Vec<u64>,
    pub mode: StepMode,
    /// Band width multiplier for the iterated-logarithm check; `None`
    /// skips it.
    pub lil_c: Option<f64>,
}

/// Per-quantity ensemble record.
#[derive(Debug, Clone)]
pub struct QuantitySummary {
    pub quantity: Quantity,
    pub rule: Option<ScalingRule>,
    /// Terminal rescaled value of each replica (in replica order;
    /// replicas without the quantity are dropped).
    pub terminal_rescaled: Vec<f64>,
    pub dropped_replicas: usize,
    pub mean: f64,
    pub std_error: f64,
    /// Coefficient of variation of the rescaled terminal values.
    pub cv: f64,
    pub normality: Option<NormalityReport>,
    pub skipped: Option<String>,
}

/// Pooled iterated-logarithm band statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LilSummary {
    pub c: f64,
    pub checked: u64,
    pub violations: u64,
}

impl LilSummary {
    pub fn fraction(&self) -> f64 {
        if self.checked == 0 {
            0.0
        } else {
            self.violations as f64 / self.checked as f64
        }
    }
}

/// Ensemble result: per-quantity terminal rescaled statistics.
#[derive(Debug, Clone)]
pub struct EnsembleSummary {
    pub params: Parameters,
    pub regime: Regime,
    pub horizon: u64,
    pub replicas: usize,
    pub master_seed: u64,
    pub n_tagged: usize,
    pub quantities: Vec<QuantitySummary>,
    pub lil: Option<LilSummary>,
}

fn extract_raw(row: &AggregateRow, quantity: Quantity) -> Option<f64> {
    match quantity {
        Quantity::D => Some(row.d as f64),
        Quantity::Z => Some(row.z),
        Quantity::Tbar => Some(row.tbar),
        Quantity::Pbar => row.pbar,
        Quantity::Kbar => row.kbar,
        Quantity::KTagged => row.tagged.first().map(|d| d.count as f64),
        Quantity::PTagged => row.tagged.first().map(|d| d.inclusion_probability),
    }
}

/// Launches independent replicas with derived seeds, rescales the
/// terminal observables per the regime's scaling rules, and aggregates.
pub fn run_ensemble(
    params: &Parameters,
    cfg: &EnsembleConfig,
    quantities: &[Quantity],
) -> Result<EnsembleSummary> {
    params.validate()?;
    if cfg.replicas < 2 {
        return Err(Error::InvalidConfig("ensemble needs at least 2 replicas".into()));
    }
    let regime = classify_regime(params);
    let table = Arc::new(LambdaTable::new(params, cfg.horizon));
    let lil_c = cfg.lil_c;

    struct ReplicaOut {
        terminal: Vec<Option<f64>>,
        lil_checked: u64,
        lil_violations: u64,
    }

    let rules: Vec<std::result::Result<ScalingRule, String>> = quantities
        .iter()
        .map(|&q| scaling_rule(&regime, q, params).map_err(|e| e.to_string()))
        .collect();

    let outs: Vec<Result<ReplicaOut>> = par_replicas(cfg.replicas, |i| {
        let seed = replica_seed(cfg.master_seed, i as u64);
        let tr = simulate_with(
            params,
            cfg.horizon,
            &cfg.checkpoints,
            cfg.n_tagged,
            seed,
            cfg.mode,
            Some(Arc::clone(&table)),
        )?;
        let row = tr.last();
        let terminal = quantities
            .iter()
            .zip(&rules)
            .map(|(&q, rule)| match rule {
                Ok(rule) => extract_raw(row, q).map(|raw| rule.rescale(row.t as f64, raw)),
                Err(_) => None,
            })
            .collect();
        let (mut checked, mut violations) = (0u64, 0u64);
        if let Some(c) = lil_c {
            let lil = lil_band_check(&tr.rows, c);
            checked = lil.checked;
            violations = lil.violations;
        }
        Ok(ReplicaOut {
            terminal,
            lil_checked: checked,
            lil_violations: violations,
        })
    });

    let mut per_quantity: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.replicas); quantities.len()];
    let mut dropped = vec![0usize; quantities.len()];
    let mut lil_checked = 0u64;
    let mut lil_violations = 0u64;
    for out in outs {
        let out = out?;
        for (k, v) in out.terminal.into_iter().enumerate() {
            match v {
                Some(v) => per_quantity[k].push(v),
                None => dropped[k] += 1,
            }
        }
        lil_checked += out.lil_checked;
        lil_violations += out.lil_violations;
    }

    let mut summaries = Vec::with_capacity(quantities.len());
    for ((&quantity, rule), (values, dropped)) in quantities
        .iter()
        .zip(rules)
        .zip(per_quantity.into_iter().zip(dropped))
    {
        let summary = match rule {
            Err(reason) => QuantitySummary {
                quantity,
                rule: None,
                terminal_rescaled: Vec::new(),
                dropped_replicas: cfg.replicas,
                mean: f64::NAN,
                std_error: f64::NAN,
                cv: f64::NAN,
                normality: None,
                skipped: Some(reason),
            },
            Ok(rule) => {
                if values.len() < 2 {
                    QuantitySummary {
                        quantity,
                        rule: Some(rule),
                        terminal_rescaled: values,
                        dropped_replicas: dropped,
                        mean: f64::NAN,
                        std_error: f64::NAN,
                        cv: f64::NAN,
                        normality: None,
                        skipped: Some("fewer than 2 replicas produced the quantity".into()),
                    }
                } else {
                    let m = mean(&values);
                    let se = std_error(&values);
                    let sd = se * (values.len() as f64).sqrt();
                    let normality = if values.len() >= NORMALITY_MIN_N {
                        normality_check(&values).ok()
                    } else {
                        None
                    };
                    QuantitySummary {
                        quantity,
                        rule: Some(rule),
                        terminal_rescaled: values,
                        dropped_replicas: dropped,
                        mean: m,
                        std_error: se,
                        cv: if m != 0.0 { sd / m.abs() } else { f64::NAN },
                        normality,
                        skipped: None,
                    }
                }
            }
        };
        summaries.push(summary);
    }

    Ok(EnsembleSummary {
        params: *params,
        regime,
        horizon: cfg.horizon,
        replicas: cfg.replicas,
        master_seed: cfg.master_seed,
        n_tagged: cfg.n_tagged,
        quantities: summaries,
        lil: lil_c.map(|c| LilSummary {
            c,
            checked: lil_checked,
            violations: lil_violations,
        }),
    })
}

/// Rescaled series plus the Cauchy gap over the last decade.
#[derive(Debug, Clone)]
pub struct ConvergenceDiagnostic {
    pub rescaled: Vec<(u64, f64)>,
    /// Max of `|x(t) - x(end)| / |x(end)|` over checkpoints in the last
    /// decade.
    pub gap: f64,
    pub converged: bool,
}

/// Default "converged" threshold for the Cauchy gap.
pub const DEFAULT_GAP_FRACTION: f64 = 0.05;

/// Rescales a trajectory's quantity and measures its terminal Cauchy gap.
pub fn convergence_diagnostic(
    trajectory: &Trajectory,
    rule: &ScalingRule,
    gap_fraction: f64,
) -> Result<ConvergenceDiagnostic> {
    if trajectory.rows.len() < 3 {
        return Err(Error::BadSample(
            "convergence diagnostic needs at least 3 checkpoints".into(),
        ));
    }
    let rescaled: Vec<(u64, f64)> = trajectory
        .rows
        .iter()
        .filter_map(|row| {
            extract_raw(row, rule.quantity).map(|raw| (row.t, rule.rescale(row.t as f64, raw)))
        })
        .collect();
    if rescaled.len() < 3 {
        return Err(Error::BadSample("quantity missing at most checkpoints".into()));
    }
    let (t_end, x_end) = *rescaled.last().unwrap();
    let start = t_end / 10;
    let denom = x_end.abs().max(f64::MIN_POSITIVE);
    let gap = rescaled
        .iter()
        .filter(|(t, _)| *t >= start)
        .map(|(_, x)| (x - x_end).abs() / denom)
        .fold(0.0f64, f64::max);
    Ok(ConvergenceDiagnostic {
        rescaled,
        gap,
        converged: gap < gap_fraction,
    })
}

/// Checks the `c`-widened iterated-logarithm band along one replica's
/// checkpoint rows: a violation is `|D_t - Lambda_t|` exceeding
/// `c * sqrt(2 Lambda_t ln ln Lambda_t)`. Only checkpoints with
/// `Lambda_t >= e^2` participate (so the double logarithm exceeds
/// `ln 2 > 0` and the band is real).
pub fn lil_band_check(rows: &[AggregateRow], c: f64) -> LilSummary {
    let min_lambda = std::f64::consts::E * std::f64::consts::E;
    let mut checked = 0u64;
    let mut violations = 0u64;
    for row in rows {
        let lam = row.lambda_cum;
        if lam < min_lambda {
            continue;
        }
        checked += 1;
        let band = c * (2.0 * lam * lam.ln().ln()).sqrt();
        if (row.d as f64 - lam).abs() > band {
            violations += 1;
        }
    }
    LilSummary {
        c,
        checked,
        violations,
    }
}
