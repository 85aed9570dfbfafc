//! Second-order (CLT) verification pipelines.
//!
//! Random limits are approximated by terminal rescaled values at
//! `t_max`, far beyond the checkpoint `t_check` where residuals are
//! taken. For the *shift* and *concentration* statistics the limit
//! proxy is additionally drift-corrected (the same compact-form
//! correction, evaluated at `t_max`): without that correction the
//! proxy's own finite-horizon drift of relative size
//! `(t_check/t_max)^(w-beta)` would contaminate targets that the
//! fluctuations cannot hide.

use std::sync::Arc;

use crate::ensemble::par_replicas;
use crate::error::{Error, Result};
use crate::observables::LambdaTable;
use crate::params::Parameters;
use crate::regime::{classify_regime, CltDishCase, CltMeanCase, Regime};
use crate::rng::replica_seed;
use crate::state::StepMode;
use crate::stats::{normality_check, NormalityReport};
use crate::trajectory::simulate_with;

/// Settings shared by both CLT pipelines.
#[derive(Debug, Clone, Copy)]
pub struct CltConfig {
    pub replicas: usize,
    pub t_check: u64,
    pub t_max: u64,
    pub master_seed: u64,
    pub n_tagged: usize,
}

impl CltConfig {
    fn validate(&self, min_ratio: u64) -> Result<()> {
        if self.replicas < 2 {
            return Err(Error::InvalidConfig("need at least 2 replicas".into()));
        }
        if self.t_check == 0 || self.t_check > self.t_max / min_ratio {
            return Err(Error::InvalidConfig(format!(
                "t_check must satisfy 1 <= t_check <= t_max/{min_ratio}"
            )));
        }
        Ok(())
    }
}

/// Per-replica columns of the mean-quantity CLT pipeline.
#[derive(Debug, Clone)]
pub struct MeanCltSample {
    pub regime: Regime,
    pub t_check: u64,
    pub t_max: u64,
    /// Drift-corrected, standardized residuals of `Tbar` at `t_check`
    /// (the quantities that should be standard normal).
    pub standardized: Vec<f64>,
    /// `t^(w/2) (t^(1-w) Z - Zstar proxy)` without the drift
    /// correction at `t_check`; at `beta = w/2` its mean approaches
    /// `-alpha`.
    pub uncorrected_z_residual: Vec<f64>,
    /// `t^(w-beta) (t^(1-w) Tbar - Zstar proxy / w)`; for
    /// `w/2 < beta < w` it concentrates at `-alpha/(w-beta)`.
    pub tbar_concentration: Vec<f64>,
    /// Plain terminal proxies `w * t_max^(1-w) * Tbar(t_max)`.
    pub zstar_proxy: Vec<f64>,
    /// Limit-variance proxies (`Sigma_inf`).
    pub sigma_proxy: Vec<f64>,
}

impl MeanCltSample {
    pub fn normality(&self) -> Result<NormalityReport> {
        normality_check(&self.standardized)
    }
}

/// Runs the mean CLT pipeline (requires `beta < w`).
///
/// Per replica: the `Zstar` proxy is `w * t_max^(1-w) * Tbar(t_max)`;
/// `Sigma_inf` is that proxy except in the no-forcing no-interaction
/// case (`w = 1`, `iota = 0`) where it is `Zstar - R(t_max)`; the
/// residual at `t_check` carries the drift correction
/// `(alpha/(w-beta)) t^-(w-beta)` and is standardized by
/// `sqrt(Sigma_inf / w)`.
pub fn clt_pipeline_mean(params: &Parameters, cfg: &CltConfig) -> Result<MeanCltSample> {
    params.validate()?;
    cfg.validate(100)?;
    let regime = classify_regime(params);
    if regime.clt_mean_case == CltMeanCase::None {
        return Err(Error::RegimeMismatch(
            "mean CLT requires beta < w".into(),
        ));
    }
    let (alpha, beta, w) = (params.alpha, params.beta, params.w);
    let table = Arc::new(LambdaTable::new(params, cfg.t_max));
    let checkpoints = [cfg.t_check, cfg.t_max];

    struct Row {
        standardized: f64,
        uncorrected_z: f64,
        concentration: f64,
        zstar: f64,
        sigma: f64,
    }

    let rows: Vec<Result<Row>> = par_replicas(cfg.replicas, |i| {
        let seed = replica_seed(cfg.master_seed, i as u64);
        let tr = simulate_with(
            params,
            cfg.t_max,
            &checkpoints,
            cfg.n_tagged,
            seed,
            StepMode::Histogram,
            Some(Arc::clone(&table)),
        )?;
        let at_check = tr.at(cfg.t_check).expect("t_check recorded");
        let at_max = tr.at(cfg.t_max).expect("t_max recorded");
        let tc = cfg.t_check as f64;
        let tm = cfg.t_max as f64;

        let zstar = w * tm.powf(1.0 - w) * at_max.tbar;
        let sigma = if w < 1.0 || params.iota > 0.0 {
            zstar
        } else {
            zstar - at_max.r
        };
        let drift_at = |t: f64| alpha / (w - beta) * t.powf(-(w - beta));
        let scale = tc.powf(w / 2.0);
        let standardized = scale
            * (tc.powf(1.0 - w) * at_check.tbar + drift_at(tc) - zstar / w)
            / (sigma / w).max(f64::MIN_POSITIVE).sqrt();
        // Drift-corrected proxy for the shift/concentration statistics.
        let zstar_corrected = zstar + w * drift_at(tm);
        let uncorrected_z = scale * (tc.powf(1.0 - w) * at_check.z - zstar_corrected);
        let concentration =
            tc.powf(w - beta) * (tc.powf(1.0 - w) * at_check.tbar - zstar_corrected / w);
        Ok(Row {
            standardized,
            uncorrected_z,
            concentration,
            zstar,
            sigma,
        })
    });

    let mut out = MeanCltSample {
        regime,
        t_check: cfg.t_check,
        t_max: cfg.t_max,
        standardized: Vec::with_capacity(cfg.replicas),
        uncorrected_z_residual: Vec::with_capacity(cfg.replicas),
        tbar_concentration: Vec::with_capacity(cfg.replicas),
        zstar_proxy: Vec::with_capacity(cfg.replicas),
        sigma_proxy: Vec::with_capacity(cfg.replicas),
    };
    for row in rows {
        let row = row?;
        out.standardized.push(row.standardized);
        out.uncorrected_z_residual.push(row.uncorrected_z);
        out.tbar_concentration.push(row.concentration);
        out.zstar_proxy.push(row.zstar);
        out.sigma_proxy.push(row.sigma);
    }
    Ok(out)
}

/// Per-replica columns of the dish-level CLT pipeline.
#[derive(Debug, Clone)]
pub struct DishCltSample {
    pub regime: Regime,
    pub case: CltDishCase,
    pub t_check: u64,
    pub t_max: u64,
    /// Case (i): standardized residuals of the first tagged dish.
    pub standardized: Vec<f64>,
    /// Case (ii): per-replica ratio of the measured concentration
    /// statistic to its predicted value
    /// `-(iota beta/alpha)/(beta - w iota) * Zstar proxy`.
    pub concentration_ratio: Vec<f64>,
    /// Terminal proxies of `Kstar` for the first tagged dish.
    pub kstar_proxy: Vec<f64>,
    /// Replicas dropped because the tagged dish was born after `t_check`.
    pub dropped: usize,
}

impl DishCltSample {
    pub fn normality(&self) -> Result<NormalityReport> {
        normality_check(&self.standardized)
    }
}

/// Runs the dish CLT pipeline on the first tagged dish (requires the
/// low-interaction regime).
pub fn clt_pipeline_dish(params: &Parameters, cfg: &CltConfig) -> Result<DishCltSample> {
    params.validate()?;
    cfg.validate(10)?;
    if cfg.n_tagged == 0 {
        return Err(Error::InvalidConfig("dish pipeline needs n_tagged >= 1".into()));
    }
    let regime = classify_regime(params);
    let case = regime.clt_dish_case;
    if case == CltDishCase::None {
        return Err(Error::RegimeMismatch(
            "dish CLT requires low interaction (iota = 0 or iota < min(beta/w, 1))".into(),
        ));
    }
    let (alpha, beta, w, iota) = (params.alpha, params.beta, params.w, params.iota);
    let exponent = (1.0 - iota) * w;
    let drift_needed = matches!(
        case,
        CltDishCase::CaseI { critical_drift: true }
            | CltDishCase::CaseII
            | CltDishCase::CaseIIWithClt
    );
    let drift_coeff = if drift_needed {
        iota * (beta / alpha) / (beta - w * iota)
    } else {
        0.0
    };
    let table = Arc::new(LambdaTable::new(params, cfg.t_max));
    let checkpoints = [cfg.t_check, cfg.t_max];

    enum Row {
        Dropped,
        Ok {
            standardized: f64,
            ratio: f64,
            kstar: f64,
        },
    }

    let rows: Vec<Result<Row>> = par_replicas(cfg.replicas, |i| {
        let seed = replica_seed(cfg.master_seed, i as u64);
        let tr = simulate_with(
            params,
            cfg.t_max,
            &checkpoints,
            cfg.n_tagged,
            seed,
            StepMode::Histogram,
            Some(Arc::clone(&table)),
        )?;
        let at_check = tr.at(cfg.t_check).expect("t_check recorded");
        let at_max = tr.at(cfg.t_max).expect("t_max recorded");
        let (Some(dish_check), Some(dish_max)) = (at_check.tagged.first(), at_max.tagged.first())
        else {
            return Ok(Row::Dropped);
        };
        if dish_check.birth > cfg.t_check / 10 {
            // Born too late for the asymptotic residual to be meaningful.
            return Ok(Row::Dropped);
        }
        let tc = cfg.t_check as f64;
        let tm = cfg.t_max as f64;
        let zstar = w * tm.powf(1.0 - w) * at_max.tbar;
        let kstar = tm.powf(-exponent) * dish_max.count as f64;
        let rescaled_check = tc.powf(-exponent) * dish_check.count as f64;
        let drift_at = |t: f64| drift_coeff * zstar * t.powf(-(beta - w * iota));
        // Limit variance of the residual: the selection indicators have
        // conditional variance P(1-P); the rescaled second-moment limit
        // is Kstar when the inclusion probabilities vanish, but in the
        // boundary case (1-iota)w = 1 they converge to Kstar itself and
        // the Bernoulli factor (1 - Kstar) survives.
        let var_proxy = if exponent == 1.0 {
            kstar * (1.0 - kstar)
        } else {
            kstar
        };
        let standardized = tc.powf(exponent / 2.0)
            * (rescaled_check + drift_at(tc) - kstar)
            / var_proxy.max(f64::MIN_POSITIVE).sqrt();
        let ratio = if drift_needed {
            let kstar_corrected = kstar + drift_at(tm);
            let measured = tc.powf(beta - w * iota) * (rescaled_check - kstar_corrected);
            let predicted = -drift_coeff * zstar;
            measured / predicted
        } else {
            f64::NAN
        };
        Ok(Row::Ok {
            standardized,
            ratio,
            kstar,
        })
    });

    let mut out = DishCltSample {
        regime,
        case,
        t_check: cfg.t_check,
        t_max: cfg.t_max,
        standardized: Vec::new(),
        concentration_ratio: Vec::new(),
        kstar_proxy: Vec::new(),
        dropped: 0,
    };
    for row in rows {
        match row? {
            Row::Dropped => out.dropped += 1,
            Row::Ok {
                standardized,
                ratio,
                kstar,
            } => {
                out.standardized.push(standardized);
                if ratio.is_finite() {
                    out.concentration_ratio.push(ratio);
                }
                out.kstar_proxy.push(kstar);
            }
        }
    }
    if out.standardized.is_empty() {
        return Err(Error::BadSample("every replica was dropped".into()));
    }
    Ok(out)
}
