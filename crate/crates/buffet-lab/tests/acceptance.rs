//! Verification gate: one test per criterion, each printing a PASS/FAIL
//! line (run with `--nocapture` to see them as they complete).
//!
//! The underlying limit theorems are asymptotic and almost-sure; they
//! are verified here at desk scale through seeded Monte Carlo with
//! pinned tolerances. Random limits are estimated by terminal rescaled
//! values at a far horizon; statistics whose targets a finite-horizon
//! proxy would visibly shift use the drift-corrected proxy (see
//! `cltpipe`). Each test is deterministic given its frozen master seed.

use std::sync::Arc;

use buffet_lab::cltpipe::{clt_pipeline_dish, clt_pipeline_mean, CltConfig};
use buffet_lab::ensemble::{
    convergence_diagnostic, lil_band_check, par_replicas, run_ensemble, EnsembleConfig,
};
use buffet_lab::estimate::{averaged_series, estimate_parameters};
use buffet_lab::observables::{identity_residual, LambdaTable};
use buffet_lab::params::Parameters;
use buffet_lab::recursion::{
    clt_residuals, concentration_statistic, positivity_fraction, run_recursion, run_sa, Attractor,
    DynamicsForm, Innovation, LimitVariance, MartingaleNoise, RecursionSpec, Remainder, SAProblem,
    StepSize,
};
use buffet_lab::regime::classify_regime;
use buffet_lab::rng::replica_seed;
use buffet_lab::scaling::{scaling_rule, Quantity};
use buffet_lab::state::StepMode;
use buffet_lab::stats::{mean, median, normality_check, std_error, variance};
use buffet_lab::trajectory::{geometric_checkpoints, simulate_with, Trajectory};

fn params(alpha: f64, beta: f64, theta: f64, w: f64, iota: f64) -> Parameters {
    Parameters::new(alpha, beta, theta, w, iota).unwrap()
}

fn verdict(criterion: &str, pass: bool, detail: &str) {
    println!("[{}] criterion {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion}: {detail}");
}

fn run_batch(
    p: &Parameters,
    horizon: u64,
    checkpoints: &[u64],
    n_tagged: usize,
    replicas: usize,
    master_seed: u64,
) -> Vec<Trajectory> {
    let table = Arc::new(LambdaTable::new(p, horizon));
    par_replicas(replicas, |i| {
        simulate_with(
            p,
            horizon,
            checkpoints,
            n_tagged,
            replica_seed(master_seed, i as u64),
            StepMode::Histogram,
            Some(Arc::clone(&table)),
        )
        .unwrap()
    })
}

/// Criterion 1: the four exact identities hold to 1e-12 relative on
/// every checkpoint of 100 mixed-parameter trajectories (horizon 1e5).
#[test]
fn criterion_01_identity_suite() {
    let alphas = [0.5, 1.0, 2.0];
    let betas = [0.0, 0.25, 0.5, 0.8, 1.0];
    let ws = [0.3, 0.6, 1.0];
    let iotas = [0.0, 0.4, 1.0];
    let mut worst = 0.0f64;
    let mut ordered = true;
    let mut rows = 0usize;
    for k in 0..100 {
        let p = params(
            alphas[k % 3],
            betas[k % 5],
            1.0 + (k % 4) as f64,
            ws[k % 2 + (k % 7 == 0) as usize],
            iotas[k % 3],
        );
        let cps = geometric_checkpoints(100_000, 10);
        let tr = simulate_with(&p, 100_000, &cps, 3, 1000 + k as u64, StepMode::Histogram, None)
            .unwrap();
        for row in &tr.rows {
            worst = worst.max(identity_residual(row, &p));
            ordered &= 0.0 <= row.r && row.r <= row.s && row.s <= row.z;
            rows += 1;
        }
    }
    verdict(
        "1 (identity suite)",
        worst <= 1e-12 && ordered,
        &format!("max relative residual {worst:.2e} over {rows} rows; ordering R<=S<=Z: {ordered}"),
    );
}

/// Criterion 2: D strong law. beta=0.5: mean D/sqrt(t) in [3.8, 4.2];
/// beta=0: mean D/ln(t) in [1.8, 2.2] (alpha = 2, horizon 1e6, 50
/// replicas each).
#[test]
fn criterion_02_d_strong_law() {
    let horizon = 1_000_000;
    let mk = |beta: f64| EnsembleConfig {
        horizon,
        replicas: 50,
        master_seed: 0xB0F2 + (beta * 10.0) as u64,
        n_tagged: 0,
        checkpoints: vec![horizon],
        mode: StepMode::Histogram,
        lil_c: None,
    };
    let half = run_ensemble(&params(2.0, 0.5, 1.0, 0.4, 0.0), &mk(0.5), &[Quantity::D]).unwrap();
    let m_half = half.quantities[0].mean;
    let zero = run_ensemble(&params(2.0, 0.0, 1.0, 0.4, 0.0), &mk(0.0), &[Quantity::D]).unwrap();
    let m_zero = zero.quantities[0].mean;
    verdict(
        "2 (D strong law)",
        (3.8..=4.2).contains(&m_half) && (1.8..=2.2).contains(&m_zero),
        &format!("mean D/sqrt(t) = {m_half:.4} (target 4); mean D/ln(t) = {m_zero:.4} (target 2)"),
    );
}

/// Criterion 3: D central limit theorem. sqrt(t^beta) (D/t^beta -
/// alpha/beta) passes the normality gate over 2000 replicas with
/// variance within 15% of alpha/beta = 4.
#[test]
fn criterion_03_d_clt() {
    let horizon = 100_000u64;
    let p = params(2.0, 0.5, 1.0, 0.4, 0.0);
    let summary = run_ensemble(
        &p,
        &EnsembleConfig {
            horizon,
            replicas: 2000,
            master_seed: 0xB0F3,
            n_tagged: 0,
            checkpoints: vec![horizon],
            mode: StepMode::Histogram,
            lil_c: None,
        },
        &[Quantity::D],
    )
    .unwrap();
    let scale = (horizon as f64).powf(p.beta).sqrt();
    let stats: Vec<f64> = summary.quantities[0]
        .terminal_rescaled
        .iter()
        .map(|v| scale * (v - 4.0))
        .collect();
    let gate = normality_check(&stats).unwrap();
    let var = variance(&stats);
    verdict(
        "3 (D CLT)",
        gate.pass && (var - 4.0).abs() <= 0.15 * 4.0,
        &format!(
            "variance {var:.3} (target 4 +- 15%); gate pass={} (skew {:.3}, kurt {:.3}, \
             cdf {:.4}/{:.4})",
            gate.pass, gate.skewness, gate.excess_kurtosis, gate.cdf_max_deviation, gate.cdf_band
        ),
    );
}

/// Criterion 4: iterated-logarithm band. Pooled violation fraction of
/// the c=3 band below 1% across 100 replicas for beta in {0, 0.5, 1}.
#[test]
fn criterion_04_lil_band() {
    let horizon = 1_000_000;
    let cps = geometric_checkpoints(horizon, 20);
    let mut checked = 0u64;
    let mut violations = 0u64;
    for (k, beta) in [0.0, 0.5, 1.0].into_iter().enumerate() {
        let p = params(2.0, beta, 1.0, 0.4, 0.0);
        let trs = run_batch(&p, horizon, &cps, 0, 100, 0xB0F4 + k as u64);
        for tr in &trs {
            let lil = lil_band_check(&tr.rows, 3.0);
            checked += lil.checked;
            violations += lil.violations;
        }
    }
    let fraction = violations as f64 / checked as f64;
    verdict(
        "4 (LIL band)",
        fraction < 0.01,
        &format!("pooled violation fraction {fraction:.5} over {checked} checkpoints (c = 3)"),
    );
}

/// Criterion 5: deterministic Table-1 regimes. Strong forcing
/// (beta=0.8, w=0.4): t^0.2 Z within 10% of alpha*beta/(beta-w) and
/// Kbar within 10% of 2 at horizon 1e5. Critical (beta=w=0.5):
/// (sqrt(t)/ln t) Tbar within 15% of alpha at horizon 1e6.
#[test]
fn criterion_05_table1_deterministic() {
    let p = params(1.0, 0.8, 1.0, 0.4, 0.0);
    let strong = run_ensemble(
        &p,
        &EnsembleConfig {
            horizon: 100_000,
            replicas: 30,
            master_seed: 0xB0F5,
            n_tagged: 0,
            checkpoints: vec![100_000],
            mode: StepMode::Histogram,
            lil_c: None,
        },
        &[Quantity::Z, Quantity::Kbar],
    )
    .unwrap();
    let z = strong.quantities[0].mean;
    let kbar = strong.quantities[1].mean;
    let p2 = params(2.0, 0.5, 1.0, 0.5, 0.0);
    let crit = run_ensemble(
        &p2,
        &EnsembleConfig {
            horizon: 1_000_000,
            replicas: 30,
            master_seed: 0xB0F5 + 1,
            n_tagged: 0,
            checkpoints: vec![1_000_000],
            mode: StepMode::Histogram,
            lil_c: None,
        },
        &[Quantity::Tbar],
    )
    .unwrap();
    let tbar = crit.quantities[0].mean;
    verdict(
        "5 (Table 1 deterministic regimes)",
        (z - 2.0).abs() <= 0.2 && (kbar - 2.0).abs() <= 0.2 && (tbar - 2.0).abs() <= 0.3,
        &format!(
            "t^0.2 Z = {z:.4} (target 2 +- 10%); Kbar = {kbar:.4} (target 2 +- 10%); \
             critical Tbar rescaled = {tbar:.4} (target 2 +- 15%)"
        ),
    );
}

/// Criterion 6: random-limit regime (beta=0.2 < w=0.8). Per-replica
/// convergence of t^0.2 Z (last-decade Cauchy gap below 5% for at
/// least 99% of 1000 replicas) and strict positivity (fraction of
/// terminal rescaled values below 1e-3 under 0.5%).
#[test]
fn criterion_06_random_limit_regime() {
    let p = params(1.0, 0.2, 1.0, 0.8, 0.0);
    let horizon = 1_000_000;
    let cps = geometric_checkpoints(horizon, 20);
    let regime = classify_regime(&p);
    let rule = scaling_rule(&regime, Quantity::Z, &p).unwrap();
    let table = Arc::new(LambdaTable::new(&p, horizon));
    let out: Vec<(f64, f64)> = par_replicas(1000, |i| {
        let tr = simulate_with(
            &p,
            horizon,
            &cps,
            0,
            replica_seed(0xB0F6, i as u64),
            StepMode::Histogram,
            Some(Arc::clone(&table)),
        )
        .unwrap();
        let diag = convergence_diagnostic(&tr, &rule, 0.05).unwrap();
        (diag.gap, rule.rescale(horizon as f64, tr.last().z))
    });
    let converged = out.iter().filter(|(gap, _)| *gap < 0.05).count();
    let frac_converged = converged as f64 / out.len() as f64;
    let terminal: Vec<f64> = out.iter().map(|(_, v)| *v).collect();
    let below = positivity_fraction(&terminal, 1e-3).unwrap();
    verdict(
        "6 (random limit: convergence + positivity)",
        frac_converged >= 0.99 && below < 0.005,
        &format!(
            "converged replicas {frac_converged:.4} (need >= 0.99); positivity fraction \
             {below:.4} (need < 0.005); mean t^0.2 Z = {:.3}",
            mean(&terminal)
        ),
    );
}

/// Criterion 7: mean CLT (beta < w).
/// (a) pinned config beta=0.2, w=1, iota=0.5, t_check=1e4, t_max=1e6,
///     2000 replicas: normality gate passes and the standardized
///     residual variance is within 15% of 1.
/// (b) beta = w/2 (0.3 vs 0.6): the uncorrected predictive-mean
///     residual centers at -alpha within 10%.
/// (c) w/2 < beta < w (0.45 vs 0.6): the Tbar concentration statistic
///     lands within 10% of -alpha/(w-beta).
#[test]
fn criterion_07_mean_clt() {
    // (a)
    let sample = clt_pipeline_mean(
        &params(1.0, 0.2, 1.0, 1.0, 0.5),
        &CltConfig {
            replicas: 2000,
            t_check: 10_000,
            t_max: 1_000_000,
            master_seed: 0xB0F7,
            n_tagged: 0,
        },
    )
    .unwrap();
    let gate = normality_check(&sample.standardized).unwrap();
    let var = variance(&sample.standardized);
    verdict(
        "7a (mean CLT normality)",
        gate.pass && (var - 1.0).abs() <= 0.15,
        &format!(
            "standardized variance {var:.4} (target 1 +- 15%); gate pass={} \
             (skew {:.3}, kurt {:.3})",
            gate.pass, gate.skewness, gate.excess_kurtosis
        ),
    );

    // (b) beta = w/2: mean of the uncorrected Z residual -> -alpha.
    let shift = clt_pipeline_mean(
        &params(1.0, 0.3, 1.0, 0.6, 0.0),
        &CltConfig {
            replicas: 800,
            t_check: 10_000,
            t_max: 1_000_000,
            master_seed: 0xB0F7 + 1,
            n_tagged: 0,
        },
    )
    .unwrap();
    let m = mean(&shift.uncorrected_z_residual);
    verdict(
        "7b (beta = w/2 mean shift)",
        (m + 1.0).abs() <= 0.10,
        &format!(
            "uncorrected residual mean {m:.4} (target -alpha = -1 +- 10%; se {:.4})",
            std_error(&shift.uncorrected_z_residual)
        ),
    );

    // (c) w/2 < beta < w: concentration at -alpha/(w-beta).
    let conc = clt_pipeline_mean(
        &params(1.0, 0.45, 1.0, 0.6, 0.0),
        &CltConfig {
            replicas: 500,
            t_check: 1_000,
            t_max: 100_000,
            master_seed: 0xB0F7 + 2,
            n_tagged: 0,
        },
    )
    .unwrap();
    let target = -1.0 / (0.6 - 0.45);
    let m = mean(&conc.tbar_concentration);
    verdict(
        "7c (in-probability limit)",
        ((m - target) / target).abs() <= 0.10,
        &format!("concentration mean {m:.4} (target {target:.4} +- 10%)"),
    );
}

/// Criterion 8: dish-level regimes.
/// (a) iota = 1: tagged inclusion probabilities equal Pbar bitwise.
/// (b) low interaction (iota=0.2 < beta/w = 0.833): K/t^0.48 median
///     last-decade gap below 10% at horizon 1e6 and positivity
///     fraction below 0.5% (the per-replica gap has a heavy tail from
///     replicas whose random limit is small, so the median carries the
///     convergence claim).
/// (c) high interaction (beta=0.3, w=0.7, iota=0.6): the rescaled
///     popularity over its predicted limit
///     (iota/(iota w - beta)) (beta/alpha) Zstar lands within 15% of 1.
#[test]
fn criterion_08_dish_regimes() {
    // (a) exact synchronization.
    let p_sync = params(1.2, 0.5, 1.0, 0.7, 1.0);
    let cps = geometric_checkpoints(3_000, 15);
    let mut bitwise = true;
    for i in 0..4u64 {
        let tr = simulate_with(&p_sync, 3_000, &cps, 4, 0xB0F8 + i, StepMode::Histogram, None)
            .unwrap();
        for row in &tr.rows {
            for obs in &row.tagged {
                bitwise &= Some(obs.inclusion_probability) == row.pbar;
            }
        }
    }
    verdict(
        "8a (iota = 1 exact synchronization)",
        bitwise,
        "tagged P equals Pbar bitwise at every checkpoint of 4 replicas",
    );

    // (b) low interaction.
    let p_low = params(1.0, 0.5, 1.0, 0.6, 0.2);
    let horizon = 1_000_000;
    let cps = geometric_checkpoints(horizon, 20);
    let regime = classify_regime(&p_low);
    let rule = scaling_rule(&regime, Quantity::KTagged, &p_low).unwrap();
    let table = Arc::new(LambdaTable::new(&p_low, horizon));
    let out: Vec<Option<(f64, f64)>> = par_replicas(300, |i| {
        let tr = simulate_with(
            &p_low,
            horizon,
            &cps,
            1,
            replica_seed(0xB0F8 + 10, i as u64),
            StepMode::Histogram,
            Some(Arc::clone(&table)),
        )
        .unwrap();
        let diag = convergence_diagnostic(&tr, &rule, 0.10).ok()?;
        let term = tr
            .last()
            .tagged
            .first()
            .map(|d| rule.rescale(horizon as f64, d.count as f64))?;
        Some((diag.gap, term))
    });
    let pairs: Vec<(f64, f64)> = out.into_iter().flatten().collect();
    let gaps: Vec<f64> = pairs.iter().map(|x| x.0).collect();
    let terms: Vec<f64> = pairs.iter().map(|x| x.1).collect();
    let med_gap = median(&gaps);
    let below = positivity_fraction(&terms, 1e-3).unwrap();
    verdict(
        "8b (low interaction dish scaling)",
        med_gap < 0.10 && below < 0.005,
        &format!(
            "median last-decade gap {med_gap:.4} (need < 0.10); positivity fraction \
             {below:.4} (need < 0.005) over {} replicas",
            pairs.len()
        ),
    );

    // (c) high interaction.
    let p_high = params(1.0, 0.3, 1.0, 0.7, 0.6);
    let horizon = 5_000_000u64;
    let coef = (p_high.iota / (p_high.iota * p_high.w - p_high.beta)) * (p_high.beta / p_high.alpha);
    let table = Arc::new(LambdaTable::new(&p_high, horizon));
    let ratios: Vec<f64> = par_replicas(240, |i| {
        let tr = simulate_with(
            &p_high,
            horizon,
            &[horizon],
            1,
            replica_seed(0xB0F8 + 20, i as u64),
            StepMode::Histogram,
            Some(Arc::clone(&table)),
        )
        .unwrap();
        let row = tr.last();
        let k1 = row.tagged.first().map(|d| d.count as f64)?;
        let zstar = p_high.w * (horizon as f64).powf(1.0 - p_high.w) * row.tbar;
        let resc = (horizon as f64).powf(-(p_high.w - p_high.beta)) * k1;
        Some(resc / (coef * zstar))
    })
    .into_iter()
    .flatten()
    .collect();
    let m = mean(&ratios);
    verdict(
        "8c (high interaction synchronization level)",
        (m - 1.0).abs() <= 0.15,
        &format!(
            "rescaled K over predicted limit: mean ratio {m:.4} (target 1 +- 15%; se {:.4}, \
             n {})",
            std_error(&ratios),
            ratios.len()
        ),
    );
}

/// Criterion 9: dish CLT in the low-interaction regime.
/// (a) case (i) at the pinned triple (iota=0, w=1, beta=0.3):
///     normality passes and the residual variance over the
///     limit-variance proxy is within 15% of 1. In this regime the
///     inclusion probability of a dish converges to Kstar rather than
///     to zero, so the limit-variance proxy carries the Bernoulli
///     factor (1 - Kstar); see `dish_clt_variance_constant_at_theta_one`.
/// (b) case (ii) (beta=0.5, w=1, iota=0.25): the concentration
///     statistic over -(iota beta/alpha)/(beta - w iota) Zstar lands
///     within 15% of 1.
#[test]
fn criterion_09_dish_clt() {
    let sample = clt_pipeline_dish(
        &params(1.0, 0.3, 2.0, 1.0, 0.0),
        &CltConfig {
            replicas: 2000,
            t_check: 4_000,
            t_max: 400_000,
            master_seed: 0xB0F9,
            n_tagged: 1,
        },
    )
    .unwrap();
    let gate = normality_check(&sample.standardized).unwrap();
    let var = variance(&sample.standardized);
    verdict(
        "9a (dish CLT case i)",
        gate.pass && (var - 1.0).abs() <= 0.15,
        &format!(
            "standardized variance {var:.4} (target 1 +- 15%); gate pass={} \
             (skew {:.3}, kurt {:.3}); dropped {}",
            gate.pass, gate.skewness, gate.excess_kurtosis, sample.dropped
        ),
    );

    let conc = clt_pipeline_dish(
        &params(1.0, 0.5, 1.0, 1.0, 0.25),
        &CltConfig {
            replicas: 500,
            t_check: 1_000,
            t_max: 100_000,
            master_seed: 0xB0F9 + 1,
            n_tagged: 1,
        },
    )
    .unwrap();
    let m = mean(&conc.concentration_ratio);
    verdict(
        "9b (dish CLT case ii concentration)",
        (m - 1.0).abs() <= 0.15,
        &format!(
            "concentration over prediction: mean ratio {m:.4} (target 1 +- 15%; se {:.4})",
            std_error(&conc.concentration_ratio)
        ),
    );
}

/// Criterion 10: the recursive-dynamics harness reproduces the general
/// results it was built for.
#[test]
fn criterion_10_recursion_lab() {
    // Noiseless stochastic approximation: X -> a/b within 1e-3.
    let problem = SAProblem {
        eta: StepSize::Harmonic { theta: 1.0 },
        b: 0.5,
        attractor: Attractor::Constant(2.0),
        noise: MartingaleNoise::None,
        remainder: Remainder::Zero,
        x1: 3.5,
    };
    let (path, _) = run_sa(&problem, 1_000_000, &[1_000_000], 0xB10).unwrap();
    let err = (path.terminal().1 - 4.0).abs();
    verdict(
        "10a (noiseless SA)",
        err <= 1e-3,
        &format!("terminal {} (|error| {err:.2e} <= 1e-3)", path.terminal().1),
    );

    // Random attractor with Rademacher noise: ensemble mean of the
    // terminal value matches E[A_inf]/b within 3 standard errors.
    let problem = SAProblem {
        attractor: Attractor::RandomShifted { lo: 1.0, hi: 3.0, shift: 1.0 },
        noise: MartingaleNoise::Rademacher { scale: 1.0 },
        ..problem
    };
    let terms: Vec<f64> = par_replicas(400, |i| {
        run_sa(&problem, 100_000, &[100_000], replica_seed(0xB10 + 1, i as u64))
            .unwrap()
            .0
            .terminal()
            .1
    });
    let m = mean(&terms);
    let se = std_error(&terms);
    verdict(
        "10b (SA with random attractor)",
        (m - 4.0).abs() <= 3.0 * se,
        &format!("ensemble mean {m:.4} vs E[A]/b = 4 (se {se:.4})"),
    );

    // Bernoulli innovation: strict positivity of the rescaled limit.
    let spec = RecursionSpec {
        theta: 1.0,
        delta: 0.5,
        form: DynamicsForm::NonNegative(Innovation::Bernoulli),
        remainder: Remainder::Zero,
        limit_variance: LimitVariance::DeltaTimesLimit,
        x1: 0.5,
    };
    let rescaled: Vec<f64> = par_replicas(1000, |i| {
        let p = run_recursion(&spec, 1_000_000, &[1_000_000], replica_seed(0xB10 + 2, i as u64))
            .unwrap();
        let (t, x) = p.terminal();
        (t as f64).sqrt() * x
    });
    let frac = positivity_fraction(&rescaled, 1e-3).unwrap();
    // Control: zero innovation decays to zero, fraction 1.
    let dead = RecursionSpec {
        form: DynamicsForm::NonNegative(Innovation::Zero),
        ..spec
    };
    let dead_frac = {
        let p = run_recursion(&dead, 100_000, &[100_000], 7).unwrap();
        let (t, x) = p.terminal();
        positivity_fraction(&[(t as f64).sqrt() * x], 1e-3).unwrap()
    };
    verdict(
        "10c (strict positivity)",
        frac < 0.005 && dead_frac == 1.0,
        &format!("fraction below 1e-3: {frac:.4} (need < 0.005); zero-innovation control {dead_frac}"),
    );

    // Bernoulli-innovation CLT at delta = 1/2: residuals standardized
    // by the per-replica limit proxy pass the gate.
    let paths: Vec<_> = par_replicas(2000, |i| {
        run_recursion(&spec, 1_000_000, &[100_000, 1_000_000], replica_seed(0xB10 + 3, i as u64))
            .unwrap()
    });
    let res = clt_residuals(&paths, &spec, 100_000, 1_000_000).unwrap();
    let gate = normality_check(&res).unwrap();
    verdict(
        "10d (Bernoulli-innovation CLT)",
        gate.pass,
        &format!(
            "gate pass={} (n {}, skew {:.3}, kurt {:.3}, var {:.3})",
            gate.pass,
            res.len(),
            gate.skewness,
            gate.excess_kurtosis,
            variance(&res)
        ),
    );

    // Rademacher CLT at delta = 1, V = 1.
    let spec_clt = RecursionSpec {
        theta: 1.0,
        delta: 1.0,
        form: DynamicsForm::Signed(MartingaleNoise::Rademacher { scale: 1.0 }),
        remainder: Remainder::Zero,
        limit_variance: LimitVariance::Constant(1.0),
        x1: 0.0,
    };
    let paths: Vec<_> = par_replicas(2000, |i| {
        run_recursion(
            &spec_clt,
            10_000_000,
            &[100_000, 10_000_000],
            replica_seed(0xB10 + 4, i as u64),
        )
        .unwrap()
    });
    let res = clt_residuals(&paths, &spec_clt, 100_000, 10_000_000).unwrap();
    let gate = normality_check(&res).unwrap();
    let var = variance(&res);
    verdict(
        "10e (Rademacher CLT)",
        gate.pass && (var - 1.0).abs() <= 0.15,
        &format!("variance {var:.4}; gate pass={}", gate.pass),
    );

    // Slowly decaying remainder: concentration at -rho_inf/(delta-rho).
    let spec_conc = RecursionSpec {
        remainder: Remainder::Power { rho_inf: 2.0, rho: 0.75 },
        ..spec_clt
    };
    let paths: Vec<_> = par_replicas(500, |i| {
        run_recursion(
            &spec_conc,
            1_000_000,
            &[10_000, 1_000_000],
            replica_seed(0xB10 + 5, i as u64),
        )
        .unwrap()
    });
    let stat = concentration_statistic(&paths, &spec_conc, 10_000, 1_000_000).unwrap();
    verdict(
        "10f (slow-remainder concentration)",
        ((stat + 8.0) / 8.0).abs() <= 0.10,
        &format!("mean statistic {stat:.4} (target -8 +- 10%)"),
    );
}

/// Criterion 11: closed-loop parameter recovery at ground truth
/// (alpha=1, beta=0.4, w=0.9, iota=0.2), horizon 1e6, 20 replicas.
#[test]
fn criterion_11_estimator_closed_loop() {
    let p = params(1.0, 0.4, 1.0, 0.9, 0.2);
    let horizon = 1_000_000;
    let cps = geometric_checkpoints(horizon, 40);
    let trs = run_batch(&p, horizon, &cps, 4, 20, 0xB11);
    let series = averaged_series(&trs).unwrap();
    let rep = estimate_parameters(&series, 2.0).unwrap();
    let beta_err = (rep.beta_hat.value - 0.4).abs();
    let w_err = (rep.w_hat.value - 0.9).abs();
    let iota = rep.iota_hat.as_ref().map(|e| e.value);
    let iota_err = iota.map(|v| (v - 0.2).abs()).unwrap_or(f64::INFINITY);
    verdict(
        "11 (estimator closed loop)",
        beta_err <= 0.05 && w_err <= 0.05 && iota_err <= 0.10,
        &format!(
            "beta {:.4} (err {beta_err:.4} <= 0.05), w {:.4} (err {w_err:.4} <= 0.05), \
             iota {iota:?} (err {iota_err:.4} <= 0.10), alpha {:.4}",
            rep.beta_hat.value, rep.w_hat.value, rep.alpha_hat.value
        ),
    );
}

/// Estimator consistency trend: the recovery error does not grow as
/// the horizon rises from 1e4 to 1e6 (median over 3 twelve-replica
/// batches; small slack for Monte Carlo noise).
#[test]
fn estimator_consistency_trend() {
    let p = params(1.0, 0.4, 1.0, 0.9, 0.2);
    let mut medians = Vec::new();
    for (hk, horizon) in [10_000u64, 100_000, 1_000_000].into_iter().enumerate() {
        let cps = geometric_checkpoints(horizon, 40);
        let mut errs = Vec::new();
        for batch in 0..3u64 {
            let trs = run_batch(&p, horizon, &cps, 4, 12, 0xB11B + 100 * hk as u64 + batch);
            let series = averaged_series(&trs).unwrap();
            let rep = estimate_parameters(&series, 2.0).unwrap();
            errs.push((rep.beta_hat.value - 0.4).abs() + (rep.w_hat.value - 0.9).abs());
        }
        medians.push(median(&errs));
    }
    println!("estimator error medians by horizon: {medians:?}");
    assert!(
        medians[2] <= medians[0] + 0.005 && medians[1] <= medians[0] + 0.01,
        "{medians:?}"
    );
}

/// Criterion 12: histogram vs naive stepping agree distributionally at
/// t=200 over 1e4 replicas (two-sample means within 3 pooled standard
/// errors on D, sum K, T).
#[test]
fn criterion_12_oracle_equivalence() {
    let p = params(1.5, 0.5, 1.0, 0.9, 0.3);
    let horizon = 200;
    let run = |mode: StepMode, seed: u64| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let outs: Vec<(f64, f64, f64)> = par_replicas(10_000, |i| {
            let tr = simulate_with(
                &p,
                horizon,
                &[horizon],
                2,
                replica_seed(seed, i as u64),
                mode,
                None,
            )
            .unwrap();
            let row = tr.last();
            (
                row.d as f64,
                row.tbar * horizon as f64,
                row.tried as f64,
            )
        });
        (
            outs.iter().map(|x| x.0).collect(),
            outs.iter().map(|x| x.1).collect(),
            outs.iter().map(|x| x.2).collect(),
        )
    };
    let (d_h, s_h, t_h) = run(StepMode::Histogram, 0xB12);
    let (d_n, s_n, t_n) = run(StepMode::Naive, 0xB12 + 1);
    let mut detail = String::new();
    let mut pass = true;
    for (name, a, b) in [("D", &d_h, &d_n), ("sumK", &s_h, &s_n), ("T", &t_h, &t_n)] {
        let pooled = (variance(a) / a.len() as f64 + variance(b) / b.len() as f64).sqrt();
        let z = (mean(a) - mean(b)) / pooled;
        detail.push_str(&format!("{name}: z = {z:+.2}; "));
        pass &= z.abs() <= 3.0;
    }
    verdict("12 (oracle equivalence)", pass, &detail);
}

/// Companion to criterion 9a, documenting the edge case the criterion
/// avoids: at (iota=0, w=1) the inclusion probability of a dish does
/// not vanish, so the limit variance of the popularity CLT carries the
/// Bernoulli factor (1 - Kstar). At theta = 1 the first dish's Kstar
/// is spread over (0,1) and residuals standardized by sqrt(Kstar)
/// alone have variance E[1 - Kstar] well below 1, while standardizing
/// by sqrt(Kstar (1 - Kstar)) restores unit variance.
#[test]
fn dish_clt_variance_constant_at_theta_one() {
    let p = params(1.0, 0.3, 1.0, 1.0, 0.0);
    let (t_check, t_max) = (3_000u64, 300_000u64);
    let table = Arc::new(LambdaTable::new(&p, t_max));
    let pairs: Vec<(f64, f64)> = par_replicas(600, |i| {
        let tr = simulate_with(
            &p,
            t_max,
            &[t_check, t_max],
            1,
            replica_seed(0xB0F9 + 7, i as u64),
            StepMode::Histogram,
            Some(Arc::clone(&table)),
        )
        .unwrap();
        let a = tr.at(t_check)?.tagged.first()?.count as f64;
        let b = tr.at(t_max)?.tagged.first()?.count as f64;
        let kstar = b / t_max as f64;
        let raw = (t_check as f64).sqrt() * (a / t_check as f64 - kstar);
        Some((raw, kstar))
    })
    .into_iter()
    .flatten()
    .collect();
    let by_kstar: Vec<f64> = pairs.iter().map(|(r, k)| r / k.sqrt()).collect();
    let by_bernoulli: Vec<f64> = pairs
        .iter()
        .map(|(r, k)| r / (k * (1.0 - k)).sqrt())
        .collect();
    let v_kstar = variance(&by_kstar);
    let v_bern = variance(&by_bernoulli);
    println!(
        "theta=1 dish residual variance: /Kstar = {v_kstar:.3}, /Kstar(1-Kstar) = {v_bern:.3}"
    );
    assert!(v_kstar < 0.8, "Kstar standardization unexpectedly near 1: {v_kstar}");
    assert!((v_bern - 1.0).abs() < 0.25, "Bernoulli standardization off: {v_bern}");
}
