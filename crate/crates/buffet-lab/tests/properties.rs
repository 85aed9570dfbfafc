//! Property tests for the invariants the model promises everywhere.

use proptest::prelude::*;

use buffet_lab::observables::identity_residual;
use buffet_lab::params::Parameters;
use buffet_lab::regime::{classify_regime, DishCase, MeanCase};
use buffet_lab::scaling::{scaling_rule, LimitKind, Quantity};
use buffet_lab::state::{ModelState, StepMode};
use buffet_lab::trajectory::{geometric_checkpoints, simulate};

fn arb_params() -> impl Strategy<Value = Parameters> {
    (
        0.05f64..4.0,
        0.0f64..=1.0,
        0.05f64..5.0,
        0.01f64..=1.0,
        0.0f64..=1.0,
    )
        .prop_map(|(alpha, beta, theta, w, iota)| {
            Parameters::new(alpha, beta, theta, w, iota).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]
    /// Classification is total and never lands on a "not possible"
    /// table cell: every (regime, quantity) pair the classifier can
    /// produce has a scaling rule.
    #[test]
    fn classify_regime_is_total_and_consistent(params in arb_params()) {
        let regime = classify_regime(&params);
        // Cross-field consistency ("not possible" cells unreachable):
        match regime.dish_case {
            DishCase::High | DishCase::Critical => {
                let beta_lt_w = matches!(regime.mean_case, MeanCase::BetaLtW { .. });
                prop_assert!(beta_lt_w);
            }
            _ => {}
        }
        if regime.dish_case == DishCase::Critical {
            prop_assert!(params.beta > 0.0 && params.beta < params.w);
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
            let rule = scaling_rule(&regime, q, &params);
            prop_assert!(rule.is_ok(), "{} missing in {:?}: {:?}", q, regime, rule);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    /// Scaling factors are positive from t = 2 on, and limits are
    /// positive numbers (or positive multiples of positive random
    /// variables).
    #[test]
    fn scaling_rules_are_positive(params in arb_params()) {
        let regime = classify_regime(&params);
        for q in [Quantity::D, Quantity::Z, Quantity::Tbar, Quantity::Pbar,
                  Quantity::Kbar, Quantity::KTagged, Quantity::PTagged] {
            let rule = scaling_rule(&regime, q, &params).unwrap();
            for t in [2.0, 15.0, 4e6] {
                prop_assert!(rule.factor.eval(t) > 0.0);
            }
            let coeff = match rule.limit {
                LimitKind::Deterministic(v) => v,
                LimitKind::RandomZstar { coeff } => coeff,
                LimitKind::RandomKstar { coeff } => coeff,
            };
            prop_assert!(coeff > 0.0, "{q}: {:?}", rule.limit);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    /// The exact identity suite holds at every checkpoint of short
    /// trajectories under arbitrary valid parameters, in both modes.
    #[test]
    fn identities_hold_on_random_trajectories(
        params in arb_params(),
        seed in any::<u64>(),
        naive in any::<bool>(),
    ) {
        let horizon = 400;
        let cps = geometric_checkpoints(horizon, 12);
        let mode = if naive { StepMode::Naive } else { StepMode::Histogram };
        let tr = buffet_lab::trajectory::simulate_with(
            &params, horizon, &cps, 3, seed, mode, None,
        ).unwrap();
        for row in &tr.rows {
            prop_assert!(identity_residual(row, &params) <= 1e-12, "t={}", row.t);
            prop_assert!(0.0 <= row.r && row.r <= row.s && row.s <= row.z);
            for obs in &row.tagged {
                prop_assert!((0.0..=1.0).contains(&obs.inclusion_probability));
                prop_assert!(obs.count >= 1 && obs.count <= row.t - obs.birth + 1);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    /// Checkpoint schedules never influence the random stream.
    #[test]
    fn schedule_independence(params in arb_params(), seed in any::<u64>()) {
        let sparse = simulate(&params, 300, &[300], 2, seed).unwrap();
        let dense = simulate(&params, 300, &geometric_checkpoints(300, 20), 2, seed).unwrap();
        prop_assert_eq!(sparse.last(), dense.last());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    /// Full synchronization at iota = 1: every tagged inclusion
    /// probability equals Pbar bitwise at every checkpoint.
    #[test]
    fn iota_one_synchronizes_exactly(
        alpha in 0.3f64..3.0,
        beta in 0.0f64..=1.0,
        w in 0.05f64..=1.0,
        seed in any::<u64>(),
    ) {
        let params = Parameters::new(alpha, beta, 1.0, w, 1.0).unwrap();
        let cps = geometric_checkpoints(500, 15);
        let tr = simulate(&params, 500, &cps, 4, seed).unwrap();
        for row in &tr.rows {
            for obs in &row.tagged {
                prop_assert_eq!(Some(obs.inclusion_probability), row.pbar);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    /// Internal store invariants survive long mixed runs.
    #[test]
    fn store_invariants_random_walks(params in arb_params(), seed in any::<u64>()) {
        let mut st = ModelState::init(&params, seed, 3);
        for _ in 0..700 {
            st.step(&params);
        }
        st.check_invariants().unwrap();
    }
}

/// Hand-computed inclusion probability example: theta=1, t=4, w=0.5,
/// iota=0.2, counts (3,1) -> P(3) = 0.28, and with iota=1 both counts
/// share P = 0.2; with iota=0, w=1 it degenerates to K/(theta+t).
#[test]
fn inclusion_probability_hand_values() {
    // Build a state with exactly the wanted bookkeeping: simulate can't
    // pin counts, so use the formula through a state assembled by steps
    // is impractical; instead verify via the closed form on a state
    // reached by search.
    'outer: for seed in 0..50_000u64 {
        let params = Parameters::new(1.0, 0.5, 1.0, 0.5, 0.2).unwrap();
        let mut st = ModelState::init(&params, seed, 8);
        for _ in 0..3 {
            st.step(&params);
        }
        if st.t != 4 || st.d_total() != 2 || st.sum_counts() != 4 {
            continue;
        }
        let counts: Vec<u64> = st.tagged().iter().map(|d| d.count).collect();
        if counts != vec![3, 1] {
            continue 'outer;
        }
        let p3 = st.inclusion_probability(&params, 3).unwrap();
        assert!((p3 - 0.28).abs() < 1e-12, "{p3}");
        // iota = 1 synchronizes: both counts give w * sum/((theta+t) D) = 0.2
        let sync = Parameters::new(1.0, 0.5, 1.0, 0.5, 1.0).unwrap();
        let a = st.inclusion_probability(&sync, 3).unwrap();
        let b = st.inclusion_probability(&sync, 1).unwrap();
        assert_eq!(a, b);
        assert!((a - 0.2).abs() < 1e-12, "{a}");
        // iota = 0, w = 1: P = K/(theta+t) = 3/5
        let degen = Parameters::new(1.0, 0.5, 1.0, 1.0, 0.0).unwrap();
        let c = st.inclusion_probability(&degen, 3).unwrap();
        assert!((c - 0.6).abs() < 1e-12, "{c}");
        return;
    }
    panic!("no seed produced the target state");
}

/// Bookkeeping example: N_1 = 3 with n_tagged = 2 tags two dishes and
/// leaves one in the histogram; N_1 = 0 gives the empty state.
#[test]
fn init_bookkeeping_examples() {
    let params = Parameters::new(1.0, 0.5, 1.0, 1.0, 0.0).unwrap();
    let mut found3 = false;
    let mut found0 = false;
    for seed in 0..10_000u64 {
        let st = ModelState::init(&params, seed, 2);
        match st.d_total() {
            3 if !found3 => {
                assert_eq!(st.t, 1);
                assert_eq!(st.sum_counts(), 3);
                assert_eq!(st.tagged().len(), 2);
                assert!(st.tagged().iter().all(|d| d.birth == 1 && d.count == 1));
                assert_eq!(st.tagged()[0].id, 1);
                assert_eq!(st.tagged()[1].id, 2);
                found3 = true;
            }
            0 if !found0 => {
                assert_eq!(st.sum_counts(), 0);
                assert!(st.tagged().is_empty());
                assert!(st.inclusion_probability(&params, 1).is_err());
                found0 = true;
            }
            _ => {}
        }
        if found3 && found0 {
            return;
        }
    }
    panic!("seeds did not produce both N_1 = 3 and N_1 = 0");
}

/// Monte Carlo check that N_1 ~ Poisson(alpha): mean over many seeds
/// within 3 standard errors of alpha = 2.
#[test]
fn init_poisson_mean() {
    let params = Parameters::new(2.0, 0.5, 1.0, 1.0, 0.0).unwrap();
    let n = 100_000u64;
    let total: u64 = (0..n)
        .map(|seed| ModelState::init(&params, seed, 0).d_total())
        .sum();
    let mean = total as f64 / n as f64;
    let se = (2.0f64 / n as f64).sqrt();
    assert!((mean - 2.0).abs() < 3.0 * se, "mean {mean}, se {se}");
}

/// Monte Carlo check of the step contract at iota = 1: the expected
/// number of old-dish selections from a fixed state is
/// w * sum_counts / (theta + t).
#[test]
fn step_mean_old_selected_iota_one() {
    let params = Parameters::new(1.5, 0.5, 1.0, 0.7, 1.0).unwrap();
    // Grow one state for a while, then repeatedly step clones of it.
    let mut base = ModelState::init(&params, 99, 2);
    for _ in 0..200 {
        base.step(&params);
    }
    let expect = params.w * base.sum_counts() as f64 / (params.theta + base.t as f64);
    let n = 100_000;
    let mut total = 0u64;
    for i in 0..n {
        let mut st = base.clone_with_seed(i);
        let rec = st.step(&params);
        total += rec.old_selected;
    }
    let mean = total as f64 / n as f64;
    // variance of a sum of Bernoullis is at most the mean
    let se = (expect / n as f64).sqrt();
    assert!(
        (mean - expect).abs() < 4.0 * se,
        "mean {mean} vs {expect} (se {se})"
    );
}
