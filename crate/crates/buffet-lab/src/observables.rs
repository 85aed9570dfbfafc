//! Closed-form observables and per-checkpoint aggregate rows.
//!
//! All identities are evaluated from the canonical `S_t` expression (see
//! `ModelState::s_value`), so the recorded quantities satisfy
//! `S = w * (t/(theta+t)) * Tbar`, `Pbar = w * Kbar / (theta+t)` and
//! `Kbar = (t/D) * Tbar` up to floating-point rounding, and `Pbar`
//! coincides bitwise with every tagged inclusion probability when
//! `iota = 1`.

use crate::params::Parameters;
use crate::state::ModelState;

/// Expected number of new dishes tried by customer `t+1`:
/// `lambda_t = alpha / (t+1)^(1-beta)`.
pub fn lambda_t(params: &Parameters, t: u64) -> f64 {
    params.alpha * ((t + 1) as f64).powf(params.beta - 1.0)
}

/// Precomputed innovation means and their exponentials, shared by all
/// replicas of a run. Entry `t` holds `lambda_t` (mean for customer
/// `t+1`). Horizons beyond the table fall back to direct evaluation.
#[derive(Debug)]
pub struct LambdaTable {
    params: Parameters,
    lambda: Vec<f64>,
    exp_neg: Vec<f64>,
}

/// Above this horizon the table is truncated and the tail computed on
/// the fly (keeps memory bounded for very long exploratory runs).
const LAMBDA_TABLE_MAX: u64 = 4_000_000;

impl LambdaTable {
    pub fn new(params: &Parameters, horizon: u64) -> Self {
        let n = horizon.min(LAMBDA_TABLE_MAX) as usize;
        let mut lambda = Vec::with_capacity(n);
        let mut exp_neg = Vec::with_capacity(n);
        for t in 0..n as u64 {
            let lam = lambda_t(params, t);
            lambda.push(lam);
            exp_neg.push((-lam).exp());
        }
        LambdaTable {
            params: *params,
            lambda,
            exp_neg,
        }
    }

    #[inline]
    pub fn mean_and_exp(&self, t: u64) -> (f64, f64) {
        if (t as usize) < self.lambda.len() {
            (self.lambda[t as usize], self.exp_neg[t as usize])
        } else {
            let lam = lambda_t(&self.params, t);
            (lam, (-lam).exp())
        }
    }
}

/// Cumulative innovation mean `Lambda_t = sum_{n=1..t} lambda_{n-1}`,
/// by exact summation. Trajectories accumulate the same sum
/// incrementally; this standalone form serves spot checks.
pub fn lambda_cumulative(params: &Parameters, t: u64) -> f64 {
    (0..t).map(|n| lambda_t(params, n)).sum()
}

/// Observation of one tagged dish at a checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaggedObs {
    pub id: u64,
    pub birth: u64,
    pub count: u64,
    pub inclusion_probability: f64,
}

/// One checkpoint row of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub t: u64,
    /// Distinct dishes observed so far (`D_t`).
    pub d: u64,
    /// Dishes tried by customer `t` (`T_t`).
    pub tried: u64,
    /// Running mean `Tbar_t = sum_{n<=t} T_n / t`.
    pub tbar: f64,
    /// `S_t = sum_j P(t,j)`.
    pub s: f64,
    /// Predictive mean `Z_t = S_t + lambda_t`.
    pub z: f64,
    /// `Pbar_t = S_t / D_t`; missing while `D_t = 0`.
    pub pbar: Option<f64>,
    /// `Kbar_t = sum_counts / D_t`; missing while `D_t = 0`.
    pub kbar: Option<f64>,
    /// `R_t = sum_j P(t,j)^2`.
    pub r: f64,
    pub lambda: f64,
    /// `Lambda_t = sum_{n<=t} lambda_{n-1}`.
    pub lambda_cum: f64,
    pub tagged: Vec<TaggedObs>,
}

/// Evaluates every aggregate observable of the current state.
///
/// `lambda_cum` must be supplied by the caller (trajectories keep the
/// running sum); use [`lambda_cumulative`] for a standalone state.
pub fn aggregates(state: &ModelState, params: &Parameters, lambda_cum: f64) -> AggregateRow {
    let t = state.t;
    let d = state.d_total();
    let s = state.s_value(params);
    let lam = lambda_t(params, t);
    let pbar = state.pbar(params);
    let kbar = if d == 0 {
        None
    } else {
        Some(state.sum_counts() as f64 / d as f64)
    };
    let probs = state.tagged_probabilities(params);
    let tagged = state
        .tagged()
        .iter()
        .zip(probs)
        .map(|(dish, p)| TaggedObs {
            id: dish.id,
            birth: dish.birth,
            count: dish.count,
            inclusion_probability: p,
        })
        .collect();
    AggregateRow {
        t,
        d,
        tried: state.last_tried(),
        tbar: state.sum_counts() as f64 / t as f64,
        s,
        z: s + lam,
        pbar,
        kbar,
        r: state.r_value(params),
        lambda: lam,
        lambda_cum,
        tagged,
    }
}

/// Largest relative violation of the three exact ratio identities
/// (`S` vs `Tbar`, `Pbar` vs `Kbar`, `Kbar` vs `Tbar`); `None` entries
/// are skipped. Used by the identity test suite and the report gate.
pub fn identity_residual(row: &AggregateRow, params: &Parameters) -> f64 {
    let t = row.t as f64;
    let theta = params.theta;
    let mut worst: f64 = 0.0;
    let mut check = |lhs: f64, rhs: f64| {
        let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((lhs - rhs).abs() / scale);
    };
    check(row.s, params.w * (t / (theta + t)) * row.tbar);
    if let (Some(pbar), Some(kbar)) = (row.pbar, row.kbar) {
        check(pbar, params.w * kbar / (theta + t));
        check(kbar, (t / row.d as f64) * row.tbar);
    }
    worst
}
