//! Checkpoint schedules and the simulation driver.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::observables::{aggregates, AggregateRow, LambdaTable};
use crate::params::Parameters;
use crate::state::{ModelState, StepMode};

/// Geometric checkpoint grid: `round(10^(i/ppd))` for
/// `i = 0..=floor(ppd*log10(horizon))`, forced strictly increasing, with
/// the horizon itself always included. For a power-of-ten horizon this
/// yields exactly `floor(ppd*log10(horizon)) + 1` points starting at 1.
pub fn geometric_checkpoints(horizon: u64, points_per_decade: u32) -> Vec<u64> {
    assert!(horizon >= 1 && points_per_decade >= 1);
    let ppd = points_per_decade as f64;
    let imax = (ppd * (horizon as f64).log10()).floor() as u64;
    let mut grid = Vec::with_capacity(imax as usize + 2);
    let mut prev = 0u64;
    for i in 0..=imax {
        let raw = 10f64.powf(i as f64 / ppd).round() as u64;
        let t = raw.max(prev + 1);
        if t > horizon {
            break;
        }
        grid.push(t);
        prev = t;
    }
    if grid.last() != Some(&horizon) {
        grid.push(horizon);
    }
    grid
}

/// A checkpointed observable series from one replica.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: Parameters,
    pub horizon: u64,
    pub seed: u64,
    pub n_tagged: usize,
    pub mode: StepMode,
    pub rows: Vec<AggregateRow>,
}

impl Trajectory {
    /// Row at exactly time `t`, if checkpointed.
    pub fn at(&self, t: u64) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.t == t)
    }

    pub fn last(&self) -> &AggregateRow {
        self.rows.last().expect("trajectory has at least one row")
    }
}

fn validate_checkpoints(checkpoints: &[u64], horizon: u64) -> Result<()> {
    if horizon < 1 {
        return Err(Error::InvalidConfig("horizon must be >= 1".into()));
    }
    let mut prev = 0u64;
    for &c in checkpoints {
        if c <= prev {
            return Err(Error::InvalidConfig(
                "checkpoints must be strictly increasing and >= 1".into(),
            ));
        }
        if c > horizon {
            return Err(Error::InvalidConfig(format!(
                "checkpoint {c} exceeds horizon {horizon}"
            )));
        }
        prev = c;
    }
    Ok(())
}

/// Runs one replica to `horizon`, recording a row at each checkpoint.
///
/// Checkpoints affect recording only, never the random stream, so the
/// same `(params, horizon, n_tagged, seed)` yields the same terminal
/// state under any schedule, and identical full inputs give bit-identical
/// trajectories within one build.
pub fn simulate(
    params: &Parameters,
    horizon: u64,
    checkpoints: &[u64],
    n_tagged: usize,
    seed: u64,
) -> Result<Trajectory> {
    simulate_with(params, horizon, checkpoints, n_tagged, seed, StepMode::Histogram, None)
}

/// [`simulate`] with an explicit step mode and an optional shared
/// innovation table (ensembles pass one table to all replicas).
pub fn simulate_with(
    params: &Parameters,
    horizon: u64,
    checkpoints: &[u64],
    n_tagged: usize,
    seed: u64,
    mode: StepMode,
    lambda_table: Option<Arc<LambdaTable>>,
) -> Result<Trajectory> {
    params.validate()?;
    validate_checkpoints(checkpoints, horizon)?;
    let table = lambda_table.unwrap_or_else(|| Arc::new(LambdaTable::new(params, horizon)));
    let mut state = ModelState::init_with_mode(params, seed, n_tagged, mode);
    state.attach_lambda_table(Arc::clone(&table));
    let mut rows = Vec::with_capacity(checkpoints.len());
    let mut next_cp = checkpoints.iter().copied().peekable();
    // Lambda_t accumulates in step order: lambda_0 enters at t=1.
    let mut lambda_cum = table.mean_and_exp(0).0;
    if next_cp.peek() == Some(&1) {
        rows.push(aggregates(&state, params, lambda_cum));
        next_cp.next();
    }
    while state.t < horizon {
        lambda_cum += table.mean_and_exp(state.t).0;
        state.step(params);
        if next_cp.peek() == Some(&state.t) {
            rows.push(aggregates(&state, params, lambda_cum));
            next_cp.next();
        }
    }
    Ok(Trajectory {
        params: *params,
        horizon,
        seed,
        n_tagged,
        mode,
        rows,
    })
}
