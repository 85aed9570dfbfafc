//! Generic engine for the recursive dynamics behind the dish-level
//! process, plus a stochastic-approximation runner.
//!
//! Two dynamics are supported. The non-negative form
//!
//! ```text
//! X_{t+1} = (1 - 1/(theta+t+1)) X_t + Y_{t+1}/(theta+t+1),
//! E[Y_{t+1} | F_t] = delta X_t + rho_t,   Y >= 0,
//! ```
//!
//! and the signed form
//!
//! ```text
//! X_{t+1} = (1 - (1-delta)/(theta+t+1)) X_t
//!           + (dM_{t+1} + rho_{t+1})/(theta+t+1),
//! ```
//!
//! with a martingale difference `dM`. Under either form, `t^(1-delta) X_t`
//! converges; the harness estimates the limit at a far horizon and checks
//! strict positivity, the CLT for the residual at an earlier checkpoint,
//! and the in-probability concentration produced by slowly decaying
//! remainders.
//!
//! Callers declare the remainder decay (`rho`, `rho_inf`) and the limit
//! of `t^(1-delta) E[dM^2 | F]`; the engine never infers decay exponents
//! from data. Whether a remainder satisfies path conditions such as
//! `|rho_t| = o(X_t)` is the designer's responsibility: the harness only
//! checks ensemble statistics.

use crate::error::{Error, Result};
use crate::rng::{bernoulli, replica_rng, SimRng};
use crate::stats::mean;

/// Innovation of the non-negative dynamics: draws `Y_{t+1} >= 0` with
/// conditional mean `delta * X_t + rho_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Innovation {
    /// `Y = 0` identically (pure decay control; violates the theorem's
    /// hypotheses on purpose).
    Zero,
    /// `Y ~ Bernoulli(delta * X_t + rho_t)`; requires the mean to stay
    /// in [0,1], which holds for the dish-like processes it models.
    Bernoulli,
}

/// Martingale difference of the signed dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MartingaleNoise {
    /// `dM = +-scale` with equal probability; `E[dM^2|F] = scale^2`.
    Rademacher { scale: f64 },
    None,
}

/// Remainder sequence `rho_t`, declared analytically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Remainder {
    Zero,
    /// `rho_t = rho_inf * t^(rho-1)` exactly (so `t^(1-rho) rho_t` is
    /// `rho_inf` for every `t`).
    Power { rho_inf: f64, rho: f64 },
}

impl Remainder {
    fn value(&self, t: u64) -> f64 {
        match *self {
            Remainder::Zero => 0.0,
            Remainder::Power { rho_inf, rho } => rho_inf * (t as f64).powf(rho - 1.0),
        }
    }

    /// Declared decay exponent (`rho` such that `t^(1-rho) rho_t` has a
    /// limit), and that limit.
    pub fn declared(&self) -> (f64, f64) {
        match *self {
            Remainder::Zero => (0.0, 0.0),
            Remainder::Power { rho_inf, rho } => (rho, rho_inf),
        }
    }
}

/// Declared limit of `t^(1-delta) E[dM_{t+1}^2 | F_t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitVariance {
    Constant(f64),
    /// `V = delta * X_inf`, the Bernoulli-innovation case (so the CLT
    /// residual variance `V/delta` is the limit itself).
    DeltaTimesLimit,
}

/// Specification of one recursive dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursionSpec {
    pub theta: f64,
    /// Drift exponent in (0, 1].
    pub delta: f64,
    pub form: DynamicsForm,
    pub remainder: Remainder,
    pub limit_variance: LimitVariance,
    /// Initial value `X_1`.
    pub x1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DynamicsForm {
    NonNegative(Innovation),
    Signed(MartingaleNoise),
}

impl RecursionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0) {
            return Err(Error::InvalidParameter("theta must be > 0".into()));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::InvalidParameter("delta must be in (0,1]".into()));
        }
        let (rho, _) = self.remainder.declared();
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidParameter("rho must be in [0,1]".into()));
        }
        if matches!(self.form, DynamicsForm::NonNegative(_)) && self.x1 < 0.0 {
            return Err(Error::InvalidParameter(
                "non-negative dynamics needs x1 >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// A recorded path: `(t, X_t)` at geometric checkpoints plus the
/// terminal point.
#[derive(Debug, Clone)]
pub struct RecursionPath {
    pub spec: RecursionSpec,
    pub points: Vec<(u64, f64)>,
}

impl RecursionPath {
    pub fn terminal(&self) -> (u64, f64) {
        *self.points.last().expect("path has points")
    }

    pub fn at(&self, t: u64) -> Option<f64> {
        self.points.iter().find(|(s, _)| *s == t).map(|(_, x)| *x)
    }
}

/// Iterates the declared dynamics exactly from `t = 1` to `horizon`,
/// recording at `checkpoints` (strictly increasing; horizon appended).
pub fn run_recursion(
    spec: &RecursionSpec,
    horizon: u64,
    checkpoints: &[u64],
    seed: u64,
) -> Result<RecursionPath> {
    spec.validate()?;
    if horizon < 1 {
        return Err(Error::InvalidConfig("horizon must be >= 1".into()));
    }
    let mut rng = replica_rng(seed, 0);
    let mut x = spec.x1;
    let mut points = Vec::with_capacity(checkpoints.len() + 1);
    let mut cps = checkpoints.iter().copied().peekable();
    if cps.peek() == Some(&1) {
        points.push((1, x));
        cps.next();
    }
    for t in 1..horizon {
        let denom = spec.theta + (t + 1) as f64;
        x = match spec.form {
            DynamicsForm::NonNegative(innovation) => {
                let y = draw_innovation(&mut rng, innovation, spec, t, x)?;
                let next = (1.0 - 1.0 / denom) * x + y / denom;
                if next < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "non-negative dynamics went negative at t={t}"
                    )));
                }
                next
            }
            DynamicsForm::Signed(noise) => {
                let dm = match noise {
                    MartingaleNoise::Rademacher { scale } => {
                        if bernoulli(&mut rng, 0.5) {
                            scale
                        } else {
                            -scale
                        }
                    }
                    MartingaleNoise::None => 0.0,
                };
                let rho_next = spec.remainder.value(t + 1);
                (1.0 - (1.0 - spec.delta) / denom) * x + (dm + rho_next) / denom
            }
        };
        if cps.peek() == Some(&(t + 1)) {
            points.push((t + 1, x));
            cps.next();
        }
    }
    if points.last().map(|(t, _)| *t) != Some(horizon) {
        points.push((horizon, x));
    }
    Ok(RecursionPath { spec: *spec, points })
}

fn draw_innovation(
    rng: &mut SimRng,
    innovation: Innovation,
    spec: &RecursionSpec,
    t: u64,
    x: f64,
) -> Result<f64> {
    match innovation {
        Innovation::Zero => Ok(0.0),
        Innovation::Bernoulli => {
            let mean = spec.delta * x + spec.remainder.value(t);
            if !(0.0..=1.0).contains(&mean) {
                return Err(Error::InvalidParameter(format!(
                    "Bernoulli innovation mean {mean} outside [0,1] at t={t}"
                )));
            }
            Ok(if bernoulli(rng, mean) { 1.0 } else { 0.0 })
        }
    }
}

/// Step-size sequence of a stochastic-approximation problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    /// `eta_t = 1/(theta + t + 1)`.
    Harmonic { theta: f64 },
    /// `eta_t = c / (t+1)^gamma`.
    Power { c: f64, gamma: f64 },
}

impl StepSize {
    fn value(&self, t: u64) -> f64 {
        match *self {
            StepSize::Harmonic { theta } => 1.0 / (theta + (t + 1) as f64),
            StepSize::Power { c, gamma } => c / ((t + 1) as f64).powf(gamma),
        }
    }
}

/// Attractor process `A_t` with a declared almost-sure limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Attractor {
    Constant(f64),
    /// `A_t = a_inf + shift/t` with `a_inf` drawn uniformly from the
    /// given range once per replica (a genuinely random limit).
    RandomShifted { lo: f64, hi: f64, shift: f64 },
}

/// `X_{t+1} = X_t + eta_t (A_t - b_t X_t) + eta_t dM_{t+1} + rho_{t+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SAProblem {
    pub eta: StepSize,
    /// Target gain; `b_t -> b > 0` (constant here).
    pub b: f64,
    pub attractor: Attractor,
    pub noise: MartingaleNoise,
    pub remainder: Remainder,
    pub x1: f64,
}

impl SAProblem {
    /// Validates the step-size conditions `sum eta = inf`,
    /// `sum eta^2 < inf`. For the declared families the check is
    /// analytic (partial sums at desk horizons cannot separate
    /// exponents on either side of the square-summability boundary); a
    /// numeric tail sanity check runs on the configured horizon too.
    pub fn validate(&self, horizon: u64) -> Result<()> {
        if !(self.b > 0.0) {
            return Err(Error::InvalidParameter("b must be > 0".into()));
        }
        if horizon < 16 {
            return Err(Error::InvalidConfig("horizon too short to validate eta".into()));
        }
        match self.eta {
            StepSize::Harmonic { theta } => {
                if !(theta > 0.0) {
                    return Err(Error::InvalidParameter("eta: theta must be > 0".into()));
                }
            }
            StepSize::Power { c, gamma } => {
                if !(c > 0.0) {
                    return Err(Error::InvalidParameter("eta: c must be > 0".into()));
                }
                if gamma <= 0.5 {
                    return Err(Error::InvalidParameter(format!(
                        "eta = c/t^{gamma}: sum of eta^2 diverges (needs gamma > 1/2)"
                    )));
                }
                if gamma > 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "eta = c/t^{gamma}: sum of eta converges (needs gamma <= 1)"
                    )));
                }
            }
        }
        // Numeric sanity on the configured horizon: eta nonnegative and
        // its square sums not blowing up in the tail.
        let half = horizon / 2;
        let (mut s2_first, mut s2_second) = (0.0f64, 0.0f64);
        for t in 0..horizon {
            let e = self.eta.value(t);
            if e < 0.0 || !e.is_finite() {
                return Err(Error::InvalidParameter("eta must be finite and nonnegative".into()));
            }
            if t < half {
                s2_first += e * e;
            } else {
                s2_second += e * e;
            }
        }
        if s2_second > s2_first {
            return Err(Error::InvalidParameter(
                "sum of eta^2 grows in the tail (needs sum eta^2 < infinity)".into(),
            ));
        }
        Ok(())
    }
}

/// Runs one stochastic-approximation replica; returns the checkpointed
/// path and the realized attractor limit.
pub fn run_sa(
    problem: &SAProblem,
    horizon: u64,
    checkpoints: &[u64],
    seed: u64,
) -> Result<(RecursionPath, f64)> {
    problem.validate(horizon)?;
    let mut rng = replica_rng(seed, 0);
    let a_inf = match problem.attractor {
        Attractor::Constant(a) => a,
        Attractor::RandomShifted { lo, hi, .. } => {
            use rand::Rng;
            lo + (hi - lo) * rng.random::<f64>()
        }
    };
    let mut x = problem.x1;
    let mut points = Vec::new();
    let mut cps = checkpoints.iter().copied().peekable();
    if cps.peek() == Some(&1) {
        points.push((1, x));
        cps.next();
    }
    for t in 1..horizon {
        let a_t = match problem.attractor {
            Attractor::Constant(a) => a,
            Attractor::RandomShifted { shift, .. } => a_inf + shift / t as f64,
        };
        let dm = match problem.noise {
            MartingaleNoise::Rademacher { scale } => {
                if bernoulli(&mut rng, 0.5) {
                    scale
                } else {
                    -scale
                }
            }
            MartingaleNoise::None => 0.0,
        };
        let eta = problem.eta.value(t);
        x += eta * (a_t - problem.b * x) + eta * dm + problem.remainder.value(t + 1);
        if cps.peek() == Some(&(t + 1)) {
            points.push((t + 1, x));
            cps.next();
        }
    }
    if points.last().map(|(t, _)| *t) != Some(horizon) {
        points.push((horizon, x));
    }
    let spec = RecursionSpec {
        theta: 1.0,
        delta: 1.0,
        form: DynamicsForm::Signed(problem.noise),
        remainder: problem.remainder,
        limit_variance: LimitVariance::Constant(0.0),
        x1: problem.x1,
    };
    Ok((RecursionPath { spec, points }, a_inf))
}

/// Fraction of terminal rescaled values below `epsilon`.
pub fn positivity_fraction(terminal_rescaled: &[f64], epsilon: f64) -> Result<f64> {
    if terminal_rescaled.is_empty() {
        return Err(Error::BadSample("positivity check needs a nonempty sample".into()));
    }
    let below = terminal_rescaled.iter().filter(|&&v| v < epsilon).count();
    Ok(below as f64 / terminal_rescaled.len() as f64)
}

/// Standardized CLT residuals for a batch of recursion paths.
///
/// For each path: the limit proxy is `t_max^(1-delta) X_{t_max}`, the
/// residual at `t_check` carries the declared drift correction
/// `rho_inf/(delta-rho) * t_check^-(delta-rho)`, scaled by
/// `t_check^(delta/2)` and standardized by the declared limit standard
/// deviation `sqrt(V/delta)` (per-replica when `V = delta * X_inf`).
/// Because the proxy is itself a finite-horizon observation, the
/// residual variance is `(V/delta)(1 - (t_check/t_max)^delta)` exactly
/// (orthogonal martingale increments); the standardization includes
/// that factor so the residuals target unit variance at any admissible
/// horizon ratio.
pub fn clt_residuals(
    paths: &[RecursionPath],
    spec: &RecursionSpec,
    t_check: u64,
    t_max: u64,
) -> Result<Vec<f64>> {
    let (rho, rho_inf) = spec.remainder.declared();
    if rho >= spec.delta {
        return Err(Error::RegimeMismatch(format!(
            "clt_residuals requires rho < delta (got rho={rho}, delta={})",
            spec.delta
        )));
    }
    if t_check > t_max / 10 {
        return Err(Error::InvalidConfig(
            "t_check must be at most t_max/10 so the limit proxy is settled".into(),
        ));
    }
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let x_check = path
            .at(t_check)
            .ok_or_else(|| Error::InvalidConfig(format!("path lacks checkpoint {t_check}")))?;
        let x_max = path
            .at(t_max)
            .ok_or_else(|| Error::InvalidConfig(format!("path lacks checkpoint {t_max}")))?;
        let tc = t_check as f64;
        let proxy = (t_max as f64).powf(1.0 - spec.delta) * x_max;
        let drift = if rho_inf == 0.0 {
            0.0
        } else {
            rho_inf / (spec.delta - rho) * tc.powf(-(spec.delta - rho))
        };
        let residual = tc.powf(spec.delta / 2.0)
            * (tc.powf(1.0 - spec.delta) * x_check + drift - proxy);
        let v = match spec.limit_variance {
            LimitVariance::Constant(v) => v,
            LimitVariance::DeltaTimesLimit => spec.delta * proxy,
        };
        let horizon_factor = 1.0 - (tc / t_max as f64).powf(spec.delta);
        let sd = (v / spec.delta * horizon_factor).sqrt();
        if sd > 0.0 {
            out.push(residual / sd);
        }
    }
    if out.is_empty() {
        return Err(Error::BadSample("no usable residuals".into()));
    }
    Ok(out)
}

/// Ensemble mean of `t_check^(delta-rho) (t_check^(1-delta) X - proxy)`,
/// the statistic that concentrates at `-rho_inf/(delta-rho)` when
/// `delta/2 < rho < delta`. The limit proxy carries its own drift
/// correction `rho_inf/(delta-rho) t_max^-(delta-rho)`: the terminal
/// value still drifts at the same slow rate, and without the correction
/// the statistic would land at `-rho_inf/(delta-rho)` times
/// `1 - (t_check/t_max)^(delta-rho)` instead.
pub fn concentration_statistic(
    paths: &[RecursionPath],
    spec: &RecursionSpec,
    t_check: u64,
    t_max: u64,
) -> Result<f64> {
    let (rho, rho_inf) = spec.remainder.declared();
    if !(rho > spec.delta / 2.0 && rho < spec.delta) {
        return Err(Error::RegimeMismatch(
            "concentration regime needs delta/2 < rho < delta".into(),
        ));
    }
    let proxy_drift = rho_inf / (spec.delta - rho) * (t_max as f64).powf(-(spec.delta - rho));
    let stats: Vec<f64> = paths
        .iter()
        .map(|path| {
            let x_check = path.at(t_check).expect("checkpoint recorded");
            let x_max = path.at(t_max).expect("terminal recorded");
            let tc = t_check as f64;
            let proxy = (t_max as f64).powf(1.0 - spec.delta) * x_max + proxy_drift;
            tc.powf(spec.delta - rho) * (tc.powf(1.0 - spec.delta) * x_check - proxy)
        })
        .collect();
    Ok(mean(&stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_innovation_is_pure_decay() {
        // X_t = X_1 * (theta+2)/(theta+t+1) exactly... the product
        // telescopes to (theta+1+1)/(theta+t+1) starting from t=1.
        let spec = RecursionSpec {
            theta: 1.0,
            delta: 0.5,
            form: DynamicsForm::NonNegative(Innovation::Zero),
            remainder: Remainder::Zero,
            limit_variance: LimitVariance::DeltaTimesLimit,
            x1: 1.0,
        };
        let path = run_recursion(&spec, 1000, &[1000], 7).unwrap();
        let (t, x) = path.terminal();
        let expect: f64 = (2..=t).map(|n| 1.0 - 1.0 / (spec.theta + n as f64)).product::<f64>();
        assert!((x - expect).abs() < 1e-12, "{x} vs {expect}");
    }

    #[test]
    fn noiseless_sa_reaches_target() {
        // a = 2, b = 0.5 -> limit 4; decay is t^{-1/2}, so start nearby.
        let problem = SAProblem {
            eta: StepSize::Harmonic { theta: 1.0 },
            b: 0.5,
            attractor: Attractor::Constant(2.0),
            noise: MartingaleNoise::None,
            remainder: Remainder::Zero,
            x1: 3.5,
        };
        let (path, _) = run_sa(&problem, 1_000_000, &[1_000_000], 1).unwrap();
        let (_, x) = path.terminal();
        assert!((x - 4.0).abs() <= 1e-3, "terminal {x}");
    }

    #[test]
    fn noiseless_sa_monotone_after_burn_in() {
        let problem = SAProblem {
            eta: StepSize::Harmonic { theta: 1.0 },
            b: 1.0,
            attractor: Attractor::Constant(3.0),
            noise: MartingaleNoise::None,
            remainder: Remainder::Zero,
            x1: 0.0,
        };
        let cps: Vec<u64> = (1..=100).collect();
        let (path, _) = run_sa(&problem, 100, &cps, 1).unwrap();
        for w in path.points.windows(2) {
            assert!(w[1].1 >= w[0].1, "not monotone at {:?}", w);
        }
    }

    #[test]
    fn divergent_eta_squared_rejected() {
        let problem = SAProblem {
            eta: StepSize::Power { c: 1.0, gamma: 0.4 },
            b: 1.0,
            attractor: Attractor::Constant(1.0),
            noise: MartingaleNoise::None,
            remainder: Remainder::Zero,
            x1: 0.0,
        };
        assert!(problem.validate(10_000).is_err());
        // A convergent eta sum must also be rejected.
        let problem2 = SAProblem {
            eta: StepSize::Power { c: 1.0, gamma: 1.5 },
            ..problem
        };
        assert!(problem2.validate(10_000).is_err());
        // The harmonic sequence passes.
        let problem3 = SAProblem {
            eta: StepSize::Harmonic { theta: 1.0 },
            ..problem
        };
        assert!(problem3.validate(10_000).is_ok());
    }

    #[test]
    fn positivity_edges() {
        assert_eq!(positivity_fraction(&[1.0, 2.0], 1e-3).unwrap(), 0.0);
        assert_eq!(positivity_fraction(&[0.0, 0.0], 1e-3).unwrap(), 1.0);
        assert!(positivity_fraction(&[], 1e-3).is_err());
    }

    #[test]
    fn clt_residuals_rejects_out_of_scope_rho() {
        let spec = RecursionSpec {
            theta: 1.0,
            delta: 0.5,
            form: DynamicsForm::NonNegative(Innovation::Bernoulli),
            remainder: Remainder::Power { rho_inf: 1.0, rho: 0.6 },
            limit_variance: LimitVariance::DeltaTimesLimit,
            x1: 0.5,
        };
        assert!(clt_residuals(&[], &spec, 100, 10_000).is_err());
    }

    #[test]
    fn drift_term_vanishes_when_rho_inf_zero() {
        let spec = RecursionSpec {
            theta: 1.0,
            delta: 1.0,
            form: DynamicsForm::Signed(MartingaleNoise::Rademacher { scale: 1.0 }),
            remainder: Remainder::Zero,
            limit_variance: LimitVariance::Constant(1.0),
            x1: 0.0,
        };
        let paths: Vec<RecursionPath> = (0..4)
            .map(|i| run_recursion(&spec, 10_000, &[1000, 10_000], i).unwrap())
            .collect();
        let res = clt_residuals(&paths, &spec, 1000, 10_000).unwrap();
        assert_eq!(res.len(), 4);
        // With rho_inf = 0 the residual is purely the scaled difference.
        let p = &paths[0];
        let manual = (1000f64).sqrt() * (p.at(1000).unwrap() - p.at(10_000).unwrap());
        assert!((res[0] - manual).abs() < 1e-12);
    }
}
