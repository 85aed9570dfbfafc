//! Regime-correct rescaling factors, limits, and CLT centerings.
//!
//! The normalizations use the leading-power form `t^x` (optionally with
//! `ln t` corrections) in place of the exact gamma-ratio normalizer,
//! which differs by `O(1/t)`; verification tolerances absorb that.

use crate::error::{Error, Result};
use crate::params::Parameters;
use crate::regime::{CltDishCase, CltMeanCase, DishCase, MeanCase, Regime};

/// Quantities a scaling rule can be asked for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Z,
    Tbar,
    Pbar,
    Kbar,
    KTagged,
    PTagged,
    D,
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Quantity::Z => "Z",
            Quantity::Tbar => "Tbar",
            Quantity::Pbar => "Pbar",
            Quantity::Kbar => "Kbar",
            Quantity::KTagged => "K_tagged",
            Quantity::PTagged => "P_tagged",
            Quantity::D => "D",
        };
        f.write_str(name)
    }
}

/// Multiplier `t^power * ln(t)^log_power`; strictly positive for `t >= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factor {
    pub power: f64,
    pub log_power: i32,
}

impl Factor {
    pub fn eval(&self, t: f64) -> f64 {
        let mut v = t.powf(self.power);
        match self.log_power {
            0 => {}
            1 => v *= t.ln(),
            -1 => v /= t.ln(),
            -2 => v /= t.ln() * t.ln(),
            k => v *= t.ln().powi(k),
        }
        v
    }
}

fn compact(x: f64) -> String {
    let mut s = format!("{x:.6}");
    while s.contains('.') && (s.ends_with('0') || s.ends_with('.')) {
        s.pop();
    }
    s
}

impl std::fmt::Display for Factor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "t^{}", compact(self.power))?;
        match self.log_power {
            0 => Ok(()),
            1 => write!(f, " * ln(t)"),
            -1 => write!(f, " / ln(t)"),
            k if k > 0 => write!(f, " * ln(t)^{k}"),
            k => write!(f, " / ln(t)^{}", -k),
        }
    }
}

/// What the rescaled quantity converges to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitKind {
    Deterministic(f64),
    /// `coeff * Zstar_inf`, the strictly positive random limit shared by
    /// the mean quantities.
    RandomZstar { coeff: f64 },
    /// `coeff * Kstar_inf_j`, a dish-specific strictly positive limit.
    RandomKstar { coeff: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRule {
    pub quantity: Quantity,
    pub factor: Factor,
    pub limit: LimitKind,
}

impl ScalingRule {
    /// Rescales a raw observation taken at time `t`.
    pub fn rescale(&self, t: f64, raw: f64) -> f64 {
        self.factor.eval(t) * raw
    }

    /// The deterministic limit, when there is one.
    pub fn deterministic_limit(&self) -> Option<f64> {
        match self.limit {
            LimitKind::Deterministic(v) => Some(v),
            _ => None,
        }
    }
}

fn factor(power: f64, log_power: i32) -> Factor {
    Factor { power, log_power }
}

fn not_possible(q: Quantity, cell: &str) -> Error {
    Error::RegimeMismatch(format!("{q} has no limit law in the cell `{cell}` (not possible)"))
}

/// The almost-sure scaling rule for `quantity` under `regime`.
pub fn scaling_rule(regime: &Regime, quantity: Quantity, params: &Parameters) -> Result<ScalingRule> {
    let (alpha, beta, w, iota) = (params.alpha, params.beta, params.w, params.iota);
    let (f, limit) = match quantity {
        Quantity::D => {
            if beta > 0.0 {
                (factor(-beta, 0), LimitKind::Deterministic(alpha / beta))
            } else {
                (factor(0.0, -1), LimitKind::Deterministic(alpha))
            }
        }
        Quantity::Z => match regime.mean_case {
            MeanCase::BetaLtW { .. } => (factor(1.0 - w, 0), LimitKind::RandomZstar { coeff: 1.0 }),
            MeanCase::BetaEqW => (factor(1.0 - w, -1), LimitKind::Deterministic(alpha * w)),
            MeanCase::WLtBeta => (
                factor(1.0 - beta, 0),
                LimitKind::Deterministic(alpha * beta / (beta - w)),
            ),
        },
        Quantity::Tbar => match regime.mean_case {
            MeanCase::BetaLtW { .. } => (
                factor(1.0 - w, 0),
                LimitKind::RandomZstar { coeff: 1.0 / w },
            ),
            MeanCase::BetaEqW => (factor(1.0 - w, -1), LimitKind::Deterministic(alpha)),
            MeanCase::WLtBeta => (
                factor(1.0 - beta, 0),
                LimitKind::Deterministic(alpha / (beta - w)),
            ),
        },
        Quantity::Pbar => match regime.mean_case {
            MeanCase::BetaLtW { beta_zero: true } => (
                factor(1.0 - w, 1),
                LimitKind::RandomZstar { coeff: 1.0 / alpha },
            ),
            MeanCase::BetaLtW { beta_zero: false } => (
                factor(1.0 - w + beta, 0),
                LimitKind::RandomZstar { coeff: beta / alpha },
            ),
            MeanCase::BetaEqW => (factor(1.0, -1), LimitKind::Deterministic(w * w)),
            MeanCase::WLtBeta => (
                factor(1.0, 0),
                LimitKind::Deterministic(w * beta / (beta - w)),
            ),
        },
        Quantity::Kbar => match regime.mean_case {
            MeanCase::BetaLtW { beta_zero: true } => (
                factor(-w, 1),
                LimitKind::RandomZstar {
                    coeff: 1.0 / (alpha * w),
                },
            ),
            MeanCase::BetaLtW { beta_zero: false } => (
                factor(beta - w, 0),
                LimitKind::RandomZstar {
                    coeff: beta / (alpha * w),
                },
            ),
            MeanCase::BetaEqW => (factor(0.0, -1), LimitKind::Deterministic(w)),
            MeanCase::WLtBeta => (
                factor(0.0, 0),
                LimitKind::Deterministic(beta / (beta - w)),
            ),
        },
        Quantity::KTagged => match (regime.dish_case, regime.mean_case) {
            (DishCase::Low, _) => (
                factor(-(1.0 - iota) * w, 0),
                LimitKind::RandomKstar { coeff: 1.0 },
            ),
            (DishCase::IotaOne, MeanCase::BetaLtW { beta_zero: true }) => (
                factor(-w, 1),
                LimitKind::RandomZstar {
                    coeff: 1.0 / (alpha * w),
                },
            ),
            (DishCase::IotaOne, MeanCase::BetaLtW { beta_zero: false }) => (
                factor(beta - w, 0),
                LimitKind::RandomZstar {
                    coeff: beta / (alpha * (w - beta)),
                },
            ),
            (DishCase::IotaOne, MeanCase::BetaEqW) => {
                (factor(0.0, -2), LimitKind::Deterministic(w * w / 2.0))
            }
            (DishCase::IotaOne, MeanCase::WLtBeta) => (
                factor(0.0, -1),
                LimitKind::Deterministic(w * beta / (beta - w)),
            ),
            (DishCase::High, MeanCase::BetaLtW { beta_zero: true }) => (
                factor(-w, 1),
                LimitKind::RandomZstar {
                    coeff: 1.0 / (alpha * w),
                },
            ),
            (DishCase::High, MeanCase::BetaLtW { beta_zero: false }) => (
                factor(beta - w, 0),
                LimitKind::RandomZstar {
                    coeff: iota / (iota * w - beta) * beta / alpha,
                },
            ),
            (DishCase::Critical, MeanCase::BetaLtW { beta_zero: false }) => (
                factor(beta - w, -1),
                LimitKind::RandomZstar {
                    coeff: iota * beta / alpha,
                },
            ),
            (case, mean) => return Err(not_possible(quantity, &format!("{mean} x {case}"))),
        },
        Quantity::PTagged => match (regime.dish_case, regime.mean_case) {
            (DishCase::Low, _) => (
                factor(1.0 - (1.0 - iota) * w, 0),
                LimitKind::RandomKstar {
                    coeff: (1.0 - iota) * w,
                },
            ),
            (DishCase::IotaOne, MeanCase::BetaLtW { beta_zero: true }) => (
                factor(1.0 - w, 1),
                LimitKind::RandomZstar { coeff: 1.0 / alpha },
            ),
            (DishCase::IotaOne, MeanCase::BetaLtW { beta_zero: false }) => (
                factor(1.0 - w + beta, 0),
                LimitKind::RandomZstar { coeff: beta / alpha },
            ),
            (DishCase::IotaOne, MeanCase::BetaEqW) => {
                (factor(1.0, -1), LimitKind::Deterministic(w * w))
            }
            (DishCase::IotaOne, MeanCase::WLtBeta) => (
                factor(1.0, 0),
                LimitKind::Deterministic(w * beta / (beta - w)),
            ),
            (DishCase::High, MeanCase::BetaLtW { beta_zero: true }) => (
                factor(1.0 - w, 1),
                LimitKind::RandomZstar { coeff: 1.0 / alpha },
            ),
            (DishCase::High, MeanCase::BetaLtW { beta_zero: false }) => (
                factor(1.0 - w + beta, 0),
                LimitKind::RandomZstar {
                    coeff: iota * (w - beta) / (iota * w - beta) * beta / alpha,
                },
            ),
            (DishCase::Critical, MeanCase::BetaLtW { beta_zero: false }) => (
                factor(1.0 - w + beta, -1),
                LimitKind::RandomZstar {
                    coeff: (1.0 - iota) * w * iota * beta / alpha,
                },
            ),
            (case, mean) => return Err(not_possible(quantity, &format!("{mean} x {case}"))),
        },
    };
    Ok(ScalingRule {
        quantity,
        factor: f,
        limit,
    })
}

/// `lambda(beta)`: the limit of `D_t / a_t(beta)`.
pub fn lambda_of_beta(params: &Parameters) -> f64 {
    if params.beta == 0.0 {
        params.alpha
    } else {
        params.alpha / params.beta
    }
}

/// `a_t(beta)`: `ln t` for `beta = 0`, otherwise `t^beta`.
pub fn a_t_of_beta(params: &Parameters, t: f64) -> f64 {
    if params.beta == 0.0 {
        t.ln()
    } else {
        t.powf(params.beta)
    }
}

/// Symbolic descriptor of a CLT limit variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceKind {
    /// `w * Sigma_inf` (predictive mean).
    WSigmaInf,
    /// `Sigma_inf / w` (running mean of tries).
    SigmaInfOverW,
    /// `Zstar^2 / lambda(beta)^3` (mean inclusion probability).
    ZstarSqOverLambdaCubed,
    /// `Zstar^2 / (lambda(beta)^3 w^2)` (mean popularity).
    ZstarSqOverLambdaCubedW2,
    /// `Kstar_inf_j` (dish popularity).
    KStarJ,
    /// `lambda(beta)` (distinct-dish count).
    LambdaBeta,
}

/// Centering and scaling for the second-order (CLT) verification of one
/// quantity at time `t`.
///
/// `drift_correction` is the deterministic term *added* to the rescaled
/// quantity before subtracting the limit; `scale` multiplies the
/// difference. The drift for tagged dishes involves the random
/// `Zstar_inf`, supplied through `zstar_estimate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltCentering {
    pub drift_correction: f64,
    pub scale: f64,
    pub variance: VarianceKind,
}

pub fn clt_centering(
    regime: &Regime,
    quantity: Quantity,
    params: &Parameters,
    t: f64,
    zstar_estimate: f64,
) -> Result<CltCentering> {
    let (alpha, beta, w, iota) = (params.alpha, params.beta, params.w, params.iota);
    match quantity {
        Quantity::D => Ok(CltCentering {
            drift_correction: 0.0,
            scale: a_t_of_beta(params, t).sqrt(),
            variance: VarianceKind::LambdaBeta,
        }),
        Quantity::Z | Quantity::Tbar | Quantity::Pbar | Quantity::Kbar => {
            if regime.clt_mean_case == CltMeanCase::None {
                return Err(Error::RegimeMismatch(format!(
                    "no mean CLT for {quantity}: requires beta < w"
                )));
            }
            let tail = t.powf(-(w - beta));
            let lam = lambda_of_beta(params);
            let (drift, scale, variance) = match quantity {
                Quantity::Z => (
                    alpha * beta / (w - beta) * tail,
                    t.powf(w / 2.0),
                    VarianceKind::WSigmaInf,
                ),
                Quantity::Tbar => (
                    alpha / (w - beta) * tail,
                    t.powf(w / 2.0),
                    VarianceKind::SigmaInfOverW,
                ),
                Quantity::Pbar => (
                    alpha * w / (lam * (w - beta)) * tail,
                    a_t_of_beta(params, t).sqrt(),
                    VarianceKind::ZstarSqOverLambdaCubed,
                ),
                Quantity::Kbar => (
                    alpha / (lam * (w - beta)) * tail,
                    a_t_of_beta(params, t).sqrt(),
                    VarianceKind::ZstarSqOverLambdaCubedW2,
                ),
                _ => unreachable!(),
            };
            Ok(CltCentering {
                drift_correction: drift,
                scale,
                variance,
            })
        }
        Quantity::KTagged => {
            let needs_drift = match regime.clt_dish_case {
                CltDishCase::CaseI { critical_drift } => critical_drift,
                CltDishCase::CaseII | CltDishCase::CaseIIWithClt => true,
                CltDishCase::None => {
                    return Err(Error::RegimeMismatch(
                        "no dish CLT: requires low interaction".into(),
                    ))
                }
            };
            let drift = if needs_drift {
                iota * (beta / alpha) / (beta - w * iota) * zstar_estimate
                    * t.powf(-(beta - w * iota))
            } else {
                0.0
            };
            Ok(CltCentering {
                drift_correction: drift,
                scale: t.powf((1.0 - iota) * w / 2.0),
                variance: VarianceKind::KStarJ,
            })
        }
        Quantity::PTagged => Err(Error::RegimeMismatch(
            "second-order verification uses K_tagged; P_tagged has no separate CLT here".into(),
        )),
    }
}
