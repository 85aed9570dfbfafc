//! Classification of `(beta, w, iota)` into asymptotic regimes.
//!
//! The mean quantities transition on the comparison of `beta` with `w`;
//! the dish-specific quantities transition on the comparison of `iota`
//! with `beta/w`. Boundaries are distinct regimes (they carry
//! logarithmic corrections), so comparisons are exact; use
//! [`boundary_proximity`] to warn when a parameter sits numerically on
//! top of a boundary.

use crate::params::Parameters;

/// Row of the mean-quantity table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanCase {
    /// `beta < w`; `beta_zero` marks the `beta = 0` sub-row (its `Pbar`
    /// and `Kbar` scalings carry a `ln t`).
    BetaLtW { beta_zero: bool },
    /// `0 < beta = w`: logarithmic corrections everywhere.
    BetaEqW,
    /// `w < beta`: deterministic limits.
    WLtBeta,
}

/// Column of the dish-specific tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DishCase {
    /// `iota = 1`: all inclusion probabilities coincide exactly.
    IotaOne,
    /// `beta/w < iota < 1`: synchronized power-law limits.
    High,
    /// `0 < iota = beta/w < 1`: logarithmic correction.
    Critical,
    /// `iota = 0` or `iota < min(beta/w, 1)`: dish-specific limits.
    Low,
}

/// Second-order regime of the mean CLT (requires `beta < w`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CltMeanCase {
    /// `beta < w/2`: centered Gaussian fluctuations.
    BetaLtHalfW,
    /// `beta = w/2`: Gaussian with a constant mean shift of `-alpha`
    /// (for the predictive mean) when the drift correction is omitted.
    BetaEqHalfW,
    /// `w/2 < beta < w`: a deterministic drift dominates; Gaussian
    /// fluctuations only after the drift correction.
    HalfWLtBetaLtW,
    /// `beta >= w`: no mean CLT of this form.
    None,
}

/// Second-order regime of the dish CLT (requires low interaction).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CltDishCase {
    /// Gaussian fluctuations; the drift indicator is active exactly on
    /// `iota = 2*beta/w - 1`.
    CaseI { critical_drift: bool },
    /// The interaction drift dominates: in-probability concentration.
    CaseII,
    /// As `CaseII`, and additionally `iota < 3*beta/w - 1`, so Gaussian
    /// fluctuations reappear after the drift correction.
    CaseIIWithClt,
    /// Not in the low-interaction regime.
    None,
}

/// Full regime classification of a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Regime {
    pub mean_case: MeanCase,
    pub dish_case: DishCase,
    pub clt_mean_case: CltMeanCase,
    pub clt_dish_case: CltDishCase,
}

/// Deterministic classification with exact comparisons.
pub fn classify_regime(params: &Parameters) -> Regime {
    let (beta, w, iota) = (params.beta, params.w, params.iota);

    let mean_case = if beta < w {
        MeanCase::BetaLtW {
            beta_zero: beta == 0.0,
        }
    } else if beta == w {
        MeanCase::BetaEqW
    } else {
        MeanCase::WLtBeta
    };

    let ratio = beta / w;
    let dish_case = if iota == 1.0 {
        DishCase::IotaOne
    } else if iota == 0.0 {
        DishCase::Low
    } else if iota < ratio.min(1.0) {
        DishCase::Low
    } else if iota == ratio {
        // beta > 0 here (iota > 0), and iota < 1, so 0 < beta/w < 1.
        DishCase::Critical
    } else {
        DishCase::High
    };

    let clt_mean_case = if beta >= w {
        CltMeanCase::None
    } else if beta < w / 2.0 {
        CltMeanCase::BetaLtHalfW
    } else if beta == w / 2.0 {
        CltMeanCase::BetaEqHalfW
    } else {
        CltMeanCase::HalfWLtBetaLtW
    };

    let clt_dish_case = if dish_case != DishCase::Low {
        CltDishCase::None
    } else {
        let crit = 2.0 * ratio - 1.0;
        if iota == 0.0 || iota < crit.min(1.0) {
            CltDishCase::CaseI {
                critical_drift: false,
            }
        } else if iota == crit && crit > 0.0 && crit < 1.0 {
            CltDishCase::CaseI {
                critical_drift: true,
            }
        } else {
            // max(0, 2*beta/w - 1) < iota < beta/w < 1
            if iota < 3.0 * ratio - 1.0 {
                CltDishCase::CaseIIWithClt
            } else {
                CltDishCase::CaseII
            }
        }
    };

    Regime {
        mean_case,
        dish_case,
        clt_mean_case,
        clt_dish_case,
    }
}

/// Names of the regime boundaries that `params` sits within `tol` of.
/// Boundary regimes carry logarithmic corrections and are numerically
/// fragile; the CLI warns on them.
pub fn boundary_proximity(params: &Parameters, tol: f64) -> Vec<String> {
    let mut warnings = Vec::new();
    let (beta, w, iota) = (params.beta, params.w, params.iota);
    let near = |a: f64, b: f64| a != b && (a - b).abs() < tol;
    if near(beta, w) {
        warnings.push(format!("beta={beta} is within {tol} of w={w} (critical mean regime)"));
    }
    if near(iota, beta / w) {
        warnings.push(format!(
            "iota={iota} is within {tol} of beta/w={} (critical dish regime)",
            beta / w
        ));
    }
    if near(beta, w / 2.0) {
        warnings.push(format!(
            "beta={beta} is within {tol} of w/2={} (mean CLT boundary)",
            w / 2.0
        ));
    }
    let crit = 2.0 * beta / w - 1.0;
    if crit > 0.0 && crit < 1.0 && near(iota, crit) {
        warnings.push(format!(
            "iota={iota} is within {tol} of 2*beta/w-1={crit} (dish CLT boundary)"
        ));
    }
    warnings
}

impl std::fmt::Display for MeanCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeanCase::BetaLtW { beta_zero: true } => write!(f, "0 = beta < w"),
            MeanCase::BetaLtW { beta_zero: false } => write!(f, "0 < beta < w"),
            MeanCase::BetaEqW => write!(f, "0 < beta = w"),
            MeanCase::WLtBeta => write!(f, "0 < w < beta"),
        }
    }
}

impl std::fmt::Display for DishCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DishCase::IotaOne => write!(f, "iota = 1"),
            DishCase::High => write!(f, "beta/w < iota < 1 (high interaction)"),
            DishCase::Critical => write!(f, "iota = beta/w (critical interaction)"),
            DishCase::Low => write!(f, "iota < min(beta/w, 1) (low interaction)"),
        }
    }
}
