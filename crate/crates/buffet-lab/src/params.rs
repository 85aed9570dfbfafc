use crate::error::{Error, Result};

/// The five model parameters.
///
/// `alpha` (mass) controls the innovation rate, `beta` (discount) the
/// power-law growth of the number of distinct dishes, `theta`
/// (concentration) the early-time behavior. `w` is the weight of the
/// reinforcement term against the forcing input toward zero, and `iota`
/// the intensity of the mean-field interaction among dishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub w: f64,
    pub iota: f64,
}

impl Parameters {
    /// Builds a parameter set, rejecting out-of-range values.
    ///
    /// Admissible ranges: `alpha > 0`, `0 <= beta <= 1`, `theta > 0`,
    /// `0 < w <= 1`, `0 <= iota <= 1`.
    pub fn new(alpha: f64, beta: f64, theta: f64, w: f64, iota: f64) -> Result<Self> {
        let p = Parameters {
            alpha,
            beta,
            theta,
            w,
            iota,
        };
        p.validate()
    }

    /// Returns the parameters unchanged when every range constraint holds.
    pub fn validate(self) -> Result<Self> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidParameter("alpha must be > 0".into()));
        }
        if !(self.beta.is_finite() && (0.0..=1.0).contains(&self.beta)) {
            return Err(Error::InvalidParameter("beta must be in [0,1]".into()));
        }
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::InvalidParameter("theta must be > 0".into()));
        }
        if !(self.w.is_finite() && self.w > 0.0 && self.w <= 1.0) {
            return Err(Error::InvalidParameter("w must be in (0,1]".into()));
        }
        if !(self.iota.is_finite() && (0.0..=1.0).contains(&self.iota)) {
            return Err(Error::InvalidParameter("iota must be in [0,1]".into()));
        }
        Ok(self)
    }
}
