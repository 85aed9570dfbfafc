//! Descriptive statistics, the normality gate, and log-log regression.

use crate::error::{Error, Result};

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of the sample mean.
pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Median (by sorting a copy).
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Standard normal CDF.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Diagnostics of a sample against the standard normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalityReport {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Max absolute deviation of the empirical CDF of the standardized
    /// sample from the standard normal CDF.
    pub cdf_max_deviation: f64,
    /// The deviation allowed by the gate: `1.63/sqrt(n) * 1.5` (the 1%
    /// asymptotic Kolmogorov band with 50% slack).
    pub cdf_band: f64,
    pub pass: bool,
}

/// Gate thresholds: |skewness| < 0.15, |excess kurtosis| < 0.3, CDF
/// deviation inside the slackened 1% band. Calibrated so that a true
/// normal sample of size 2000 passes with probability above 99% while
/// an Exponential(1) sample fails essentially always.
pub const SKEWNESS_GATE: f64 = 0.15;
pub const KURTOSIS_GATE: f64 = 0.3;
pub const CDF_BAND_COEFF: f64 = 1.63 * 1.5;

/// Minimal sample size accepted by the gate.
pub const NORMALITY_MIN_N: usize = 500;

/// Runs the normality gate on `sample` (standardized internally).
pub fn normality_check(sample: &[f64]) -> Result<NormalityReport> {
    let n = sample.len();
    if n < NORMALITY_MIN_N {
        return Err(Error::BadSample(format!(
            "normality gate needs at least {NORMALITY_MIN_N} values, got {n}"
        )));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::BadSample("normality gate received non-finite values".into()));
    }
    let m = mean(sample);
    let var = variance(sample);
    if var <= 0.0 {
        return Err(Error::BadSample("normality gate received a degenerate sample".into()));
    }
    let sd = var.sqrt();
    let nf = n as f64;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &x in sample {
        let d = (x - m) / sd;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    let skewness = m3 / nf;
    let excess_kurtosis = m4 / nf - 3.0;

    let mut standardized: Vec<f64> = sample.iter().map(|x| (x - m) / sd).collect();
    standardized.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut dev: f64 = 0.0;
    for (i, &x) in standardized.iter().enumerate() {
        let phi = standard_normal_cdf(x);
        let hi = (i + 1) as f64 / nf;
        let lo = i as f64 / nf;
        dev = dev.max((phi - lo).abs()).max((hi - phi).abs());
    }
    let band = CDF_BAND_COEFF / nf.sqrt();
    let pass = skewness.abs() < SKEWNESS_GATE && excess_kurtosis.abs() < KURTOSIS_GATE && dev < band;
    Ok(NormalityReport {
        n,
        mean: m,
        variance: var,
        skewness,
        excess_kurtosis,
        cdf_max_deviation: dev,
        cdf_band: band,
        pass,
    })
}

/// Ordinary least squares of `ln(value)` on `ln(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoglogFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
    pub residual_rms: f64,
    /// t-statistic of the quadratic term of a second fit in `ln t`;
    /// large values flag curvature (logarithmic corrections).
    pub curvature_t: f64,
    pub n_used: usize,
    pub n_skipped_nonpositive: usize,
}

/// Fits `ln(value) = intercept + slope * ln(t)` over the points whose
/// time lies in `[window.0, window.1]` and whose value is positive.
pub fn loglog_fit(series: &[(f64, f64)], window: (f64, f64)) -> Result<LoglogFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut skipped = 0usize;
    for &(t, v) in series {
        if t < window.0 || t > window.1 {
            continue;
        }
        if !(v > 0.0) || !v.is_finite() {
            skipped += 1;
            continue;
        }
        xs.push(t.ln());
        ys.push(v.ln());
    }
    let n = xs.len();
    if n < 5 {
        return Err(Error::BadSample(format!(
            "log-log fit needs at least 5 positive points in the window, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let dof = (n - 2).max(1) as f64;
    let sigma2 = rss / dof;
    let slope_std_error = (sigma2 / sxx).sqrt();
    let residual_rms = (rss / nf).sqrt();
    let curvature_t = quadratic_t_stat(&xs, &ys);
    Ok(LoglogFit {
        slope,
        intercept,
        slope_std_error,
        residual_rms,
        curvature_t,
        n_used: n,
        n_skipped_nonpositive: skipped,
    })
}

/// t-statistic of `c` in `y = a + b x + c x^2`, via the normal equations
/// on centered predictors.
fn quadratic_t_stat(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    if n < 6 {
        return 0.0;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let x1: Vec<f64> = xs.iter().map(|x| x - mx).collect();
    let mq = x1.iter().map(|x| x * x).sum::<f64>() / nf;
    let x2: Vec<f64> = x1.iter().map(|x| x * x - mq).collect();
    let my = ys.iter().sum::<f64>() / nf;
    let yc: Vec<f64> = ys.iter().map(|y| y - my).collect();
    // Solve the 2x2 system for (b, c) on centered predictors.
    let s11: f64 = x1.iter().map(|a| a * a).sum();
    let s12: f64 = x1.iter().zip(&x2).map(|(a, b)| a * b).sum();
    let s22: f64 = x2.iter().map(|a| a * a).sum();
    let sy1: f64 = x1.iter().zip(&yc).map(|(a, y)| a * y).sum();
    let sy2: f64 = x2.iter().zip(&yc).map(|(a, y)| a * y).sum();
    let det = s11 * s22 - s12 * s12;
    if det.abs() < 1e-12 * s11.max(s22).max(1.0) {
        return 0.0;
    }
    let b = (s22 * sy1 - s12 * sy2) / det;
    let c = (s11 * sy2 - s12 * sy1) / det;
    let rss: f64 = x1
        .iter()
        .zip(&x2)
        .zip(&yc)
        .map(|((a, q), y)| {
            let e = y - b * a - c * q;
            e * e
        })
        .sum();
    let dof = (n - 3).max(1) as f64;
    let sigma2 = rss / dof;
    if sigma2 <= 0.0 {
        // Perfect quadratic fit: an exact power law gives c = 0 here, so
        // report no curvature; otherwise the statistic is unbounded.
        return if c.abs() < 1e-10 { 0.0 } else { f64::INFINITY };
    }
    let var_c = sigma2 * s11 / det;
    c / var_c.sqrt()
}
