//! Aggregation of realization results: streaming moment summaries,
//! standardization, a Kolmogorov–Smirnov distance to the standard normal,
//! log–log rate fits, and empirical covariance matrices of scaled
//! functionals.
//!
//! Summaries merge associatively, so parallel reductions over realizations
//! give the same answers as sequential ones up to ~1e−12 relative error.

use nalgebra::Matrix2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Streaming summary of a univariate sample: count, mean, and the second to
/// fourth centered power sums. Merging two summaries is exact in the count
/// and numerically stable in the moments, so any reduction tree over a
/// partition of the sample is acceptable.
#[derive(Debug, Clone, Copy, Default)]
pub struct SampleSummary {
    count: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl SampleSummary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_value(x: f64) -> Self {
        SampleSummary {
            count: 1,
            mean: x,
            m2: 0.0,
            m3: 0.0,
            m4: 0.0,
        }
    }

    /// Pairwise (divide-and-conquer) aggregation of a slice.
    pub fn from_slice(xs: &[f64]) -> Self {
        if xs.len() <= 32 {
            let mut acc = Self::new();
            for &x in xs {
                acc.push(x);
            }
            return acc;
        }
        let mid = xs.len() / 2;
        Self::from_slice(&xs[..mid]).merge(Self::from_slice(&xs[mid..]))
    }

    pub fn push(&mut self, x: f64) {
        *self = self.merge(Self::from_value(x));
    }

    /// Moment-combining update for centered power sums up to order four.
    pub fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d2 = delta * delta;
        let mean = self.mean + delta * nb / n;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + d2 * delta * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        SampleSummary {
            count: self.count + other.count,
            mean,
            m2,
            m3,
            m4,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }

    /// Unbiased sample variance; NaN below two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        self.m2 / (self.count - 1) as f64
    }

    pub fn se_mean(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    /// Plug-in fourth central moment.
    pub fn fourth_central_moment(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.m4 / self.count as f64
    }

    /// Standard error of the unbiased variance,
    /// √(μ₄/N − s⁴ (N−3)/(N (N−1))), with plug-in moments.
    pub fn se_variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let n = self.count as f64;
        let s2 = self.variance();
        let mu4 = self.fourth_central_moment();
        (mu4 / n - s2 * s2 * (n - 3.0) / (n * (n - 1.0)))
            .max(0.0)
            .sqrt()
    }
}

/// Elementwise `(v − center)/scale`.
pub fn standardize(values: &[f64], center: f64, scale: f64) -> Result<Vec<f64>, StatsError> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(StatsError::InvalidInput(format!(
            "standardization scale must be positive, got {scale}"
        )));
    }
    Ok(values.iter().map(|v| (v - center) / scale).collect())
}

/// Standard normal CDF, accurate to ~1e−15 via the complementary error
/// function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `sample` and the
/// standard normal: sup over the sorted points of
/// max(i/n − Φ(x_i), Φ(x_i) − (i−1)/n).
pub fn ks_distance_to_normal(sample: &[f64]) -> f64 {
    assert!(!sample.is_empty(), "KS distance needs a nonempty sample");
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut sup = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let phi = normal_cdf(x);
        let above = (i + 1) as f64 / n - phi;
        let below = phi - i as f64 / n;
        sup = sup.max(above).max(below);
    }
    sup
}

/// Least-squares power-law fit through `(r, d)` pairs.
#[derive(Debug, Clone)]
pub struct RateFit {
    pub pairs: Vec<(f64, f64)>,
    /// Slope of log d against log r: the empirical rate exponent.
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
}

/// Fits `log d = slope · log r + intercept` by least squares.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit, StatsError> {
    if pairs.len() < 3 {
        return Err(StatsError::InvalidInput(format!(
            "rate fit needs at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    for &(r, d) in pairs {
        if !(r.is_finite() && r > 0.0 && d.is_finite() && d > 0.0) {
            return Err(StatsError::InvalidInput(format!(
                "rate fit needs positive finite pairs, got ({r}, {d})"
            )));
        }
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    if sxx == 0.0 {
        return Err(StatsError::InvalidInput(
            "rate fit needs at least two distinct r values".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    Ok(RateFit {
        pairs: pairs.to_vec(),
        slope,
        intercept,
        residual_rms: (ss_res / n).sqrt(),
    })
}

/// Unbiased sample covariance of `(V_n, V_{n−1})` estimates after scaling
/// both coordinates by `r^{−(n+m)/2}` — the empirical version of the scaled
/// covariance matrix whose large-`r` limit the analytics module computes.
pub fn empirical_covariance(
    pairs: &[(f64, f64)],
    r: f64,
    n: usize,
    m: usize,
) -> Result<Matrix2<f64>, StatsError> {
    if pairs.len() < 2 {
        return Err(StatsError::InvalidInput(format!(
            "covariance needs at least 2 pairs, got {}",
            pairs.len()
        )));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(StatsError::InvalidInput(format!(
            "window dilation must be positive, got {r}"
        )));
    }
    let count = pairs.len() as f64;
    let mean_a = pairs.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_b = pairs.iter().map(|p| p.1).sum::<f64>() / count;
    let mut saa = 0.0;
    let mut sab = 0.0;
    let mut sbb = 0.0;
    for &(a, b) in pairs {
        let da = a - mean_a;
        let db = b - mean_b;
        saa += da * da;
        sab += da * db;
        sbb += db * db;
    }
    let scale = r.powf(-((n + m) as f64) / 2.0);
    let factor = scale * scale / (count - 1.0);
    Ok(Matrix2::new(
        saa * factor,
        sab * factor,
        sab * factor,
        sbb * factor,
    ))
}
