//! Small special-function kit: Lambert W (principal branch on [0, ∞)),
//! the Euler beta function, and the standard normal CDF.

use super::AnalyticsError;

/// Principal-branch Lambert W on `[0, ∞)`: the solution of `w·e^w = x`.
/// Bisection bracket followed by Newton polish; relative error ≤ 1e−14.
pub fn lambert_w(x: f64) -> Result<f64, AnalyticsError> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(AnalyticsError::InvalidInput(format!(
            "lambert_w requires x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    // w e^w is increasing on [0, ∞); bracket [0, hi] with hi e^{hi} ≥ x.
    let mut lo = 0.0f64;
    let mut hi = 1.0f64.max(x.ln().max(1.0));
    while hi * hi.exp() < x {
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid * mid.exp() < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut w = 0.5 * (lo + hi);
    for _ in 0..4 {
        // Newton on h(w) = w e^w − x, h'(w) = (1 + w) e^w.
        let ew = w.exp();
        w -= (w * ew - x) / ((1.0 + w) * ew);
    }
    Ok(w)
}

/// Euler beta function `B(a, b)`.
pub fn beta(a: f64, b: f64) -> f64 {
    libm::tgamma(a) * libm::tgamma(b) / libm::tgamma(a + b)
}

/// Standard normal CDF via erf.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambert_w_fixed_points() {
        assert_eq!(lambert_w(0.0).unwrap(), 0.0);
        let w = lambert_w(std::f64::consts::E).unwrap();
        assert!((w - 1.0).abs() < 1e-14);
        // Defining identity at assorted abscissae.
        for x in [1e-6, 0.1, 0.5, 1.0, 3.0, 10.0, 1e4] {
            let w = lambert_w(x).unwrap();
            assert!(
                (w * w.exp() - x).abs() <= 1e-14 * x.max(1.0),
                "x={x}, w={w}"
            );
        }
        assert!(lambert_w(-0.1).is_err());
    }

    #[test]
    fn lambert_w_at_inverse_sqrt_e() {
        // Root of w e^w = e^{−1/2}; downstream critical-intensity analysis
        // depends on this value.
        let w = lambert_w((-0.5f64).exp()).unwrap();
        assert!((w - 0.4046738485).abs() < 1e-9, "{w}");
    }

    #[test]
    fn beta_against_factorials() {
        // B(a,b) = (a−1)!(b−1)!/(a+b−1)! on integers.
        assert!((beta(3.0, 2.0) - (2.0 * 1.0 / 24.0)).abs() < 1e-14);
        // B(1/2, 1/2) = π.
        assert!((beta(0.5, 0.5) - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.0) - 0.8413447460685429).abs() < 1e-12);
        assert!((normal_cdf(-1.0) - 0.15865525393145707).abs() < 1e-12);
    }
}
