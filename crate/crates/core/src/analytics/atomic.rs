//! Degenerate surface variance for interval bases over finitely many
//! directions: the closed-form constant, the critical-weight curve
//! p(γ) = (1 + 4ℓγ − e^{ℓγ}) / (1 + e^{ℓγ}), and the intensity γ* at which
//! the constant vanishes for equal weights.

use super::special::lambert_w;
use super::twindow::{t_window, TDirection};
use super::AnalyticsError;
use crate::geometry::{Frame, Window};

/// Everything the interval-base example produces: the critical-weight curve
/// evaluated where it matters, the per-direction chord-power integrals, and
/// the degenerate intensity if one exists.
#[derive(Debug, Clone)]
pub struct AtomicExampleReport {
    /// Base interval length ℓ = a + b.
    pub ell: f64,
    /// Direction atom weights, in input order.
    pub weights: Vec<f64>,
    /// Chord-power integrals T(W, ρ_i) of the unit window, in input order.
    pub t_values: Vec<f64>,
    /// Argmax of the critical-weight curve: M = (1 + 2 W(1/√e)) / (2ℓ).
    pub m_max: f64,
    /// p(M), the largest critical weight reachable; ≈ 0.6187 for every ℓ.
    pub p_at_m: f64,
    /// Root of p(γ) = 1/|I| in [0, M], when 1/|I| ≤ p(M).
    pub gamma_star: Option<f64>,
    /// The surface variance constant evaluated at `gamma_star`.
    pub v_at_gamma_star: Option<f64>,
}

impl AtomicExampleReport {
    /// Critical-weight curve p(γ): atoms of this weight make the per-atom
    /// bracket of the surface constant vanish at intensity γ.
    pub fn critical_weight(&self, gamma: f64) -> f64 {
        critical_weight(self.ell, gamma)
    }

    /// The closed-form surface variance constant
    /// (γ/2) e^{−2ℓγ} Σ_i T(W, ρ_i) (e^{ℓγ}(1 + p_i) + p_i − 4ℓγ − 1).
    pub fn surface_constant(&self, gamma: f64) -> f64 {
        let ell = self.ell;
        let e = (ell * gamma).exp();
        let sum: f64 = self
            .weights
            .iter()
            .zip(&self.t_values)
            .map(|(p, t)| t * (e * (1.0 + p) + p - 4.0 * ell * gamma - 1.0))
            .sum();
        0.5 * gamma * (-2.0 * ell * gamma).exp() * sum
    }
}

pub fn critical_weight(ell: f64, gamma: f64) -> f64 {
    let e = (ell * gamma).exp();
    (1.0 + 4.0 * ell * gamma - e) / (1.0 + e)
}

fn critical_weight_derivative(ell: f64, gamma: f64) -> f64 {
    let e = (ell * gamma).exp();
    let num = (4.0 - e) * (1.0 + e) - (1.0 + 4.0 * ell * gamma - e) * e;
    ell * num / ((1.0 + e) * (1.0 + e))
}

/// Builds the interval-base report: bases are the interval [−a, b] embedded
/// in the one-dimensional base space of each direction frame.
pub fn atomic_example(
    a: f64,
    b: f64,
    atoms: &[(Frame, f64)],
    window: &Window,
    quad_tol: f64,
) -> Result<AtomicExampleReport, AnalyticsError> {
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
        return Err(AnalyticsError::InvalidInput(format!(
            "interval endpoints must be positive, got a={a}, b={b}"
        )));
    }
    if atoms.is_empty() {
        return Err(AnalyticsError::InvalidInput(
            "at least one direction atom is required".into(),
        ));
    }
    let (n, m) = (atoms[0].0.n(), atoms[0].0.m());
    if n - m != 1 {
        return Err(AnalyticsError::InvalidInput(format!(
            "interval bases need a one-dimensional base space, got n={n}, m={m}"
        )));
    }
    let mut weight_sum = 0.0;
    for (frame, weight) in atoms {
        if frame.n() != n || frame.m() != m {
            return Err(AnalyticsError::InvalidInput(
                "direction atoms must share one frame shape".into(),
            ));
        }
        if !(weight.is_finite() && *weight > 0.0) {
            return Err(AnalyticsError::InvalidInput(format!(
                "atom weights must be positive, got {weight}"
            )));
        }
        weight_sum += weight;
    }
    if (weight_sum - 1.0).abs() > 1e-9 {
        return Err(AnalyticsError::InvalidInput(format!(
            "atom weights must sum to one, got {weight_sum}"
        )));
    }

    let ell = a + b;
    let weights: Vec<f64> = atoms.iter().map(|(_, w)| *w).collect();
    let mut t_values = Vec::with_capacity(atoms.len());
    for (frame, _) in atoms {
        t_values.push(t_window(
            window,
            n,
            m,
            1.0,
            TDirection::Fixed(frame),
            quad_tol,
        )?);
    }

    let w = lambert_w((-0.5_f64).exp())?;
    let m_max = (1.0 + 2.0 * w) / (2.0 * ell);
    let p_at_m = critical_weight(ell, m_max);

    let target = 1.0 / atoms.len() as f64;
    let gamma_star = if target <= p_at_m {
        Some(solve_critical_intensity(ell, target, m_max))
    } else {
        // p never climbs to 1/|I|: no degenerate intensity exists.
        None
    };

    let report = AtomicExampleReport {
        ell,
        weights,
        t_values,
        m_max,
        p_at_m,
        gamma_star,
        v_at_gamma_star: None,
    };
    let v_at_gamma_star = gamma_star.map(|g| report.surface_constant(g));
    if let Some(v) = v_at_gamma_star {
        let equal_weights = report.weights.iter().all(|p| (p - target).abs() <= 1e-12);
        let equal_t = report
            .t_values
            .iter()
            .all(|t| (t - report.t_values[0]).abs() <= 1e-9 * report.t_values[0].abs());
        debug_assert!(
            !(equal_weights && equal_t) || v.abs() <= 1e-10 * (1.0 + report.t_values[0].abs()),
            "equal weights must make the constant vanish at gamma_star, got {v}"
        );
    }
    Ok(AtomicExampleReport {
        v_at_gamma_star,
        ..report
    })
}

/// Root of p(γ) = target on [0, M]: p is strictly increasing there, so a
/// sign change brackets exactly one root. Bisection narrows the bracket to
/// 1e−12, then three Newton steps polish it.
fn solve_critical_intensity(ell: f64, target: f64, m_max: f64) -> f64 {
    let h = |g: f64| critical_weight(ell, g) - target;
    let (mut lo, mut hi) = (0.0_f64, m_max);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut g = 0.5 * (lo + hi);
    for _ in 0..3 {
        let slope = critical_weight_derivative(ell, g);
        if slope.abs() < 1e-300 {
            break;
        }
        g = (g - h(g) / slope).clamp(lo - 1e-9, hi + 1e-9);
    }
    g
}
