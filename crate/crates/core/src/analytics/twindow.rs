//! The window functional `T(W,θ) = ∫ L^m(H(y,θ) ∩ W)² dy` over base
//! translations — the universal window factor of every asymptotic variance
//! constant — together with the chord-power integral it reduces to for
//! rotation-invariant directions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::quadrature::{adaptive_simpson, box_integral};
use super::AnalyticsError;
use crate::geometry::{unit_ball_volume, Frame, Window};

/// Direction argument of `T(W,θ)`: a concrete frame or the Haar average.
#[derive(Debug, Clone, Copy)]
pub enum TDirection<'a> {
    Uniform,
    Fixed(&'a Frame),
}

/// `T(W_r, θ)`, closed-form for ball windows (θ-independent there) and by
/// quadrature for cube windows with `m ≤ 1`. Scales as `r^{n+m}`.
pub fn t_window(
    window: &Window,
    n: usize,
    m: usize,
    r: f64,
    direction: TDirection<'_>,
    quad_tol: f64,
) -> Result<f64, AnalyticsError> {
    if m >= n {
        return Err(AnalyticsError::InvalidInput(format!(
            "flat dimension m={m} must be below n={n}"
        )));
    }
    if m == 0 {
        // Sections are points; the squared 0-measure is an indicator and the
        // integral collapses to the window volume.
        return Ok(window.volume(n, r));
    }
    match window {
        Window::Ball { radius } => Ok(t_ball_closed(n, m, r * radius)),
        Window::Cube { .. } => match direction {
            TDirection::Fixed(frame) => {
                if frame.n() != n || frame.m() != m {
                    return Err(AnalyticsError::InvalidInput(format!(
                        "frame is ({}, {}), requested ({n}, {m})",
                        frame.n(),
                        frame.m()
                    )));
                }
                t_cube_fixed(window, frame, r, quad_tol)
            }
            TDirection::Uniform => Err(AnalyticsError::Unsupported(
                "Haar-averaged T over cube windows: use t_window_cube_uniform_mc".into(),
            )),
        },
    }
}

/// Closed form for the unit-ball window scaled to radius `R`:
/// `m! π^{−m} κ_m² κ_{n+m} R^{n+m}`, independent of the direction.
pub fn t_ball_closed(n: usize, m: usize, radius: f64) -> f64 {
    let mut fact = 1.0;
    for k in 2..=m {
        fact *= k as f64;
    }
    let km = unit_ball_volume(m);
    fact * std::f64::consts::PI.powi(-(m as i32))
        * km
        * km
        * unit_ball_volume(n + m)
        * radius.powi((n + m) as i32)
}

/// Independent evaluation path for the ball window: radial integral
/// `(n−m) κ_{n−m} κ_m² ∫₀¹ (1−ρ²)^m ρ^{n−m−1} dρ`, scaled to radius `R`.
pub fn t_ball_quadrature(n: usize, m: usize, radius: f64, quad_tol: f64) -> f64 {
    let d = n - m;
    let km = unit_ball_volume(m);
    let integrand = |rho: f64| (1.0 - rho * rho).powi(m as i32) * rho.powi(d as i32 - 1);
    let integral = adaptive_simpson(&integrand, 0.0, 1.0, quad_tol, 48);
    d as f64 * unit_ball_volume(d) * km * km * integral * radius.powi((n + m) as i32)
}

fn t_cube_fixed(
    window: &Window,
    frame: &Frame,
    r: f64,
    quad_tol: f64,
) -> Result<f64, AnalyticsError> {
    let n = frame.n();
    let m = frame.m();
    if m != 1 {
        return Err(AnalyticsError::Unsupported(format!(
            "cube-window T implemented for line flats only (m = 1), got m = {m}"
        )));
    }
    let d = n - m;
    if d > 2 {
        return Err(AnalyticsError::Unsupported(format!(
            "cube-window T supports base dimension <= 2, got {d}"
        )));
    }
    let side = match window {
        Window::Cube { side } => side * r,
        Window::Ball { .. } => unreachable!(),
    };
    let h = 0.5 * side;
    // Lines offset outside the window circumradius miss the cube.
    let c = h * (n as f64).sqrt();
    let axis: Vec<f64> = frame.column(n - 1).to_vec();
    let integrand = |y: &[f64]| {
        let p = frame.embed_base(y);
        let chord = cube_chord_length(h, &p, &axis);
        chord * chord
    };
    Ok(box_integral(
        &integrand,
        &vec![-c; d],
        &vec![c; d],
        quad_tol,
        44,
    ))
}

/// Haar-averaged `T` over a cube window by rotation sampling; returns the
/// sample mean and its standard error.
pub fn t_window_cube_uniform_mc(
    window: &Window,
    n: usize,
    m: usize,
    r: f64,
    samples: usize,
    seed: u64,
    quad_tol: f64,
) -> Result<(f64, f64), AnalyticsError> {
    if samples < 2 {
        return Err(AnalyticsError::InvalidInput(
            "need at least 2 rotation samples".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let frame = Frame::sample_uniform(n, m, &mut rng);
        values.push(t_window(
            window,
            n,
            m,
            r,
            TDirection::Fixed(&frame),
            quad_tol,
        )?);
    }
    let mean = values.iter().sum::<f64>() / samples as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples as f64 - 1.0);
    Ok((mean, (var / samples as f64).sqrt()))
}

/// Length of the chord of the cube `[−h, h]^n` cut by the line through `p`
/// with unit direction `v` (slab clipping).
pub(crate) fn cube_chord_length(h: f64, p: &[f64], v: &[f64]) -> f64 {
    let mut tmin = f64::NEG_INFINITY;
    let mut tmax = f64::INFINITY;
    for (pi, vi) in p.iter().zip(v) {
        if vi.abs() < 1e-14 {
            if pi.abs() > h {
                return 0.0;
            }
            continue;
        }
        let t1 = (-h - pi) / vi;
        let t2 = (h - pi) / vi;
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        tmin = tmin.max(lo);
        tmax = tmax.min(hi);
    }
    (tmax - tmin).max(0.0)
}

/// The `(m+1)`st chord-power integral `I_{m+1}(W_r)`, via its relation to
/// the Haar-averaged `T`: `I_{m+1} = ((m+1)/κ_m) · T`. Ball windows only;
/// cube windows go through the energy-form Monte Carlo.
pub fn chord_power_integral(
    window: &Window,
    n: usize,
    m: usize,
    r: f64,
) -> Result<f64, AnalyticsError> {
    if m == 0 || m >= n {
        return Err(AnalyticsError::InvalidInput(format!(
            "chord-power integral needs 1 <= m < n, got m={m}, n={n}"
        )));
    }
    match window {
        Window::Ball { radius } => {
            Ok((m as f64 + 1.0) / unit_ball_volume(m) * t_ball_closed(n, m, r * radius))
        }
        Window::Cube { .. } => Err(AnalyticsError::Unsupported(
            "cube windows: evaluate via chord_power_energy_mc".into(),
        )),
    }
}

/// `(n−m)`-energy representation of the chord-power integral,
/// `I_{m+1}(W) = m(m+1)/(n κ_n) ∫_W ∫_W ‖x−y‖^{m−n}`, by importance-sampled
/// Monte Carlo. The singular kernel is absorbed into the proposal density
/// (radius `D·U^{1/m}`), leaving the bounded window covariogram as the
/// integrand, so the estimator has finite variance. Returns (value, se).
pub fn chord_power_energy_mc(
    window: &Window,
    n: usize,
    m: usize,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64), AnalyticsError> {
    if m == 0 || m >= n {
        return Err(AnalyticsError::InvalidInput(format!(
            "energy form needs 1 <= m < n, got m={m}, n={n}"
        )));
    }
    if samples < 2 {
        return Err(AnalyticsError::InvalidInput(
            "need at least 2 samples".into(),
        ));
    }
    let diam = window.diameter(n, r);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut u = vec![0.0; n];
    for _ in 0..samples {
        // Direction uniform on the sphere, radius with density ∝ t^{m−1}.
        let mut norm = 0.0;
        for ui in u.iter_mut() {
            *ui = rng.sample::<f64, _>(StandardNormal);
            norm += *ui * *ui;
        }
        let norm = norm.sqrt();
        let t = diam * rng.random::<f64>().powf(1.0 / m as f64);
        let scale = if norm > 0.0 { t / norm } else { 0.0 };
        u.iter_mut().for_each(|v| *v *= scale);
        let c = window.covariogram(n, r, &u);
        sum += c;
        sum_sq += c * c;
    }
    let ns = samples as f64;
    let mean = sum / ns;
    let var = (sum_sq - ns * mean * mean).max(0.0) / (ns - 1.0);
    let prefactor = (m as f64 + 1.0) * diam.powi(m as i32);
    Ok((prefactor * mean, prefactor * (var / ns).sqrt()))
}
