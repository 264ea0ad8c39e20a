//! Exact finite-window mean and variance of the covered volume.
//!
//! Both start from the hitting functional of the union set: the variance is
//! `e^{−2γm₁} ∫ C_W(x) (e^{γ f̄(x)} − 1) dx`, where `C_W` is the window
//! covariogram and `f̄(x) = E[L^{n−m}(Ξ ∩ (Ξ − Π(Θᵀx)))]` averages the base
//! covariogram over the projected lag. The integral is evaluated exactly
//! (quadrature to tolerance), choosing a reduction that matches the
//! direction law and window:
//!
//! * rotation-invariant directions: the projected lag length is `‖x‖√B`
//!   with `B ~ Beta((n−m)/2, m/2)`, so `f̄` is radial and the window
//!   integral collapses to one dimension for ball windows;
//! * a single direction atom with radial base covariogram and ball window:
//!   split `x` into base and direction components, two nested radial
//!   integrals;
//! * general atomic laws in low dimension: direct tensor quadrature with
//!   the atom sum inside the exponent.

use std::f64::consts::FRAC_PI_2;

use super::quadrature::{adaptive_simpson, box_integral};
use super::special::beta;
use super::AnalyticsError;
use crate::geometry::{covariogram_f, unit_ball_volume, BaseLaw, BaseShape, DirectionLaw, Window};
use crate::sampler::ModelSpec;

/// Expected covered volume in the scaled window:
/// `V_n(W_r) (1 − e^{−γ m₁})`.
pub fn mean_volume(spec: &ModelSpec, window: &Window, r: f64) -> f64 {
    window.volume(spec.n(), r) * spec.coverage_probability()
}

/// Exact variance of the covered volume in the scaled window, to quadrature
/// tolerance `quad_tol` (absolute).
pub fn variance_volume_exact(
    spec: &ModelSpec,
    window: &Window,
    r: f64,
    quad_tol: f64,
) -> Result<f64, AnalyticsError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(AnalyticsError::InvalidInput(format!(
            "window scale must be positive, got {r}"
        )));
    }
    let m1 = spec.mean_base_volume();
    if m1 == 0.0 {
        // Zero-volume bases cover a null set; the volume is a.s. zero.
        return Ok(0.0);
    }
    let gamma = spec.gamma();
    let pref = (-2.0 * gamma * m1).exp();
    let radial = radial_base(spec.bases(), spec.base_dim());
    let integral = match spec.directions() {
        DirectionLaw::Uniform => lag_integral_radial_fbar(spec, window, r, quad_tol)?,
        law => {
            let atoms = law.atoms();
            let ball = matches!(window, Window::Ball { .. });
            if spec.m() == 0 && radial {
                // With point sections the projection is the full rotated lag;
                // a radial covariogram makes the atoms irrelevant.
                lag_integral_radial_fbar(spec, window, r, quad_tol)?
            } else if atoms.len() == 1 && radial && ball && spec.m() >= 1 {
                lag_integral_split_radial(spec, window, r, quad_tol)
            } else if spec.n() <= 2 {
                lag_integral_box(spec, window, r, quad_tol)
            } else {
                return Err(AnalyticsError::Unsupported(format!(
                    "exact variance for atomic directions needs n <= 2, or a \
                     single atom with radial base covariogram and ball window \
                     (n={}, m={}, atoms={}, window={:?})",
                    spec.n(),
                    spec.m(),
                    atoms.len(),
                    window
                )));
            }
        }
    };
    Ok(pref * integral)
}

/// Whether the law-averaged base covariogram is a function of the lag
/// length alone. True for ball bases and for every one-dimensional base
/// (covariograms are even).
pub(crate) fn radial_base(law: &BaseLaw, dim: usize) -> bool {
    dim == 1 || matches!(law.prototype(), BaseShape::Ball { .. })
}

/// Spherical average of the mean base covariogram at lag length `t`.
/// Radial covariograms are returned directly; planar box bases are averaged
/// over one quadrant (their covariograms have axis reflection symmetry).
fn sphere_profile(law: &BaseLaw, dim: usize, t: f64, tol: f64) -> Result<f64, AnalyticsError> {
    if radial_base(law, dim) {
        let mut z = vec![0.0; dim];
        z[0] = t;
        return Ok(covariogram_f(law, dim, &z, None));
    }
    match dim {
        2 => {
            let f = |phi: f64| covariogram_f(law, 2, &[t * phi.cos(), t * phi.sin()], None);
            Ok(adaptive_simpson(&f, 0.0, FRAC_PI_2, tol, 30) / FRAC_PI_2)
        }
        _ => Err(AnalyticsError::Unsupported(format!(
            "spherical covariogram average needs a radial base or base \
             dimension 2, got dimension {dim}"
        ))),
    }
}

/// `f̄` at lag length `s` under rotation-invariant directions: the projected
/// lag length is `s·sin ψ` with density `∝ sin^{d−1}ψ cos^{m−1}ψ` on
/// `[0, π/2]` (the Beta(d/2, m/2) law of the squared projection fraction).
pub(crate) fn isotropic_fbar_at(
    law: &BaseLaw,
    n: usize,
    m: usize,
    s: f64,
    tol: f64,
) -> Result<f64, AnalyticsError> {
    let d = n - m;
    if m == 0 {
        return sphere_profile(law, d, s, tol);
    }
    // Support depends only on the law and dimension; probing once lets the
    // quadrature closure unwrap.
    sphere_profile(law, d, 0.0, tol)?;
    let a = d as f64 / 2.0;
    let b = m as f64 / 2.0;
    let g = |psi: f64| {
        let (sin, cos) = psi.sin_cos();
        sphere_profile(law, d, s * sin, tol * 0.1).expect("support probed above")
            * sin.powf(2.0 * a - 1.0)
            * cos.powf(2.0 * b - 1.0)
    };
    Ok(2.0 / beta(a, b) * adaptive_simpson(&g, 0.0, FRAC_PI_2, tol, 30))
}

/// Lag integral whenever `f̄` is radial (rotation-invariant directions, or
/// point sections with a radial base covariogram): ball windows reduce to a
/// single radial integral, cube windows (n ≤ 2) to a box integral with a
/// radial exponent.
fn lag_integral_radial_fbar(
    spec: &ModelSpec,
    window: &Window,
    r: f64,
    quad_tol: f64,
) -> Result<f64, AnalyticsError> {
    let n = spec.n();
    let m = spec.m();
    let gamma = spec.gamma();
    // Probe once so unsupported bases error out before quadrature starts.
    isotropic_fbar_at(spec.bases(), n, m, 0.0, quad_tol)?;
    let fbar = |s: f64| {
        isotropic_fbar_at(spec.bases(), n, m, s, quad_tol * 1e-2).expect("support checked above")
    };
    match window {
        Window::Ball { .. } => {
            let mut smax = window.diameter(n, r);
            if m == 0 {
                // The exponent vanishes beyond the base diameter.
                smax = smax.min(spec.bases().max_diameter());
            }
            let g = |s: f64| {
                window.covariogram_radial(n, r, s)
                    * (gamma * fbar(s)).exp_m1()
                    * s.powi(n as i32 - 1)
            };
            Ok(n as f64 * unit_ball_volume(n) * adaptive_simpson(&g, 0.0, smax, quad_tol, 40))
        }
        Window::Cube { side } => {
            if n > 2 {
                return Err(AnalyticsError::Unsupported(
                    "cube-window exact variance needs n <= 2".into(),
                ));
            }
            let half = side * r;
            let f = |x: &[f64]| {
                let cw = window.covariogram(n, r, x);
                if cw == 0.0 {
                    return 0.0;
                }
                let s = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                cw * (gamma * fbar(s)).exp_m1()
            };
            Ok(box_integral(
                &f,
                &vec![-half; n],
                &vec![half; n],
                quad_tol,
                40,
            ))
        }
    }
}

/// Lag integral for one direction atom, radial base covariogram, ball
/// window: with `x = ρ(u, v)` the exponent depends on `t = ‖u‖` only and
/// the window covariogram on `√(t² + q²)`, `q = ‖v‖`, giving two nested
/// radial integrals.
fn lag_integral_split_radial(spec: &ModelSpec, window: &Window, r: f64, quad_tol: f64) -> f64 {
    let n = spec.n();
    let m = spec.m();
    let d = n - m;
    let gamma = spec.gamma();
    let smax = window.diameter(n, r);
    let tmax = smax.min(spec.bases().max_diameter());
    let f_rad = |t: f64| {
        let mut z = vec![0.0; d];
        z[0] = t;
        covariogram_f(spec.bases(), d, &z, None)
    };
    let shell = |t: f64| {
        let qmax = (smax * smax - t * t).max(0.0).sqrt();
        let g =
            |q: f64| window.covariogram_radial(n, r, (t * t + q * q).sqrt()) * q.powi(m as i32 - 1);
        m as f64 * unit_ball_volume(m) * adaptive_simpson(&g, 0.0, qmax, quad_tol * 1e-2, 36)
    };
    let outer = |t: f64| t.powi(d as i32 - 1) * (gamma * f_rad(t)).exp_m1() * shell(t);
    d as f64 * unit_ball_volume(d) * adaptive_simpson(&outer, 0.0, tmax, quad_tol, 36)
}

/// Direct box quadrature of the lag integral for atomic direction laws,
/// `n ≤ 2`. The atom sum sits inside the exponent: distinct atoms interact
/// through the same exponential, they do not add variances.
fn lag_integral_box(spec: &ModelSpec, window: &Window, r: f64, quad_tol: f64) -> f64 {
    let n = spec.n();
    let d = spec.base_dim();
    let gamma = spec.gamma();
    let atoms = spec.directions().atoms();
    let half = match window {
        Window::Ball { .. } => window.diameter(n, r),
        Window::Cube { side } => side * r,
    };
    let f = |x: &[f64]| {
        let cw = window.covariogram(n, r, x);
        if cw == 0.0 {
            return 0.0;
        }
        let mut u = vec![0.0; d];
        let mut fbar = 0.0;
        for (frame, p) in &atoms {
            frame.project_base(x, &mut u);
            fbar += p * covariogram_f(spec.bases(), d, &u, None);
        }
        cw * (gamma * fbar).exp_m1()
    };
    box_integral(&f, &vec![-half; n], &vec![half; n], quad_tol, 40)
}
