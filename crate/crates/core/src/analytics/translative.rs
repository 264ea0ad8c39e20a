//! Translative integral identity for cylinder volumes: integrating the
//! volume of one cylinder clipped to a window over all base translations
//! recovers the product of the base volume and the window volume,
//!
//!   ∫ L^n( Z(x, θ, X) ∩ W_r ) dx = V_{n−m}(X) · V_n(W_r),
//!
//! independently of the direction frame θ. The left side is evaluated
//! numerically: the inner clipped volume by Monte Carlo with one common
//! probe set, the outer translation integral by a fixed midpoint lattice.
//! Sharing the probes across all translations makes the probe noise cancel
//! structurally — each probe contributes its own full lattice sum — so the
//! residual error is pure grid error.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::AnalyticsError;
use crate::geometry::{BaseShape, Frame, Window};

#[derive(Debug, Clone, Copy)]
pub struct TranslativeCheck {
    /// Quadrature value of the translation integral.
    pub lhs: f64,
    /// Closed-form product V_{n−m}(X) · V_n(W_r).
    pub rhs: f64,
}

pub fn translative_check(
    base: &BaseShape,
    frame: &Frame,
    window: &Window,
    r: f64,
    probes: usize,
    grid_step: f64,
    seed: u64,
) -> Result<TranslativeCheck, AnalyticsError> {
    let (n, d) = (frame.n(), frame.base_dim());
    window
        .validate()
        .map_err(|e| AnalyticsError::InvalidInput(e.to_string()))?;
    base.validate(d)
        .map_err(|e| AnalyticsError::InvalidInput(e.to_string()))?;
    if !(r.is_finite() && r > 0.0) {
        return Err(AnalyticsError::InvalidInput(format!(
            "window dilation must be positive, got {r}"
        )));
    }
    if probes == 0 {
        return Err(AnalyticsError::InvalidInput(
            "at least one probe is required".into(),
        ));
    }
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(AnalyticsError::InvalidInput(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    if d > 2 {
        return Err(AnalyticsError::Unsupported(format!(
            "translation lattices in base dimension {d}"
        )));
    }

    let rhs = base.volume(d) * window.volume(n, r);

    // Project the common probes into the base space of the frame.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut projections = vec![0.0_f64; probes * d];
    for p in 0..probes {
        let y = window.sample_point(n, r, &mut rng);
        frame.project_base(&y, &mut projections[p * d..(p + 1) * d]);
    }

    // One global midpoint lattice covering every translated copy of X keeps
    // the per-probe lattice sums alignment-consistent.
    let reach = base.circumradius_origin() + grid_step;
    let mut lo = vec![f64::INFINITY; d];
    for p in 0..probes {
        for i in 0..d {
            lo[i] = lo[i].min(projections[p * d + i] - reach);
        }
    }

    let h = grid_step;
    let mut lattice_sum = 0.0_f64;
    let mut cell = [0.0_f64; 2];
    let mut shift = [0.0_f64; 2];
    for p in 0..probes {
        let u = &projections[p * d..(p + 1) * d];
        // Index bounds of cells that could meet u − X.
        let mut first = [0_i64; 2];
        let mut last = [0_i64; 2];
        for i in 0..d {
            first[i] = ((u[i] - reach - lo[i]) / h).floor() as i64;
            last[i] = ((u[i] + reach - lo[i]) / h).ceil() as i64;
        }
        let mut count = 0_u64;
        match d {
            1 => {
                for k in first[0]..=last[0] {
                    cell[0] = lo[0] + (k as f64 + 0.5) * h;
                    shift[0] = u[0] - cell[0];
                    if base.contains(&shift[..1]) {
                        count += 1;
                    }
                }
            }
            _ => {
                for k0 in first[0]..=last[0] {
                    cell[0] = lo[0] + (k0 as f64 + 0.5) * h;
                    shift[0] = u[0] - cell[0];
                    for k1 in first[1]..=last[1] {
                        cell[1] = lo[1] + (k1 as f64 + 0.5) * h;
                        shift[1] = u[1] - cell[1];
                        if base.contains(&shift[..2]) {
                            count += 1;
                        }
                    }
                }
            }
        }
        lattice_sum += count as f64;
    }

    let lhs = window.volume(n, r) / probes as f64 * h.powi(d as i32) * lattice_sum;
    Ok(TranslativeCheck { lhs, rhs })
}
