use super::{unit_ball_volume, BaseLaw, BaseShape, DilationFactor};
use crate::analytics::quadrature::{adaptive_simpson, gauss_legendre};

/// Set covariogram of a single shape: `L^dim(Ξ ∩ (Ξ + z))`. Symmetric in
/// `z`, equal to the volume at `z = 0`, and zero beyond the diameter.
pub fn shape_covariogram(shape: &BaseShape, dim: usize, z: &[f64]) -> f64 {
    debug_assert_eq!(z.len(), dim);
    match shape {
        BaseShape::Point => 0.0,
        BaseShape::Interval { a, b } => {
            let ell = a + b;
            (ell - z[0].abs()).max(0.0)
        }
        BaseShape::Box { half_widths } => z
            .iter()
            .zip(half_widths)
            .map(|(zi, h)| (2.0 * h - zi.abs()).max(0.0))
            .product(),
        BaseShape::Ball { radius } => {
            let t = norm(z);
            ball_covariogram(dim, *radius, t)
        }
    }
}

/// Lens volume of two `dim`-balls of radius `radius` at center distance `t`.
fn ball_covariogram(dim: usize, radius: f64, t: f64) -> f64 {
    super::window::ball_self_covariogram(dim, radius, t)
}

/// Boundary covariogram of a single shape: `H^{dim−1}(∂Ξ ∩ (Ξ − z))`.
///
/// Discontinuous at `z = 0`, where the whole boundary is covered; for
/// `0 < ‖z‖ ≤ diam` only the "trailing" part of the boundary remains. For a
/// degenerate box (zero half-width) the boundary is the set itself.
pub fn shape_boundary_covariogram(shape: &BaseShape, dim: usize, z: &[f64]) -> f64 {
    debug_assert_eq!(z.len(), dim);
    match shape {
        BaseShape::Point => {
            if dim == 1 && z[0] == 0.0 {
                1.0
            } else {
                0.0
            }
        }
        BaseShape::Interval { a, b } => {
            let ell = a + b;
            let t = z[0];
            if t == 0.0 {
                2.0
            } else if t.abs() <= ell {
                1.0
            } else {
                0.0
            }
        }
        BaseShape::Box { half_widths } => box_boundary_covariogram(half_widths, z),
        BaseShape::Ball { radius } => {
            let t = norm(z);
            ball_boundary_covariogram(dim, *radius, t)
        }
    }
}

fn box_boundary_covariogram(half_widths: &[f64], z: &[f64]) -> f64 {
    if let Some(flat) = half_widths.iter().position(|&h| h == 0.0) {
        // Degenerate box: ∂Ξ = Ξ; the overlap is the (dim−1)-dimensional
        // box covariogram in the remaining coordinates, present only when
        // the flat coordinate of the shift vanishes.
        if z[flat] != 0.0 {
            return 0.0;
        }
        return half_widths
            .iter()
            .zip(z)
            .enumerate()
            .filter(|(i, _)| *i != flat)
            .map(|(_, (h, zi))| (2.0 * h - zi.abs()).max(0.0))
            .product();
    }
    let mut total = 0.0;
    for i in 0..half_widths.len() {
        let cross: f64 = half_widths
            .iter()
            .zip(z)
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (h, zj))| (2.0 * h - zj.abs()).max(0.0))
            .product();
        // The face at +h_i survives for z_i ∈ [0, 2h_i], the face at −h_i
        // for z_i ∈ [−2h_i, 0]; both count at z_i = 0.
        let zi = z[i];
        let faces = if zi == 0.0 {
            2.0
        } else if zi.abs() <= 2.0 * half_widths[i] {
            1.0
        } else {
            0.0
        };
        total += faces * cross;
    }
    total
}

fn ball_boundary_covariogram(dim: usize, radius: f64, t: f64) -> f64 {
    if t > 2.0 * radius {
        return 0.0;
    }
    if t == 0.0 {
        return dim as f64 * unit_ball_volume(dim) * radius.powi(dim as i32 - 1);
    }
    match dim {
        1 => 1.0,
        2 => 2.0 * radius * (t / (2.0 * radius)).acos(),
        3 => 2.0 * std::f64::consts::PI * radius * radius * (1.0 - t / (2.0 * radius)),
        _ => {
            // Spherical cap beyond polar angle α₀ = π − arccos(t / 2R):
            // ω_{dim−1} R^{dim−1} ∫_{α₀}^{π} sin^{dim−2} α dα.
            let alpha0 = std::f64::consts::PI - (t / (2.0 * radius)).acos();
            let omega = (dim as f64 - 1.0) * unit_ball_volume(dim - 1);
            let f = |a: f64| a.sin().powi(dim as i32 - 2);
            omega
                * radius.powi(dim as i32 - 1)
                * adaptive_simpson(&f, alpha0, std::f64::consts::PI, 1e-12, 40)
        }
    }
}

/// Mean covariogram of the base law at lag `z`:
/// `E[L^dim(Ξ ∩ (Ξ + z))]`, optionally multiplied by a direction-atom
/// weight. Base and direction marks are independent (product law), so the
/// jointly filtered covariogram factorizes as `weight · E[L^dim(Ξ ∩ (Ξ+z))]`.
pub fn covariogram_f(law: &BaseLaw, dim: usize, z: &[f64], atom_weight: Option<f64>) -> f64 {
    atom_weight.unwrap_or(1.0) * law_expect(law, |shape| shape_covariogram(shape, dim, z))
}

/// Mean boundary covariogram of the base law at lag `z`:
/// `E[H^{dim−1}(∂Ξ ∩ (Ξ − z))]`, optionally weighted by a direction atom.
pub fn covariogram_g(law: &BaseLaw, dim: usize, z: &[f64], atom_weight: Option<f64>) -> f64 {
    atom_weight.unwrap_or(1.0) * law_expect(law, |shape| shape_boundary_covariogram(shape, dim, z))
}

/// Expectation over the base law of a shape functional, by fixed-order
/// Gauss–Legendre in the dilation factor. The integrand is only piecewise
/// smooth in `R` (covariograms kink where the shifted copies detach), so a
/// single 64-node panel is accurate to roughly 1e-5 — well inside the
/// percent-level tolerances used downstream.
fn law_expect(law: &BaseLaw, eval: impl Fn(&BaseShape) -> f64) -> f64 {
    match law {
        BaseLaw::Fixed(shape) => eval(shape),
        BaseLaw::Dilation { prototype, factor } => match factor {
            DilationFactor::Constant(c) => eval(&prototype.scaled(*c)),
            DilationFactor::Uniform { lo, hi } => {
                let (nodes, weights) = gauss_legendre(64, *lo, *hi);
                let density = 1.0 / (hi - lo);
                nodes
                    .iter()
                    .zip(&weights)
                    .map(|(r, w)| w * density * eval(&prototype.scaled(*r)))
                    .sum()
            }
        },
    }
}

fn norm(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum::<f64>().sqrt()
}
