//! Large-window limits of the scaled variances and covariance of the volume
//! and boundary functionals of the cylinder union.
//!
//! As the window dilation r grows, `Var[V_n(Z ∩ W_r)] / r^{n+m}` converges to
//! a constant, and likewise for the boundary measure and the covariance of
//! the two. Two branches share the work:
//!
//! * rotation-invariant directions with `m >= 1` collapse to closed moment
//!   expressions of the base law times the mean chord-power integral
//!   `E[T(W, Θ)]` of the unit window;
//! * purely atomic directions — and `m = 0`, where the cylinder is just its
//!   rotated base — need one lag integral over the base space per atom, plus
//!   a boundary pair integral for the surface constant.
//!
//! All constants refer to the unit window (`r = 1`); consumers compare them
//! against empirical variances scaled by `r^{-(n+m)}`.

use std::f64::consts::{FRAC_PI_2, PI};

use super::quadrature::{adaptive_simpson, box_integral, gauss_legendre};
use super::twindow::{t_window, t_window_cube_uniform_mc, TDirection};
use super::variance::radial_base;
use super::AnalyticsError;
use crate::geometry::{
    covariogram_f, covariogram_g, unit_ball_volume, BaseLaw, BaseShape, DilationFactor,
    DirectionLaw, Window,
};
use crate::sampler::ModelSpec;

/// Sample count for rotation-averaging T(W, Θ) over cube windows, where no
/// closed form is available. The seed is fixed so the analytic constants are
/// reproducible; the induced Monte Carlo error is reported alongside them.
const T_MC_SAMPLES: usize = 128;
const T_MC_SEED: u64 = 0x7c9e_6671_u64;

/// How direction-atom weights enter the per-atom covariogram functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AtomConvention {
    /// The per-atom covariograms carry the atom weight (jointly filtered
    /// expectations). This is the convention the exact finite-window
    /// variance converges to, and the default.
    #[default]
    Marginal,
    /// Per-atom covariograms are the bare base-law means; weights appear
    /// only as outer factors of the boundary terms.
    Conditional,
}

fn convention_weight(convention: AtomConvention, weight: f64) -> f64 {
    match convention {
        AtomConvention::Marginal => weight,
        AtomConvention::Conditional => 1.0,
    }
}

/// Scaled asymptotic variance of the volume functional.
pub fn v_volume(
    spec: &ModelSpec,
    window: &Window,
    convention: AtomConvention,
    quad_tol: f64,
) -> Result<f64, AnalyticsError> {
    validate_inputs(window, quad_tol)?;
    let branch = branch(spec, window, quad_tol)?;
    v_volume_with(spec, &branch, convention, quad_tol)
}

/// Scaled asymptotic variance of the boundary (surface) functional.
pub fn v_surface(
    spec: &ModelSpec,
    window: &Window,
    convention: AtomConvention,
    quad_tol: f64,
) -> Result<f64, AnalyticsError> {
    validate_inputs(window, quad_tol)?;
    let branch = branch(spec, window, quad_tol)?;
    v_surface_with(spec, &branch, convention, quad_tol)
}

/// Scaled asymptotic covariance between the volume and boundary functionals.
pub fn cov_volume_surface(
    spec: &ModelSpec,
    window: &Window,
    convention: AtomConvention,
    quad_tol: f64,
) -> Result<f64, AnalyticsError> {
    validate_inputs(window, quad_tol)?;
    let branch = branch(spec, window, quad_tol)?;
    cov_with(spec, &branch, convention, quad_tol)
}

/// Everything the central limit theorems need in one pass: the volume
/// constant (always required), the surface and covariance constants where
/// the base/window combination supports them, and the chord-power integrals
/// that scale all three.
#[derive(Debug, Clone)]
pub struct AsymptoticConstants {
    /// Limit of `r^{-(n+m)} Var[V_n(Z ∩ W_r)]`.
    pub v_volume: f64,
    /// Limit for the boundary functional; `None` when the base/window
    /// combination has no implemented quadrature path.
    pub v_surface: Option<f64>,
    /// Limit of the scaled covariance; `None` as above.
    pub cov_volume_surface: Option<f64>,
    /// Mean chord-power integral `E[T(W, Θ)]` of the unit window.
    pub t_window: f64,
    /// Monte Carlo standard error of `t_window` when rotation averaging over
    /// a cube window required sampling; `None` on exact paths.
    pub t_window_se: Option<f64>,
    /// Direction atom weights (a single `1.0` at `m = 0`; empty for the
    /// rotation-invariant branch).
    pub atom_weights: Vec<f64>,
    /// Per-atom `T(W, ρ_i)` of the unit window, aligned with `atom_weights`.
    pub atom_t: Vec<f64>,
}

pub fn asymptotic_constants(
    spec: &ModelSpec,
    window: &Window,
    convention: AtomConvention,
    quad_tol: f64,
) -> Result<AsymptoticConstants, AnalyticsError> {
    validate_inputs(window, quad_tol)?;
    let branch = branch(spec, window, quad_tol)?;
    let v_volume = v_volume_with(spec, &branch, convention, quad_tol)?;
    let v_surface = optional(v_surface_with(spec, &branch, convention, quad_tol))?;
    let cov = optional(cov_with(spec, &branch, convention, quad_tol))?;
    let (t_window, t_window_se, atom_weights, atom_t) = match branch {
        Branch::Rotation { t_mean, t_se } => (t_mean, t_se, Vec::new(), Vec::new()),
        Branch::Atomic { ref atoms, .. } => {
            let mean = atoms.iter().map(|a| a.weight * a.t).sum();
            let weights = atoms.iter().map(|a| a.weight).collect();
            let ts = atoms.iter().map(|a| a.t).collect();
            (mean, None, weights, ts)
        }
    };
    Ok(AsymptoticConstants {
        v_volume,
        v_surface,
        cov_volume_surface: cov,
        t_window,
        t_window_se,
        atom_weights,
        atom_t,
    })
}

fn optional(result: Result<f64, AnalyticsError>) -> Result<Option<f64>, AnalyticsError> {
    match result {
        Ok(v) => Ok(Some(v)),
        Err(AnalyticsError::Unsupported(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn validate_inputs(window: &Window, quad_tol: f64) -> Result<(), AnalyticsError> {
    window
        .validate()
        .map_err(|e| AnalyticsError::InvalidInput(e.to_string()))?;
    if !(quad_tol.is_finite() && quad_tol > 0.0) {
        return Err(AnalyticsError::InvalidInput(format!(
            "quadrature tolerance must be positive, got {quad_tol}"
        )));
    }
    Ok(())
}

/// Which structural form the constants take.
enum Branch {
    /// Rotation-invariant directions, `m >= 1`: moments times `E[T(W, Θ)]`.
    Rotation { t_mean: f64, t_se: Option<f64> },
    /// Direction atoms, or the trivial single "atom" at `m = 0`.
    Atomic {
        atoms: Vec<AtomTerm>,
        /// `m = 0` with Haar rotations: covariogram profiles are averaged
        /// over the rotation group instead of per-atom.
        rotation_average: bool,
    },
}

struct AtomTerm {
    weight: f64,
    t: f64,
}

fn branch(spec: &ModelSpec, window: &Window, quad_tol: f64) -> Result<Branch, AnalyticsError> {
    let (n, m) = (spec.n(), spec.m());
    if m == 0 {
        // Zero-dimensional axes: the cylinder is its rotated base and the
        // chord-power integral degenerates to the window volume. Rotations
        // survive only inside the averaged covariogram profiles, so atomic
        // rotations need a radial base (for which they are irrelevant).
        let rotation_average = matches!(spec.directions(), DirectionLaw::Uniform);
        if !rotation_average && !radial_base(spec.bases(), n) {
            return Err(AnalyticsError::Unsupported(
                "rotation atoms with a non-radial base at m = 0".into(),
            ));
        }
        return Ok(Branch::Atomic {
            atoms: vec![AtomTerm {
                weight: 1.0,
                t: window.volume(n, 1.0),
            }],
            rotation_average,
        });
    }
    match spec.directions() {
        DirectionLaw::Uniform => {
            let (t_mean, t_se) = match window {
                Window::Ball { .. } => (
                    t_window(window, n, m, 1.0, TDirection::Uniform, quad_tol)?,
                    None,
                ),
                Window::Cube { .. } => {
                    let (t, se) = t_window_cube_uniform_mc(
                        window,
                        n,
                        m,
                        1.0,
                        T_MC_SAMPLES,
                        T_MC_SEED,
                        quad_tol,
                    )?;
                    (t, Some(se))
                }
            };
            Ok(Branch::Rotation { t_mean, t_se })
        }
        law => {
            let mut atoms = Vec::new();
            for (frame, weight) in law.atoms() {
                let t = t_window(window, n, m, 1.0, TDirection::Fixed(frame), quad_tol)?;
                atoms.push(AtomTerm { weight, t });
            }
            Ok(Branch::Atomic {
                atoms,
                rotation_average: false,
            })
        }
    }
}

fn v_volume_with(
    spec: &ModelSpec,
    branch: &Branch,
    convention: AtomConvention,
    quad_tol: f64,
) -> Result<f64, AnalyticsError> {
    let gamma = spec.gamma();
    let d = spec.base_dim();
    let pref = (-2.0 * gamma * spec.mean_base_volume()).exp();
    match branch {
        Branch::Rotation { t_mean, .. } => {
            let m2 = spec.bases().volume_moment(d, 2);
            Ok(gamma * pref * m2 * t_mean)
        }
        Branch::Atomic {
            atoms,
            rotation_average,
        } => {
            let mut total = 0.0;
            for atom in atoms {
                let profiles = Profiles::new(
                    spec.bases(),
                    d,
                    convention_weight(convention, atom.weight),
                    *rotation_average,
                    quad_tol,
                )?;
                total += atom.t * lag_integral(&profiles, LagKind::Volume, gamma, quad_tol)?;
            }
            Ok(pref * total)
        }
    }
}

fn v_surface_with(
    spec: &ModelSpec,
    branch: &Branch,
    convention: AtomConvention,
    quad_tol: f64,
) -> Result<f64, AnalyticsError> {
    let gamma = spec.gamma();
    let d = spec.base_dim();
    let m1 = spec.mean_base_volume();
    let pref = (-2.0 * gamma * m1).exp();
    let s1 = spec.bases().mean_intrinsic(d - 1, d);
    match branch {
        Branch::Rotation { t_mean, .. } => {
            // E[(γ s1 V_d(Ξ) - V_{d-1}(Ξ))^2] expanded in base-law moments.
            let bases = spec.bases();
            let q = gamma * gamma * s1 * s1 * bases.cross_moment(d, d, d)
                - 2.0 * gamma * s1 * bases.cross_moment(d, d - 1, d)
                + bases.cross_moment(d - 1, d - 1, d);
            Ok(gamma * pref * q * t_mean)
        }
        Branch::Atomic {
            atoms,
            rotation_average,
        } => {
            // Bases of full dimension keep a quarter of the boundary pair
            // term; almost-surely flat bases keep all of it.
            let boundary_factor = if m1 == 0.0 { 1.0 } else { 0.25 };
            let mut total = 0.0;
            for atom in atoms {
                let profiles = Profiles::new(
                    spec.bases(),
                    d,
                    convention_weight(convention, atom.weight),
                    *rotation_average,
                    quad_tol,
                )?;
                let lag = lag_integral(&profiles, LagKind::Surface { s1 }, gamma, quad_tol)?;
                let pair = boundary_pair_integral(&profiles, gamma, quad_tol)?;
                total += atom.t * (gamma * lag + boundary_factor * atom.weight * pair);
            }
            Ok(gamma * pref * total)
        }
    }
}

fn cov_with(
    spec: &ModelSpec,
    branch: &Branch,
    convention: AtomConvention,
    quad_tol: f64,
) -> Result<f64, AnalyticsError> {
    let gamma = spec.gamma();
    let d = spec.base_dim();
    let pref = (-2.0 * gamma * spec.mean_base_volume()).exp();
    let s1 = spec.bases().mean_intrinsic(d - 1, d);
    match branch {
        Branch::Rotation { t_mean, .. } => {
            let bases = spec.bases();
            let q = bases.cross_moment(d, d - 1, d) - gamma * s1 * bases.cross_moment(d, d, d);
            Ok(gamma * pref * q * t_mean)
        }
        Branch::Atomic {
            atoms,
            rotation_average,
        } => {
            let mut total = 0.0;
            for atom in atoms {
                let profiles = Profiles::new(
                    spec.bases(),
                    d,
                    convention_weight(convention, atom.weight),
                    *rotation_average,
                    quad_tol,
                )?;
                total += atom.t
                    * lag_integral(&profiles, LagKind::CovVolumeSurface { s1 }, gamma, quad_tol)?;
            }
            Ok(gamma * pref * total)
        }
    }
}

/// Weighted law-mean covariogram pair (f, g) for one direction atom.
/// `radial` marks profiles that depend on the lag length alone — radial base
/// laws, or the rotation-averaged `m = 0` case.
struct Profiles<'a> {
    law: &'a BaseLaw,
    d: usize,
    weight: f64,
    radial: bool,
    rotation_average: bool,
    tol: f64,
}

impl<'a> Profiles<'a> {
    fn new(
        law: &'a BaseLaw,
        d: usize,
        weight: f64,
        rotation_average: bool,
        tol: f64,
    ) -> Result<Self, AnalyticsError> {
        let radial = radial_base(law, d);
        if !radial && rotation_average && d != 2 {
            return Err(AnalyticsError::Unsupported(format!(
                "rotation-averaged covariogram profiles for non-radial bases in dimension {d}"
            )));
        }
        if !radial && !rotation_average && d > 2 {
            return Err(AnalyticsError::Unsupported(format!(
                "lag integrals for non-radial bases in dimension {d}"
            )));
        }
        Ok(Self {
            law,
            d,
            weight,
            radial: radial || rotation_average,
            rotation_average: rotation_average && !radial,
            tol,
        })
    }

    fn f_radial(&self, t: f64) -> f64 {
        if self.rotation_average {
            self.weight * quadrant_average(&|z| covariogram_f(self.law, 2, z, None), t, self.tol)
        } else {
            let mut z = [0.0_f64; crate::geometry::MAX_BASE_DIM];
            z[0] = t;
            covariogram_f(self.law, self.d, &z[..self.d], Some(self.weight))
        }
    }

    fn g_radial(&self, t: f64) -> f64 {
        if self.rotation_average {
            self.weight * quadrant_average(&|z| covariogram_g(self.law, 2, z, None), t, self.tol)
        } else {
            let mut z = [0.0_f64; crate::geometry::MAX_BASE_DIM];
            z[0] = t;
            covariogram_g(self.law, self.d, &z[..self.d], Some(self.weight))
        }
    }

    fn f_at(&self, z: &[f64]) -> f64 {
        if self.radial {
            self.f_radial(norm(z))
        } else {
            covariogram_f(self.law, self.d, z, Some(self.weight))
        }
    }

    fn g_at(&self, z: &[f64]) -> f64 {
        if self.radial {
            self.g_radial(norm(z))
        } else {
            covariogram_g(self.law, self.d, z, Some(self.weight))
        }
    }
}

fn norm(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Planar rotation average. One quadrant suffices: the supported base
/// covariograms are even in each coordinate.
fn quadrant_average(eval: &impl Fn(&[f64]) -> f64, t: f64, tol: f64) -> f64 {
    adaptive_simpson(
        &|phi: f64| eval(&[t * phi.cos(), t * phi.sin()]),
        0.0,
        FRAC_PI_2,
        tol * 1e-2,
        28,
    ) / FRAC_PI_2
}

#[derive(Clone, Copy)]
enum LagKind {
    Volume,
    Surface { s1: f64 },
    CovVolumeSurface { s1: f64 },
}

impl LagKind {
    fn needs_boundary(self) -> bool {
        !matches!(self, LagKind::Volume)
    }

    /// Integrand value from the weighted profile pair at one lag. All
    /// supported base covariograms are even, so g(x) g(-x) = g(x)^2.
    fn value(self, gamma: f64, f: f64, g: f64) -> f64 {
        match self {
            LagKind::Volume => (gamma * f).exp_m1(),
            LagKind::Surface { s1 } => {
                (gamma * f).exp() * (s1 * s1 - s1 * g + 0.25 * g * g) - s1 * s1
            }
            LagKind::CovVolumeSurface { s1 } => s1 - (gamma * f).exp() * (s1 - 0.5 * g),
        }
    }
}

/// Integrates the chosen lag integrand over the base space. All three
/// integrands vanish outside the diameter of the base law's support.
fn lag_integral(
    profiles: &Profiles<'_>,
    kind: LagKind,
    gamma: f64,
    tol: f64,
) -> Result<f64, AnalyticsError> {
    let diam = profiles.law.max_diameter();
    if diam <= 0.0 {
        // Point bases: both covariograms vanish almost everywhere.
        return Ok(0.0);
    }
    // Keep the lower limit off zero: the boundary covariogram jumps there
    // (full boundary measure at lag zero versus roughly half nearby) and the
    // jump point carries no mass.
    let eps = diam * 1e-12;
    if profiles.radial {
        let d = profiles.d;
        let shell = d as f64 * unit_ball_volume(d);
        let integrand = |t: f64| {
            let f = profiles.f_radial(t);
            let g = if kind.needs_boundary() {
                profiles.g_radial(t)
            } else {
                0.0
            };
            kind.value(gamma, f, g) * t.powi(d as i32 - 1)
        };
        Ok(shell * adaptive_simpson(&integrand, eps, diam, tol / shell.max(1.0), 40))
    } else {
        debug_assert_eq!(profiles.d, 2);
        let integrand = |z: &[f64]| {
            let f = profiles.f_at(z);
            let g = if kind.needs_boundary() {
                profiles.g_at(z)
            } else {
                0.0
            };
            kind.value(gamma, f, g)
        };
        Ok(4.0 * box_integral(&integrand, &[eps, eps], &[diam, diam], tol / 4.0, 40))
    }
}

/// Mean over the base law of the double boundary integral of
/// `exp(γ f(y - z))`, `y` and `z` running over the boundary of one
/// realization. This is the same-grain term of the surface chaos expansion,
/// so the law average sits outside the exponential.
fn boundary_pair_integral(
    profiles: &Profiles<'_>,
    gamma: f64,
    tol: f64,
) -> Result<f64, AnalyticsError> {
    match profiles.law {
        BaseLaw::Fixed(shape) => pair_integral_shape(shape, profiles, gamma, tol),
        BaseLaw::Dilation { prototype, factor } => match factor {
            DilationFactor::Constant(c) => {
                pair_integral_shape(&prototype.scaled(*c), profiles, gamma, tol)
            }
            DilationFactor::Uniform { lo, hi } => {
                let (nodes, weights) = gauss_legendre(64, *lo, *hi);
                let mut total = 0.0;
                for (r, w) in nodes.iter().zip(&weights) {
                    total += w * pair_integral_shape(&prototype.scaled(*r), profiles, gamma, tol)?;
                }
                Ok(total / (hi - lo))
            }
        },
    }
}

fn pair_integral_shape(
    shape: &BaseShape,
    profiles: &Profiles<'_>,
    gamma: f64,
    tol: f64,
) -> Result<f64, AnalyticsError> {
    let ex = |f: f64| (gamma * f).exp();
    match shape {
        // The boundary of a point is the point; counting measure in
        // dimension one, empty in higher dimensions.
        BaseShape::Point => Ok(if profiles.d == 1 {
            ex(profiles.f_radial(0.0))
        } else {
            0.0
        }),
        BaseShape::Interval { a, b } => Ok(endpoint_pairs(a + b, profiles, gamma)),
        BaseShape::Ball { radius } => match profiles.d {
            1 => Ok(endpoint_pairs(2.0 * radius, profiles, gamma)),
            2 => {
                // Boundary points at arc separation φ are 2ρ sin(φ/2) apart.
                let rho = *radius;
                let f = |phi: f64| ex(profiles.f_radial(2.0 * rho * (0.5 * phi).sin()));
                Ok(2.0 * PI * rho * rho * adaptive_simpson(&f, 0.0, 2.0 * PI, tol, 36))
            }
            3 => {
                let rho = *radius;
                let f = |psi: f64| ex(profiles.f_radial(2.0 * rho * (0.5 * psi).sin())) * psi.sin();
                Ok(8.0 * PI * PI * rho.powi(4) * adaptive_simpson(&f, 0.0, PI, tol, 36))
            }
            d => Err(AnalyticsError::Unsupported(format!(
                "boundary pair integrals for balls in dimension {d}"
            ))),
        },
        BaseShape::Box { half_widths } => box_pair_integral(half_widths, profiles, gamma, tol),
    }
}

/// Pair sum over the two endpoints of a segment of length `len`.
fn endpoint_pairs(len: f64, profiles: &Profiles<'_>, gamma: f64) -> f64 {
    2.0 * (gamma * profiles.f_radial(0.0)).exp() + 2.0 * (gamma * profiles.f_radial(len)).exp()
}

fn box_pair_integral(
    half_widths: &[f64],
    profiles: &Profiles<'_>,
    gamma: f64,
    tol: f64,
) -> Result<f64, AnalyticsError> {
    match half_widths.len() {
        1 => Ok(endpoint_pairs(2.0 * half_widths[0], profiles, gamma)),
        2 => {
            let (h1, h2) = (half_widths[0], half_widths[1]);
            // Boundary segments as (midpoint, tangent, half-length). A box
            // with one zero half-width is a segment and is its own boundary.
            let segments: Vec<([f64; 2], [f64; 2], f64)> = if h1 == 0.0 && h2 == 0.0 {
                return Ok(0.0);
            } else if h2 == 0.0 {
                vec![([0.0, 0.0], [1.0, 0.0], h1)]
            } else if h1 == 0.0 {
                vec![([0.0, 0.0], [0.0, 1.0], h2)]
            } else {
                vec![
                    ([h1, 0.0], [0.0, 1.0], h2),
                    ([-h1, 0.0], [0.0, 1.0], h2),
                    ([0.0, h2], [1.0, 0.0], h1),
                    ([0.0, -h2], [1.0, 0.0], h1),
                ]
            };
            let pair_tol = tol / (segments.len() * segments.len()) as f64;
            let mut total = 0.0;
            for (ca, da, la) in &segments {
                for (cb, db, lb) in &segments {
                    let f = |u: &[f64]| {
                        let lag = [
                            ca[0] + u[0] * da[0] - cb[0] - u[1] * db[0],
                            ca[1] + u[0] * da[1] - cb[1] - u[1] * db[1],
                        ];
                        (gamma * profiles.f_at(&lag)).exp()
                    };
                    total += box_integral(&f, &[-la, -lb], &[*la, *lb], pair_tol, 36);
                }
            }
            Ok(total)
        }
        d => Err(AnalyticsError::Unsupported(format!(
            "boundary pair integrals for boxes in dimension {d}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::variance::variance_volume_exact;
    use crate::geometry::Frame;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use nalgebra::DMatrix;

    const TOL: f64 = 1e-9;

    fn ball_window() -> Window {
        Window::Ball { radius: 1.0 }
    }

    /// n = 2, m = 1 frame whose axis is the first coordinate direction.
    fn axis_e1_frame() -> Frame {
        let q = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        Frame::from_matrix(2, 1, q).unwrap()
    }

    fn two_atom_interval_spec(gamma: f64, weights: (f64, f64)) -> ModelSpec {
        let atoms = DirectionLaw::Atoms(vec![
            (Frame::identity(2, 1).unwrap(), weights.0),
            (axis_e1_frame(), weights.1),
        ]);
        ModelSpec::new(
            2,
            1,
            gamma,
            atoms,
            BaseLaw::Fixed(BaseShape::Interval { a: 0.5, b: 0.5 }),
        )
        .unwrap()
    }

    #[test]
    fn disk_cylinder_constants_match_closed_forms() {
        // n = 3, m = 1, disk base ρ = 1/2 under full rotation invariance:
        // every moment is deterministic, T(W, θ) = 2π for the unit ball.
        let spec = ModelSpec::new(
            3,
            1,
            0.3,
            DirectionLaw::Uniform,
            BaseLaw::Fixed(BaseShape::Ball { radius: 0.5 }),
        )
        .unwrap();
        let w = ball_window();
        let c = asymptotic_constants(&spec, &w, AtomConvention::Marginal, TOL).unwrap();
        assert_relative_eq!(c.v_volume, 0.725_812_482_203_164_9, max_relative = 1e-12);
        assert_relative_eq!(
            c.v_surface.unwrap(),
            1.696_303_978_174_872_3,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            c.cov_volume_surface.unwrap(),
            1.109_593_890_110_344_6,
            max_relative = 1e-12
        );
        assert_relative_eq!(c.t_window, 2.0 * PI, max_relative = 1e-12);
        assert!(c.t_window_se.is_none());
        // Deterministic bases make the volume and surface functionals
        // asymptotically perfectly correlated.
        let bound = (c.v_volume * c.v_surface.unwrap()).sqrt();
        assert_relative_eq!(c.cov_volume_surface.unwrap(), bound, max_relative = 1e-12);
    }

    #[test]
    fn square_base_surface_constant_vanishes_at_critical_intensity() {
        // Unit square base: V_2 = 1, V_1 = 2 = s1, so γ s1 V_2 - V_1 = 0 at
        // γ = 1 and the surface constant vanishes identically.
        let square = BaseLaw::Fixed(BaseShape::Box {
            half_widths: vec![0.5, 0.5],
        });
        let w = ball_window();
        let critical = ModelSpec::new(3, 1, 1.0, DirectionLaw::Uniform, square.clone()).unwrap();
        let vs = v_surface(&critical, &w, AtomConvention::Marginal, TOL).unwrap();
        assert_abs_diff_eq!(vs, 0.0, epsilon = 1e-14);
        assert!(v_volume(&critical, &w, AtomConvention::Marginal, TOL).unwrap() > 0.0);

        let off_critical = ModelSpec::new(3, 1, 0.8, DirectionLaw::Uniform, square).unwrap();
        assert!(v_surface(&off_critical, &w, AtomConvention::Marginal, TOL).unwrap() > 0.0);
    }

    #[test]
    fn conditional_convention_matches_interval_closed_form() {
        // Two direction atoms with unit-length interval bases admit a closed
        // surface constant when the atom weights stay outside the
        // covariograms: γ/2 e^{-2γℓ} Σ_i T_i (e^{γℓ}(1 + p_i) + p_i - 4γℓ - 1).
        let w = ball_window();
        for gamma in [0.3, 0.7] {
            let spec = two_atom_interval_spec(gamma, (0.3, 0.7));
            let ell = 1.0;
            let t = 16.0 / 3.0;
            let expected: f64 = [0.3, 0.7]
                .iter()
                .map(|p| {
                    0.5 * gamma
                        * (-2.0 * ell * gamma).exp()
                        * t
                        * ((ell * gamma).exp() * (1.0 + p) + p - 4.0 * ell * gamma - 1.0)
                })
                .sum();
            let got = v_surface(&spec, &w, AtomConvention::Conditional, TOL).unwrap();
            assert_relative_eq!(got, expected, max_relative = 1e-8);
        }
    }

    #[test]
    fn marginal_convention_matches_weighted_interval_closed_form() {
        // With weights inside the covariograms the per-atom bracket becomes
        // (2/p)(1 - p/2)^2 (e^{γpℓ} - 1) + (p/2)(e^{γpℓ} + 1) - 2γℓ.
        let gamma = 0.7;
        let ell = 1.0;
        let t = 16.0 / 3.0;
        let spec = two_atom_interval_spec(gamma, (0.3, 0.7));
        let expected: f64 = [0.3_f64, 0.7]
            .iter()
            .map(|p| {
                let e = (gamma * p * ell).exp();
                let bracket = (2.0 / p) * (1.0 - 0.5 * p).powi(2) * (e - 1.0) + 0.5 * p * (e + 1.0)
                    - 2.0 * gamma * ell;
                gamma * (-2.0 * gamma * ell).exp() * t * bracket
            })
            .sum();
        let got = v_surface(&spec, &ball_window(), AtomConvention::Marginal, TOL).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-8);
    }

    #[test]
    fn marginal_volume_constant_is_the_large_window_limit() {
        // The exact finite-window variance, scaled by r^{n+m}, converges to
        // the Marginal constant and stays far from the Conditional one.
        let spec = two_atom_interval_spec(1.0, (0.5, 0.5));
        let w = ball_window();
        let marginal = v_volume(&spec, &w, AtomConvention::Marginal, TOL).unwrap();
        let conditional = v_volume(&spec, &w, AtomConvention::Conditional, TOL).unwrap();
        assert_relative_eq!(marginal, 0.858_762_039_189_794, max_relative = 1e-8);
        assert_relative_eq!(conditional, 2.073_789_326_895_294, max_relative = 1e-8);

        let r = 32.0;
        let scaled = variance_volume_exact(&spec, &w, r, 1e-6).unwrap() / r.powi(3);
        assert!(
            (scaled - marginal).abs() < 0.07 * marginal,
            "scaled exact variance {scaled} should approach {marginal}"
        );
        assert!((scaled - marginal).abs() * 3.0 < (scaled - conditional).abs());
    }

    #[test]
    fn many_small_atoms_approach_the_rotation_average() {
        // Radial bases make T(W, θ) direction-free in the plane, so the only
        // atomic/rotation-invariant gap is the weight nonlinearity, which is
        // O(p) under the Marginal convention.
        let base = BaseLaw::Fixed(BaseShape::Ball { radius: 0.5 });
        let w = ball_window();
        let gamma = 0.7;
        let uniform = ModelSpec::new(2, 1, gamma, DirectionLaw::Uniform, base.clone()).unwrap();
        let reference = v_volume(&uniform, &w, AtomConvention::Marginal, TOL).unwrap();

        let gaps: Vec<f64> = [2_usize, 8]
            .iter()
            .map(|&k| {
                let atoms = DirectionLaw::Atoms(
                    (0..k)
                        .map(|i| {
                            // Any frames work: radial bases erase direction.
                            let f = if i % 2 == 0 {
                                Frame::identity(2, 1).unwrap()
                            } else {
                                axis_e1_frame()
                            };
                            (f, 1.0 / k as f64)
                        })
                        .collect(),
                );
                let spec = ModelSpec::new(2, 1, gamma, atoms, base.clone()).unwrap();
                let v = v_volume(&spec, &w, AtomConvention::Marginal, TOL).unwrap();
                (v - reference).abs() / reference
            })
            .collect();
        assert!(gaps[1] < gaps[0], "splitting atoms should shrink the gap");
        assert!(gaps[1] < 0.05, "eight atoms should sit within 5 percent");
    }

    #[test]
    fn point_bases_reduce_to_weighted_chord_power_integrals() {
        // Zero-volume point bases: the lag integrals vanish and the boundary
        // pair integral is 1 per atom, so v_surface = γ Σ p_i T_i while the
        // volume constant and the covariance vanish.
        let gamma = 0.9;
        let atoms = DirectionLaw::Atoms(vec![
            (Frame::identity(2, 1).unwrap(), 0.4),
            (axis_e1_frame(), 0.6),
        ]);
        let spec = ModelSpec::new(2, 1, gamma, atoms, BaseLaw::Fixed(BaseShape::Point)).unwrap();
        let w = ball_window();
        for convention in [AtomConvention::Marginal, AtomConvention::Conditional] {
            let c = asymptotic_constants(&spec, &w, convention, TOL).unwrap();
            assert_abs_diff_eq!(c.v_volume, 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(c.cov_volume_surface.unwrap(), 0.0, epsilon = 1e-14);
            assert_relative_eq!(
                c.v_surface.unwrap(),
                gamma * (16.0 / 3.0),
                max_relative = 1e-12
            );
            assert_eq!(c.atom_weights, vec![0.4, 0.6]);
        }
    }

    #[test]
    fn zero_axis_constant_matches_large_window_variance() {
        // m = 0: the union of rotated disks. The scaled exact variance per
        // unit window volume converges to the asymptotic constant.
        let spec = ModelSpec::new(
            2,
            0,
            0.8,
            DirectionLaw::Uniform,
            BaseLaw::Fixed(BaseShape::Ball { radius: 0.4 }),
        )
        .unwrap();
        let w = ball_window();
        let constant = v_volume(&spec, &w, AtomConvention::Marginal, TOL).unwrap();
        assert!(constant > 0.0);
        let r = 80.0;
        let scaled = variance_volume_exact(&spec, &w, r, 1e-9).unwrap() / r.powi(2);
        assert_relative_eq!(scaled, constant, max_relative = 2e-2);
    }

    #[test]
    fn narrow_dilation_laws_approach_the_fixed_base() {
        let w = ball_window();
        let fixed = ModelSpec::new(
            2,
            1,
            0.6,
            DirectionLaw::Fixed(Frame::identity(2, 1).unwrap()),
            BaseLaw::Fixed(BaseShape::Interval { a: 0.5, b: 0.5 }),
        )
        .unwrap();
        let dilated = ModelSpec::new(
            2,
            1,
            0.6,
            DirectionLaw::Fixed(Frame::identity(2, 1).unwrap()),
            BaseLaw::Dilation {
                prototype: BaseShape::Interval { a: 0.5, b: 0.5 },
                factor: DilationFactor::Uniform {
                    lo: 1.0 - 1e-3,
                    hi: 1.0 + 1e-3,
                },
            },
        )
        .unwrap();
        type Constant = fn(&ModelSpec, &Window, AtomConvention, f64) -> Result<f64, AnalyticsError>;
        let constants: [Constant; 3] = [v_volume, v_surface, cov_volume_surface];
        for f in constants {
            let a = f(&fixed, &w, AtomConvention::Marginal, TOL).unwrap();
            let b = f(&dilated, &w, AtomConvention::Marginal, TOL).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-4);
        }
    }

    #[test]
    fn covariance_respects_cauchy_schwarz() {
        let w = ball_window();
        let cases: Vec<ModelSpec> = vec![
            ModelSpec::new(
                3,
                1,
                1.1,
                DirectionLaw::Uniform,
                BaseLaw::Dilation {
                    prototype: BaseShape::Ball { radius: 0.5 },
                    factor: DilationFactor::Uniform { lo: 0.6, hi: 1.4 },
                },
            )
            .unwrap(),
            ModelSpec::new(
                2,
                1,
                0.9,
                DirectionLaw::Fixed(Frame::identity(2, 1).unwrap()),
                BaseLaw::Dilation {
                    prototype: BaseShape::Interval { a: 0.3, b: 0.7 },
                    factor: DilationFactor::Uniform { lo: 0.5, hi: 1.5 },
                },
            )
            .unwrap(),
            ModelSpec::new(
                3,
                0,
                0.5,
                DirectionLaw::Uniform,
                BaseLaw::Fixed(BaseShape::Ball { radius: 0.6 }),
            )
            .unwrap(),
            two_atom_interval_spec(0.8, (0.25, 0.75)),
        ];
        for spec in &cases {
            let c = asymptotic_constants(spec, &w, AtomConvention::Marginal, TOL).unwrap();
            assert!(c.v_volume >= -1e-12);
            let vs = c.v_surface.unwrap();
            assert!(vs >= -1e-12);
            let bound = (c.v_volume.max(0.0) * vs.max(0.0)).sqrt();
            assert!(
                c.cov_volume_surface.unwrap().abs() <= bound * (1.0 + 1e-8) + 1e-12,
                "covariance must satisfy Cauchy-Schwarz"
            );
        }
    }

    #[test]
    fn unsupported_combinations_degrade_gracefully() {
        let w = ball_window();
        // Rotation atoms with a planar box base and no axis: no radial
        // reduction is available.
        let spec = ModelSpec::new(
            2,
            0,
            0.5,
            DirectionLaw::Fixed(Frame::identity(2, 0).unwrap()),
            BaseLaw::Fixed(BaseShape::Box {
                half_widths: vec![0.5, 0.25],
            }),
        )
        .unwrap();
        assert!(matches!(
            v_volume(&spec, &w, AtomConvention::Marginal, TOL),
            Err(AnalyticsError::Unsupported(_))
        ));

        // Four-dimensional ball bases: the volume lag integral is radial and
        // fine, but no boundary pair parameterization is implemented.
        let spec = ModelSpec::new(
            5,
            1,
            0.4,
            DirectionLaw::Fixed(Frame::identity(5, 1).unwrap()),
            BaseLaw::Fixed(BaseShape::Ball { radius: 0.5 }),
        )
        .unwrap();
        assert!(v_volume(&spec, &w, AtomConvention::Marginal, TOL).is_ok());
        assert!(matches!(
            v_surface(&spec, &w, AtomConvention::Marginal, TOL),
            Err(AnalyticsError::Unsupported(_))
        ));
        let c = asymptotic_constants(&spec, &w, AtomConvention::Marginal, TOL).unwrap();
        assert!(c.v_surface.is_none());
        // The covariance needs only the radial lag integral, which is fine
        // in any base dimension.
        assert!(c.cov_volume_surface.is_some());
    }

    #[test]
    fn cube_window_rotation_average_reports_sampling_error() {
        let spec = ModelSpec::new(
            3,
            1,
            0.3,
            DirectionLaw::Uniform,
            BaseLaw::Fixed(BaseShape::Ball { radius: 0.5 }),
        )
        .unwrap();
        let w = Window::Cube { side: 2.0 };
        let c = asymptotic_constants(&spec, &w, AtomConvention::Marginal, 1e-7).unwrap();
        let se = c.t_window_se.expect("sampled T must report its error");
        assert!(se > 0.0 && se < 0.05 * c.t_window);
        // The struct must stay internally consistent: the volume constant is
        // γ e^{-2γ m1} m2 E[T].
        let gamma = spec.gamma();
        let m1 = spec.mean_base_volume();
        let m2 = spec.bases().volume_moment(2, 2);
        assert_relative_eq!(
            c.v_volume,
            gamma * (-2.0 * gamma * m1).exp() * m2 * c.t_window,
            max_relative = 1e-12
        );
    }
}
