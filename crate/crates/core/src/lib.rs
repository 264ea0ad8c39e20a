//! Simulation and analytics toolkit for stationary Poisson cylinder processes
//! in `R^n`.
//!
//! A cylinder is a translated base set `X ⊂ R^{n−m}` swept along an
//! `m`-dimensional direction subspace: `Z(x, θ, X) = θ((X + x) × E^m)` where
//! `θ` is a rotation and `E^m` the span of the last `m` coordinates. Base
//! positions form a stationary Poisson process on `R^{n−m}` with intensity
//! `γ`; each point carries an independent mark `(Θ, Ξ)` drawn from a product
//! law. The union set interpolates between the Boolean model (`m = 0`) and
//! Poisson flat processes (point bases).
//!
//! Modules:
//! - [`geometry`]: frames, base shapes, windows, cylinders, covariograms,
//!   intrinsic volumes.
//! - [`sampler`]: model specification, seed paths, realization sampling,
//!   coverage tests.
//! - [`functionals`]: Monte Carlo volume/surface estimators, exact 1-D union
//!   volume, difference-operator identities on shared probe sets.
//! - [`analytics`]: exact means and variances of the covered volume,
//!   asymptotic variance/covariance constants, section integrals of windows,
//!   chord-power integrals, Lambert W, degenerate-direction analysis.
//! - [`stats`]: streaming moment summaries, standardization,
//!   Kolmogorov–Smirnov distance to the normal, log–log rate fits, empirical
//!   covariance.

pub mod analytics;
pub mod functionals;
pub mod geometry;
pub mod sampler;
pub mod stats;

pub use geometry::{BaseLaw, BaseShape, DirectionLaw, Frame, GeometryError, Window};
pub use sampler::{ModelSpec, SampleError, SeedPath, StreamTag};
