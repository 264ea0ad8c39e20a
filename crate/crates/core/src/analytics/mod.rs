//! Closed-form and quadrature evaluation of first- and second-order
//! theoretical quantities of the cylinder process: mean and exact variance
//! of the covered volume, the window functional `T(W,θ)`, chord-power
//! integrals, asymptotic variance/covariance constants, the two degenerate
//! examples, and the positive-definiteness criterion.

pub mod atomic;
pub mod limits;
pub mod posdef;
pub mod quadrature;
pub mod special;
pub mod translative;
pub mod twindow;
pub mod variance;

pub use atomic::{atomic_example, critical_weight, AtomicExampleReport};
pub use limits::{
    asymptotic_constants, cov_volume_surface, v_surface, v_volume, AsymptoticConstants,
    AtomConvention,
};
pub use posdef::{intvol_cov_matrix, IntVolCovariance};
pub use special::lambert_w;
pub use translative::{translative_check, TranslativeCheck};
pub use twindow::{chord_power_energy_mc, chord_power_integral, t_window, TDirection};
pub use variance::{mean_volume, variance_volume_exact};

#[derive(Debug, thiserror::Error)]
pub enum AnalyticsError {
    #[error("unsupported combination: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),
}
