//! Geometric primitives: rotation frames, base shapes, observation windows,
//! cylinders, covariograms and intrinsic volumes.

mod covariogram;
mod cylinder;
mod frame;
mod intrinsic;
mod law;
mod shape;
mod window;

pub use covariogram::{
    covariogram_f, covariogram_g, shape_boundary_covariogram, shape_covariogram,
};
pub use cylinder::Cylinder;
pub use frame::Frame;
pub use intrinsic::{intrinsic_volumes, parallel_volume, unit_ball_volume, unit_sphere_measure};
pub use law::{BaseLaw, DilationFactor, DirectionLaw};
pub use shape::BaseShape;
pub use window::Window;

/// Largest supported base-space dimension `n − m`. Hot paths use fixed-size
/// stack buffers of this length.
pub const MAX_BASE_DIM: usize = 8;

/// Orthonormality and determinant tolerance for [`Frame`] validation.
pub const FRAME_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("frame must be {n}x{n} with 0 <= m < n, got {rows}x{cols} with m = {m}")]
    FrameShape {
        n: usize,
        m: usize,
        rows: usize,
        cols: usize,
    },
    #[error("frame is not orthonormal: max |Q^T Q - I| = {defect:e} exceeds {FRAME_TOL:e}")]
    NotOrthonormal { defect: f64 },
    #[error("frame is not a rotation: det = {det}")]
    NotRotation { det: f64 },
    #[error("invalid base shape: {0}")]
    InvalidShape(String),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
}
