use rand::Rng;

use super::{BaseShape, Frame, GeometryError};

/// Distribution of the direction mark `Θ` on the rotation space.
#[derive(Debug, Clone)]
pub enum DirectionLaw {
    /// Rotation-invariant directions (Haar).
    Uniform,
    /// Finitely many direction atoms with positive weights summing to one.
    Atoms(Vec<(Frame, f64)>),
    /// A single deterministic direction.
    Fixed(Frame),
}

impl DirectionLaw {
    pub fn validate(&self, n: usize, m: usize) -> Result<(), GeometryError> {
        match self {
            DirectionLaw::Uniform => Ok(()),
            DirectionLaw::Fixed(frame) => check_frame(frame, n, m),
            DirectionLaw::Atoms(atoms) => {
                if atoms.is_empty() {
                    return Err(GeometryError::InvalidLaw(
                        "atomic direction law needs at least one atom".into(),
                    ));
                }
                let mut total = 0.0;
                for (frame, w) in atoms {
                    check_frame(frame, n, m)?;
                    if !(w.is_finite() && *w > 0.0) {
                        return Err(GeometryError::InvalidLaw(format!(
                            "atom weights must be positive, got {w}"
                        )));
                    }
                    total += w;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(GeometryError::InvalidLaw(format!(
                        "atom weights must sum to 1 within 1e-12, got {total}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, DirectionLaw::Atoms(_) | DirectionLaw::Fixed(_))
    }

    /// Atoms with their weights; `Fixed` is a single atom of weight one.
    pub fn atoms(&self) -> Vec<(&Frame, f64)> {
        match self {
            DirectionLaw::Uniform => Vec::new(),
            DirectionLaw::Fixed(f) => vec![(f, 1.0)],
            DirectionLaw::Atoms(a) => a.iter().map(|(f, w)| (f, *w)).collect(),
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            DirectionLaw::Uniform => "uniform".into(),
            DirectionLaw::Fixed(_) => "fixed".into(),
            DirectionLaw::Atoms(a) => format!("atoms({})", a.len()),
        }
    }
}

fn check_frame(frame: &Frame, n: usize, m: usize) -> Result<(), GeometryError> {
    if frame.n() != n || frame.m() != m {
        return Err(GeometryError::InvalidLaw(format!(
            "direction frame is ({}, {}), model is ({n}, {m})",
            frame.n(),
            frame.m()
        )));
    }
    Ok(())
}

/// Random dilation factor for scaled base shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DilationFactor {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
}

impl DilationFactor {
    pub fn validate(&self) -> Result<(), GeometryError> {
        match self {
            DilationFactor::Constant(c) => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(GeometryError::InvalidLaw(format!(
                        "constant dilation factor must be positive, got {c}"
                    )));
                }
            }
            DilationFactor::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && *lo > 0.0 && hi > lo) {
                    return Err(GeometryError::InvalidLaw(format!(
                        "uniform dilation factor needs 0 < lo < hi, got [{lo}, {hi}]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DilationFactor::Constant(c) => *c,
            DilationFactor::Uniform { lo, hi } => rng.random_range(*lo..*hi),
        }
    }

    /// Moment `E[R^k]` (also valid for negative `k` when the support stays
    /// positive, which validation guarantees).
    pub fn moment(&self, k: i32) -> f64 {
        match self {
            DilationFactor::Constant(c) => c.powi(k),
            DilationFactor::Uniform { lo, hi } => {
                if k == -1 {
                    (hi / lo).ln() / (hi - lo)
                } else {
                    let p = k + 1;
                    (hi.powi(p) - lo.powi(p)) / (p as f64 * (hi - lo))
                }
            }
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            DilationFactor::Constant(c) => *c,
            DilationFactor::Uniform { hi, .. } => *hi,
        }
    }
}

/// Distribution of the base mark `Ξ`.
#[derive(Debug, Clone)]
pub enum BaseLaw {
    Fixed(BaseShape),
    Dilation {
        prototype: BaseShape,
        factor: DilationFactor,
    },
}

impl BaseLaw {
    pub fn validate(&self, dim: usize) -> Result<(), GeometryError> {
        match self {
            BaseLaw::Fixed(shape) => shape.validate(dim),
            BaseLaw::Dilation { prototype, factor } => {
                prototype.validate(dim)?;
                factor.validate()
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BaseShape {
        match self {
            BaseLaw::Fixed(shape) => shape.clone(),
            BaseLaw::Dilation { prototype, factor } => prototype.scaled(factor.sample(rng)),
        }
    }

    /// Moment `m_a = E[V_dim(Ξ)^a]` of the base volume.
    pub fn volume_moment(&self, dim: usize, a: u32) -> f64 {
        match self {
            BaseLaw::Fixed(shape) => shape.volume(dim).powi(a as i32),
            BaseLaw::Dilation { prototype, factor } => {
                prototype.volume(dim).powi(a as i32) * factor.moment((dim as u32 * a) as i32)
            }
        }
    }

    /// `E[V_i(Ξ)]` (intrinsic volumes scale with degree `i` under dilation).
    pub fn mean_intrinsic(&self, i: usize, dim: usize) -> f64 {
        match self {
            BaseLaw::Fixed(shape) => shape.intrinsic_volume(i, dim),
            BaseLaw::Dilation { prototype, factor } => {
                prototype.intrinsic_volume(i, dim) * factor.moment(i as i32)
            }
        }
    }

    /// `E[V_i(Ξ) V_j(Ξ)]`.
    pub fn cross_moment(&self, i: usize, j: usize, dim: usize) -> f64 {
        match self {
            BaseLaw::Fixed(shape) => {
                shape.intrinsic_volume(i, dim) * shape.intrinsic_volume(j, dim)
            }
            BaseLaw::Dilation { prototype, factor } => {
                prototype.intrinsic_volume(i, dim)
                    * prototype.intrinsic_volume(j, dim)
                    * factor.moment((i + j) as i32)
            }
        }
    }

    /// Almost-sure bound on the origin circumradius of sampled bases.
    pub fn max_circumradius_origin(&self) -> f64 {
        match self {
            BaseLaw::Fixed(shape) => shape.circumradius_origin(),
            BaseLaw::Dilation { prototype, factor } => {
                prototype.circumradius_origin() * factor.max()
            }
        }
    }

    /// Almost-sure bound on the diameter of sampled bases (the support
    /// radius of the covariogram).
    pub fn max_diameter(&self) -> f64 {
        match self {
            BaseLaw::Fixed(shape) => shape.diameter(),
            BaseLaw::Dilation { prototype, factor } => prototype.diameter() * factor.max(),
        }
    }

    pub fn prototype(&self) -> &BaseShape {
        match self {
            BaseLaw::Fixed(shape) => shape,
            BaseLaw::Dilation { prototype, .. } => prototype,
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            BaseLaw::Fixed(shape) => shape.descriptor(),
            BaseLaw::Dilation { prototype, factor } => match factor {
                DilationFactor::Constant(c) => format!("{}*{c}", prototype.descriptor()),
                DilationFactor::Uniform { lo, hi } => {
                    format!("{}*U({lo};{hi})", prototype.descriptor())
                }
            },
        }
    }
}
