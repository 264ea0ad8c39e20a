use super::{intrinsic::binomial, unit_ball_volume, GeometryError};

/// Compact base set of a cylinder, living in the base space `R^{n−m}`.
///
/// Shapes are centered in their own coordinates: `Ball` and `Box` at the
/// origin, `Interval { a, b }` is the set `[−a, b]` (only meaningful when the
/// base space is one-dimensional), `Point` is the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseShape {
    Ball { radius: f64 },
    Box { half_widths: Vec<f64> },
    Interval { a: f64, b: f64 },
    Point,
}

impl BaseShape {
    pub fn validate(&self, dim: usize) -> Result<(), GeometryError> {
        match self {
            BaseShape::Ball { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(GeometryError::InvalidShape(format!(
                        "ball radius must be positive, got {radius}"
                    )));
                }
            }
            BaseShape::Box { half_widths } => {
                if half_widths.len() != dim {
                    return Err(GeometryError::DimensionMismatch {
                        expected: dim,
                        got: half_widths.len(),
                    });
                }
                if half_widths.iter().any(|h| !(h.is_finite() && *h >= 0.0)) {
                    return Err(GeometryError::InvalidShape(
                        "box half-widths must be non-negative".into(),
                    ));
                }
            }
            BaseShape::Interval { a, b } => {
                if dim != 1 {
                    return Err(GeometryError::InvalidShape(format!(
                        "interval base requires a one-dimensional base space, got {dim}"
                    )));
                }
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) {
                    return Err(GeometryError::InvalidShape(format!(
                        "interval endpoints must be positive, got a={a}, b={b}"
                    )));
                }
            }
            BaseShape::Point => {}
        }
        Ok(())
    }

    /// `dim`-dimensional volume.
    pub fn volume(&self, dim: usize) -> f64 {
        self.intrinsic_volume(dim, dim)
    }

    /// Intrinsic volume `V_j` of the shape viewed in `R^dim`.
    pub fn intrinsic_volume(&self, j: usize, dim: usize) -> f64 {
        if j > dim {
            return 0.0;
        }
        match self {
            BaseShape::Ball { radius } => {
                binomial(dim, j) * unit_ball_volume(dim) / unit_ball_volume(dim - j)
                    * radius.powi(j as i32)
            }
            BaseShape::Box { half_widths } => {
                elementary_symmetric(&half_widths.iter().map(|h| 2.0 * h).collect::<Vec<_>>(), j)
            }
            BaseShape::Interval { a, b } => match j {
                0 => 1.0,
                1 => a + b,
                _ => 0.0,
            },
            BaseShape::Point => {
                if j == 0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Boundary measure `H^{dim−1}(∂Ξ)`. For a degenerate box (some zero
    /// half-width) the topological boundary is the set itself.
    pub fn boundary_measure(&self, dim: usize) -> f64 {
        match self {
            BaseShape::Ball { radius } => {
                dim as f64 * unit_ball_volume(dim) * radius.powi(dim as i32 - 1)
            }
            BaseShape::Box { half_widths } => {
                if half_widths.iter().any(|&h| h == 0.0) {
                    half_widths
                        .iter()
                        .map(|h| 2.0 * h)
                        .filter(|&s| s > 0.0)
                        .product()
                } else {
                    let mut total = 0.0;
                    for i in 0..half_widths.len() {
                        let face: f64 = half_widths
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| *j != i)
                            .map(|(_, h)| 2.0 * h)
                            .product();
                        total += 2.0 * face;
                    }
                    total
                }
            }
            BaseShape::Interval { .. } => 2.0,
            BaseShape::Point => {
                if dim == 1 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Largest distance from the origin to a point of the shape. This is the
    /// bound the sampling region needs: a translated shape meets a ball of
    /// radius `R` around the origin only if its translation vector has norm
    /// at most `R +` this value.
    pub fn circumradius_origin(&self) -> f64 {
        match self {
            BaseShape::Ball { radius } => *radius,
            BaseShape::Box { half_widths } => half_widths.iter().map(|h| h * h).sum::<f64>().sqrt(),
            BaseShape::Interval { a, b } => a.max(*b),
            BaseShape::Point => 0.0,
        }
    }

    /// Radius of the smallest enclosing ball (not necessarily centered at the
    /// origin).
    pub fn circumradius(&self) -> f64 {
        match self {
            BaseShape::Interval { a, b } => 0.5 * (a + b),
            other => other.circumradius_origin(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            BaseShape::Ball { radius } => 2.0 * radius,
            BaseShape::Box { half_widths } => {
                2.0 * half_widths.iter().map(|h| h * h).sum::<f64>().sqrt()
            }
            BaseShape::Interval { a, b } => a + b,
            BaseShape::Point => 0.0,
        }
    }

    /// Membership of a point given in shape coordinates.
    pub fn contains(&self, u: &[f64]) -> bool {
        match self {
            BaseShape::Ball { radius } => u.iter().map(|x| x * x).sum::<f64>() <= radius * radius,
            BaseShape::Box { half_widths } => u.iter().zip(half_widths).all(|(x, h)| x.abs() <= *h),
            BaseShape::Interval { a, b } => -a <= u[0] && u[0] <= *b,
            BaseShape::Point => u.iter().all(|&x| x == 0.0),
        }
    }

    /// Euclidean distance from a point (in shape coordinates) to the shape.
    pub fn distance(&self, u: &[f64]) -> f64 {
        match self {
            BaseShape::Ball { radius } => {
                (u.iter().map(|x| x * x).sum::<f64>().sqrt() - radius).max(0.0)
            }
            BaseShape::Box { half_widths } => u
                .iter()
                .zip(half_widths)
                .map(|(x, h)| (x.abs() - h).max(0.0).powi(2))
                .sum::<f64>()
                .sqrt(),
            BaseShape::Interval { a, b } => (-a - u[0]).max(u[0] - b).max(0.0),
            BaseShape::Point => u.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    /// The shape scaled by a positive factor about the origin. `Point` is
    /// scale-invariant.
    pub fn scaled(&self, factor: f64) -> BaseShape {
        match self {
            BaseShape::Ball { radius } => BaseShape::Ball {
                radius: radius * factor,
            },
            BaseShape::Box { half_widths } => BaseShape::Box {
                half_widths: half_widths.iter().map(|h| h * factor).collect(),
            },
            BaseShape::Interval { a, b } => BaseShape::Interval {
                a: a * factor,
                b: b * factor,
            },
            BaseShape::Point => BaseShape::Point,
        }
    }

    /// Short descriptor used in result records, e.g. `ball(0.5)`.
    pub fn descriptor(&self) -> String {
        match self {
            BaseShape::Ball { radius } => format!("ball({radius})"),
            BaseShape::Box { half_widths } => {
                let parts: Vec<String> = half_widths.iter().map(|h| format!("{h}")).collect();
                format!("box({})", parts.join("x"))
            }
            BaseShape::Interval { a, b } => format!("interval({a};{b})"),
            BaseShape::Point => "point".into(),
        }
    }
}

/// Elementary symmetric polynomial `e_j` of the given values.
fn elementary_symmetric(values: &[f64], j: usize) -> f64 {
    if j > values.len() {
        return 0.0;
    }
    // e_j via the standard triangular recurrence.
    let mut e = vec![0.0; j + 1];
    e[0] = 1.0;
    for &v in values {
        for k in (1..=j).rev() {
            e[k] += v * e[k - 1];
        }
    }
    e[j]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_intrinsic_volumes() {
        let square = BaseShape::Box {
            half_widths: vec![0.5, 0.5],
        };
        assert_eq!(square.intrinsic_volume(0, 2), 1.0);
        assert_eq!(square.intrinsic_volume(1, 2), 2.0);
        assert_eq!(square.intrinsic_volume(2, 2), 1.0);
    }

    #[test]
    fn unit_disk_intrinsic_volumes() {
        let disk = BaseShape::Ball { radius: 1.0 };
        let v = [
            disk.intrinsic_volume(0, 2),
            disk.intrinsic_volume(1, 2),
            disk.intrinsic_volume(2, 2),
        ];
        assert!((v[0] - 1.0).abs() < 1e-15);
        assert!((v[1] - std::f64::consts::PI).abs() < 1e-14);
        assert!((v[2] - std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn point_in_r1() {
        assert_eq!(BaseShape::Point.intrinsic_volume(0, 1), 1.0);
        assert_eq!(BaseShape::Point.intrinsic_volume(1, 1), 0.0);
    }

    #[test]
    fn interval_geometry() {
        let iv = BaseShape::Interval { a: 0.5, b: 1.5 };
        assert_eq!(iv.volume(1), 2.0);
        assert_eq!(iv.circumradius_origin(), 1.5);
        assert_eq!(iv.circumradius(), 1.0);
        assert!(iv.contains(&[-0.5]));
        assert!(iv.contains(&[1.5]));
        assert!(!iv.contains(&[1.5000001]));
        assert_eq!(iv.distance(&[2.5]), 1.0);
        assert_eq!(iv.distance(&[0.0]), 0.0);
    }

    #[test]
    fn box_distance_matches_corner() {
        let b = BaseShape::Box {
            half_widths: vec![1.0, 2.0],
        };
        let d = b.distance(&[2.0, 3.0]);
        assert!((d - (1.0f64 + 1.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_box_has_zero_volume() {
        let b = BaseShape::Box {
            half_widths: vec![0.5, 0.0],
        };
        assert_eq!(b.volume(2), 0.0);
        assert_eq!(b.intrinsic_volume(1, 2), 1.0);
        assert_eq!(b.boundary_measure(2), 1.0);
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        assert!(BaseShape::Ball { radius: 0.0 }.validate(2).is_err());
        assert!(BaseShape::Interval { a: 1.0, b: 1.0 }.validate(2).is_err());
        assert!(BaseShape::Interval { a: -1.0, b: 1.0 }.validate(1).is_err());
        assert!(BaseShape::Box {
            half_widths: vec![1.0]
        }
        .validate(2)
        .is_err());
    }
}
