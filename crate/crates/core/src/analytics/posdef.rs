//! Covariance matrix of the intrinsic volumes of the typical base, and its
//! smallest eigenvalue. A strictly positive minimum certifies the strict
//! positivity of the asymptotic variance constants built from these
//! functionals.
//!
//! For dilation laws Ξ = R·K the matrix is exact by homogeneity:
//! Cov(V_i(Ξ), V_j(Ξ)) = V_i(K) V_j(K) (E[R^{i+j}] − E[R^i] E[R^j]).

use nalgebra::DMatrix;

use super::AnalyticsError;
use crate::geometry::{BaseLaw, DilationFactor};

#[derive(Debug, Clone)]
pub struct IntVolCovariance {
    /// Intrinsic-volume indices covered, in matrix order.
    pub indices: Vec<usize>,
    pub matrix: DMatrix<f64>,
    pub min_eigenvalue: f64,
}

/// Covariance matrix of (V_lo(Ξ), …, V_hi(Ξ)) for a dilation base law in
/// dimension `dim`. Fixed laws are deterministic and yield the zero matrix,
/// as do constant dilation factors. Index 0 is admissible but degenerate:
/// V_0 ≡ 1 on nonempty convex bodies, so any range containing it has a zero
/// eigenvalue.
pub fn intvol_cov_matrix(
    law: &BaseLaw,
    dim: usize,
    index_range: (usize, usize),
) -> Result<IntVolCovariance, AnalyticsError> {
    let (lo, hi) = index_range;
    if lo > hi || hi > dim {
        return Err(AnalyticsError::InvalidInput(format!(
            "index range ({lo}, {hi}) must be ordered and bounded by the base dimension {dim}"
        )));
    }
    law.validate(dim)
        .map_err(|e| AnalyticsError::InvalidInput(e.to_string()))?;

    let indices: Vec<usize> = (lo..=hi).collect();
    let k = indices.len();
    let moment = |order: usize| -> f64 {
        match law {
            BaseLaw::Fixed(_) => 1.0,
            BaseLaw::Dilation { factor, .. } => match factor {
                DilationFactor::Constant(c) => c.powi(order as i32),
                DilationFactor::Uniform { .. } => factor.moment(order as i32),
            },
        }
    };
    let prototype = law.prototype();
    let matrix = DMatrix::from_fn(k, k, |a, b| {
        let (i, j) = (indices[a], indices[b]);
        let vi = prototype.intrinsic_volume(i, dim);
        let vj = prototype.intrinsic_volume(j, dim);
        vi * vj * (moment(i + j) - moment(i) * moment(j))
    });
    let min_eigenvalue = matrix
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(IntVolCovariance {
        indices,
        matrix,
        min_eigenvalue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BaseShape;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn disk_dilation(lo: f64, hi: f64) -> BaseLaw {
        BaseLaw::Dilation {
            prototype: BaseShape::Ball { radius: 1.0 },
            factor: DilationFactor::Uniform { lo, hi },
        }
    }

    #[test]
    fn deterministic_bases_have_zero_covariance() {
        let fixed = BaseLaw::Fixed(BaseShape::Ball { radius: 0.7 });
        let constant = BaseLaw::Dilation {
            prototype: BaseShape::Ball { radius: 1.0 },
            factor: DilationFactor::Constant(1.3),
        };
        for law in [fixed, constant] {
            let c = intvol_cov_matrix(&law, 2, (1, 2)).unwrap();
            for v in c.matrix.iter() {
                assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-15);
            }
            assert_abs_diff_eq!(c.min_eigenvalue, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn disk_dilation_matrix_matches_moment_oracle_and_is_positive_definite() {
        // R ~ Uniform(0.5, 1.5): E[R^k] = (1.5^{k+1} − 0.5^{k+1}) / (k + 1).
        let c = intvol_cov_matrix(&disk_dilation(0.5, 1.5), 2, (1, 2)).unwrap();
        let mk = |k: i32| (1.5_f64.powi(k + 1) - 0.5_f64.powi(k + 1)) / (k as f64 + 1.0);
        // V_1(unit disk) = π, V_2(unit disk) = π.
        for (a, i) in [(0usize, 1i32), (1, 2)] {
            for (b, j) in [(0usize, 1i32), (1, 2)] {
                let expected = PI * PI * (mk(i + j) - mk(i) * mk(j));
                assert_relative_eq!(c.matrix[(a, b)], expected, max_relative = 1e-12);
            }
        }
        assert!(c.min_eigenvalue > 0.0);
        assert_eq!(c.indices, vec![1, 2]);
    }

    #[test]
    fn including_index_zero_degenerates_the_matrix() {
        let c = intvol_cov_matrix(&disk_dilation(0.5, 1.5), 2, (0, 2)).unwrap();
        // V_0 ≡ 1 is constant, so its row and column vanish.
        for b in 0..3 {
            assert_abs_diff_eq!(c.matrix[(0, b)], 0.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(c.min_eigenvalue, 0.0, epsilon = 1e-12);
        assert!(c.min_eigenvalue > -1e-12);
    }

    #[test]
    fn interval_variance_is_the_scalar_case() {
        let law = BaseLaw::Dilation {
            prototype: BaseShape::Interval { a: 0.25, b: 0.75 },
            factor: DilationFactor::Uniform { lo: 0.8, hi: 1.2 },
        };
        let c = intvol_cov_matrix(&law, 1, (1, 1)).unwrap();
        let mk = |k: i32| (1.2_f64.powi(k + 1) - 0.8_f64.powi(k + 1)) / (0.4 * (k as f64 + 1.0));
        let expected = (mk(2) - mk(1) * mk(1)) * 1.0;
        assert_relative_eq!(c.matrix[(0, 0)], expected, max_relative = 1e-12);
        assert_relative_eq!(c.min_eigenvalue, expected, max_relative = 1e-12);
    }

    #[test]
    fn bad_index_ranges_are_rejected() {
        assert!(intvol_cov_matrix(&disk_dilation(0.5, 1.5), 2, (2, 1)).is_err());
        assert!(intvol_cov_matrix(&disk_dilation(0.5, 1.5), 2, (1, 3)).is_err());
    }
}
