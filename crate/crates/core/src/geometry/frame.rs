use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{GeometryError, FRAME_TOL};

/// A rotation of `R^n` split into base and direction parts.
///
/// The columns form an orthonormal, positively oriented basis: the first
/// `n − m` columns span the base space (where the cylinder base lives), the
/// last `m` columns span the direction space along which the base is swept.
/// A point `y` lies in the cylinder with base `X + x` iff the projection of
/// `θ^T y` onto the first `n − m` coordinates lies in `X + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    n: usize,
    m: usize,
    q: DMatrix<f64>,
}

impl Frame {
    /// The identity rotation.
    pub fn identity(n: usize, m: usize) -> Result<Self, GeometryError> {
        check_split(n, m)?;
        Ok(Self {
            n,
            m,
            q: DMatrix::identity(n, n),
        })
    }

    /// Wraps an explicit matrix, validating orthonormality (max-norm defect
    /// at most `1e-12`) and orientation (`det = +1`).
    pub fn from_matrix(n: usize, m: usize, q: DMatrix<f64>) -> Result<Self, GeometryError> {
        check_split(n, m)?;
        if q.nrows() != n || q.ncols() != n {
            return Err(GeometryError::FrameShape {
                n,
                m,
                rows: q.nrows(),
                cols: q.ncols(),
            });
        }
        let defect = orthonormality_defect(&q);
        if !(defect <= FRAME_TOL) {
            return Err(GeometryError::NotOrthonormal { defect });
        }
        let det = q.determinant();
        if (det - 1.0).abs() > 1e-9 {
            return Err(GeometryError::NotRotation { det });
        }
        Ok(Self { n, m, q })
    }

    /// Draws a rotation from the invariant (Haar) distribution on `SO(n)`:
    /// QR factorization of an i.i.d. Gaussian matrix with the signs of the
    /// diagonal of `R` absorbed into `Q`, then a final column flip if needed
    /// to land in the positively oriented component.
    pub fn sample_uniform<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Self {
        check_split(n, m).expect("invalid (n, m) split");
        let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let (mut q, r) = g.qr().unpack();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                for i in 0..n {
                    q[(i, j)] = -q[(i, j)];
                }
            }
        }
        if q.determinant() < 0.0 {
            let last = n - 1;
            for i in 0..n {
                q[(i, last)] = -q[(i, last)];
            }
        }
        Self { n, m, q }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Dimension `n − m` of the base space.
    pub fn base_dim(&self) -> usize {
        self.n - self.m
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// Column `j` as a contiguous slice (the matrix is column-major).
    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n;
        &self.q.as_slice()[j * n..(j + 1) * n]
    }

    /// Projection of `θ^T y` onto the base coordinates: `out[j] = col_j · y`
    /// for the first `n − m` columns.
    pub fn project_base(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.n);
        debug_assert_eq!(out.len(), self.base_dim());
        for (j, o) in out.iter_mut().enumerate() {
            let col = self.column(j);
            *o = col.iter().zip(y).map(|(a, b)| a * b).sum();
        }
    }

    /// Maps base-space coordinates `u` to a point of `R^n` on the cylinder
    /// axis flat: `Σ_j u_j · col_j`.
    pub fn embed_base(&self, u: &[f64]) -> Vec<f64> {
        debug_assert_eq!(u.len(), self.base_dim());
        let mut y = vec![0.0; self.n];
        for (j, &uj) in u.iter().enumerate() {
            let col = self.column(j);
            for (yi, ci) in y.iter_mut().zip(col) {
                *yi += uj * ci;
            }
        }
        y
    }

    /// Composition `self · other` (apply `other`, then `self`).
    pub fn compose(&self, other: &Frame) -> Frame {
        assert_eq!(self.n, other.n, "composed frames must share n");
        Frame {
            n: self.n,
            m: self.m,
            q: &self.q * &other.q,
        }
    }

    /// Max-norm of `Q^T Q − I`.
    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_defect(&self.q)
    }

    pub fn determinant(&self) -> f64 {
        self.q.determinant()
    }
}

fn check_split(n: usize, m: usize) -> Result<(), GeometryError> {
    if n == 0 || m >= n {
        return Err(GeometryError::FrameShape {
            n,
            m,
            rows: n,
            cols: n,
        });
    }
    Ok(())
}

fn orthonormality_defect(q: &DMatrix<f64>) -> f64 {
    let gram = q.transpose() * q;
    let n = gram.nrows();
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((gram[(i, j)] - target).abs());
        }
    }
    defect
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_roundtrip() {
        let f = Frame::identity(3, 1).unwrap();
        let mut u = [0.0; 2];
        f.project_base(&[1.0, 2.0, 3.0], &mut u);
        assert_eq!(u, [1.0, 2.0]);
        assert_eq!(f.base_dim(), 2);
    }

    #[test]
    fn sampled_frames_are_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=5 {
            for m in 0..n {
                let f = Frame::sample_uniform(n, m, &mut rng);
                assert!(f.orthonormality_defect() <= FRAME_TOL, "n={n} m={m}");
                assert!((f.determinant() - 1.0).abs() <= 1e-9, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn composition_stays_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut acc = Frame::identity(4, 2).unwrap();
        for _ in 0..50 {
            let f = Frame::sample_uniform(4, 2, &mut rng);
            acc = acc.compose(&f);
            assert!(acc.orthonormality_defect() <= 1e-12);
        }
    }

    #[test]
    fn rejects_non_orthonormal() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(
            Frame::from_matrix(2, 1, q),
            Err(GeometryError::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn rejects_reflections() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            Frame::from_matrix(2, 1, q),
            Err(GeometryError::NotRotation { .. })
        ));
    }

    #[test]
    fn embed_then_project_is_identity_on_base_coords() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = Frame::sample_uniform(5, 2, &mut rng);
        let u = [0.3, -1.2, 0.7];
        let y = f.embed_base(&u);
        let mut back = [0.0; 3];
        f.project_base(&y, &mut back);
        for (a, b) in u.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
