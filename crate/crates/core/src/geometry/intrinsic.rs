use super::BaseShape;

/// Volume `κ_k` of the `k`-dimensional unit ball, via the recurrence
/// `κ_k = 2π κ_{k−2} / k` with `κ_0 = 1`, `κ_1 = 2`.
pub fn unit_ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI * unit_ball_volume(k - 2) / k as f64,
    }
}

/// Surface measure `H^{k−1}(S^{k−1}) = k κ_k` of the unit sphere in `R^k`.
pub fn unit_sphere_measure(k: usize) -> f64 {
    k as f64 * unit_ball_volume(k)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// All intrinsic volumes `(V_0, …, V_dim)` of the shape viewed in `R^dim`.
pub fn intrinsic_volumes(shape: &BaseShape, dim: usize) -> Vec<f64> {
    (0..=dim).map(|j| shape.intrinsic_volume(j, dim)).collect()
}

/// Volume of the outer parallel set at distance `eps ≥ 0`, by the Steiner
/// formula: `L^dim(K ⊕ B_eps) = Σ_j eps^{dim−j} κ_{dim−j} V_j(K)`.
pub fn parallel_volume(shape: &BaseShape, dim: usize, eps: f64) -> f64 {
    assert!(eps >= 0.0, "parallel body distance must be non-negative");
    (0..=dim)
        .map(|j| {
            eps.powi((dim - j) as i32) * unit_ball_volume(dim - j) * shape.intrinsic_volume(j, dim)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_ball_volumes_low_dims() {
        assert_eq!(unit_ball_volume(0), 1.0);
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_measures() {
        assert!((unit_sphere_measure(2) - 2.0 * PI).abs() < 1e-15);
        assert!((unit_sphere_measure(3) - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn parallel_volume_unit_square() {
        let square = BaseShape::Box {
            half_widths: vec![0.5, 0.5],
        };
        assert!((parallel_volume(&square, 2, 0.0) - 1.0).abs() < 1e-15);
        let expected = 1.0 + 0.4 + 0.01 * PI;
        assert!((parallel_volume(&square, 2, 0.1) - expected).abs() < 1e-14);
    }

    #[test]
    fn parallel_volume_ball_is_enlarged_ball() {
        let ball = BaseShape::Ball { radius: 1.0 };
        let got = parallel_volume(&ball, 3, 1.0);
        let expected = unit_ball_volume(3) * 8.0;
        assert!((got - expected).abs() < 1e-12 * expected);
    }

    /// Recover intrinsic volumes of the unit disk from parallel volumes by
    /// solving the Steiner linear system at three dilation radii, then check
    /// them against the closed form. Independent of the closed-form path.
    #[test]
    fn steiner_fit_recovers_disk_intrinsic_volumes() {
        let disk = BaseShape::Ball { radius: 1.0 };
        // L²(B₁ ⊕ B_ε) = π(1+ε)² computed directly, not via parallel_volume.
        let eps = [0.25, 0.5, 1.0];
        let vols: Vec<f64> = eps.iter().map(|e| PI * (1.0 + e) * (1.0 + e)).collect();
        // vols[i] = κ₂ ε² V₀ + κ₁ ε V₁ + V₂ ; solve the 3x3 system.
        let a = nalgebra::Matrix3::from_fn(|i, j| match j {
            0 => PI * eps[i] * eps[i],
            1 => 2.0 * eps[i],
            _ => 1.0,
        });
        let v = a
            .lu()
            .solve(&nalgebra::Vector3::from_column_slice(&vols))
            .unwrap();
        let closed = intrinsic_volumes(&disk, 2);
        for j in 0..3 {
            assert!(
                (v[j] - closed[j]).abs() < 1e-9,
                "V_{j}: fitted {} vs closed {}",
                v[j],
                closed[j]
            );
        }
    }

    /// Steiner formula against a hit-or-miss Monte Carlo oracle for the
    /// parallel volume, for several shapes and dilation radii.
    #[test]
    fn parallel_volume_matches_hit_or_miss() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let shapes: [(BaseShape, usize); 3] = [
            (BaseShape::Ball { radius: 0.8 }, 2),
            (
                BaseShape::Box {
                    half_widths: vec![0.5, 1.0],
                },
                2,
            ),
            (BaseShape::Interval { a: 0.5, b: 1.5 }, 1),
        ];
        for (shape, dim) in &shapes {
            for eps in [0.1, 0.3, 0.7] {
                let bound = shape.circumradius_origin() + eps;
                let cube_vol = (2.0 * bound).powi(*dim as i32);
                let trials = 200_000;
                let mut hits = 0u32;
                let mut u = vec![0.0; *dim];
                for _ in 0..trials {
                    for x in u.iter_mut() {
                        *x = rng.random_range(-bound..bound);
                    }
                    if shape.distance(&u) <= eps {
                        hits += 1;
                    }
                }
                let p = hits as f64 / trials as f64;
                let est = cube_vol * p;
                let se = cube_vol * (p * (1.0 - p) / trials as f64).sqrt();
                let exact = parallel_volume(shape, *dim, eps);
                assert!(
                    (est - exact).abs() <= 3.5 * se + 1e-9,
                    "{shape:?} eps={eps}: est {est} vs exact {exact} (se {se})"
                );
            }
        }
    }
}
