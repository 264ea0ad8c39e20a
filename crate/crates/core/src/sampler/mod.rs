//! Model specification and reproducible sampling of cylinder process
//! realizations restricted to an observation window.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::geometry::{
    unit_ball_volume, BaseLaw, Cylinder, DirectionLaw, Frame, GeometryError, Window, MAX_BASE_DIM,
};

/// Hard cap on the cylinder count of a single realization.
pub const COUNT_CAP: u64 = 10_000_000;

#[derive(Debug, thiserror::Error)]
pub enum SampleError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("realization would contain {count} cylinders (mean {mean:.3e}), cap is {COUNT_CAP}")]
    CountCapExceeded { mean: f64, count: u64 },
}

/// Full description of a stationary Poisson cylinder process model.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    n: usize,
    m: usize,
    gamma: f64,
    directions: DirectionLaw,
    bases: BaseLaw,
}

impl ModelSpec {
    pub fn new(
        n: usize,
        m: usize,
        gamma: f64,
        directions: DirectionLaw,
        bases: BaseLaw,
    ) -> Result<Self, GeometryError> {
        if n == 0 || m >= n {
            return Err(GeometryError::FrameShape {
                n,
                m,
                rows: n,
                cols: n,
            });
        }
        if n - m > MAX_BASE_DIM {
            return Err(GeometryError::Unsupported(format!(
                "base dimension {} exceeds supported maximum {MAX_BASE_DIM}",
                n - m
            )));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(GeometryError::InvalidLaw(format!(
                "intensity must be positive, got {gamma}"
            )));
        }
        directions.validate(n, m)?;
        bases.validate(n - m)?;
        Ok(Self {
            n,
            m,
            gamma,
            directions,
            bases,
        })
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

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn directions(&self) -> &DirectionLaw {
        &self.directions
    }

    pub fn bases(&self) -> &BaseLaw {
        &self.bases
    }

    /// Mean base volume `m_1 = E[V_{n−m}(Ξ)]`.
    pub fn mean_base_volume(&self) -> f64 {
        self.bases.volume_moment(self.base_dim(), 1)
    }

    /// Probability that a fixed point is covered: `1 − e^{−γ m_1}`.
    pub fn coverage_probability(&self) -> f64 {
        -(-self.gamma * self.mean_base_volume()).exp_m1()
    }
}

/// Stream tags splitting one master seed into independent substreams, so
/// that e.g. adding probe points never perturbs cylinder sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamTag {
    Count = 0,
    Direction = 1,
    Base = 2,
    Position = 3,
    Probe = 4,
    Aux = 5,
}

const STREAM_TAGS: u64 = 8;

/// Addressable randomness: `(master seed, realization index, stream tag)`
/// deterministically selects a counter-based ChaCha stream. Same path, same
/// bits; distinct paths, independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedPath {
    pub master_seed: u64,
    pub realization_index: u64,
}

impl SeedPath {
    pub fn new(master_seed: u64, realization_index: u64) -> Self {
        Self {
            master_seed,
            realization_index,
        }
    }

    pub fn rng(&self, tag: StreamTag) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(
            self.realization_index
                .wrapping_mul(STREAM_TAGS)
                .wrapping_add(tag as u64),
        );
        rng
    }
}

/// The region of base-space translations that can produce a cylinder
/// meeting `W_r`, together with the Poisson mean of the cylinder count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingRegion {
    /// Ball radius in the base space `R^{n−m}`.
    pub radius: f64,
    /// `γ · κ_{n−m} · radius^{n−m}`.
    pub mean_count: f64,
}

/// Ball in the base space containing every translation whose cylinder can
/// intersect `W_r`: window circumradius plus the given bound on the base
/// shape's distance-to-origin. Projections contract norms, so any base
/// translated further misses the window for every direction.
pub fn sampling_region(
    spec: &ModelSpec,
    window: &Window,
    r: f64,
    base_circumradius_bound: f64,
) -> SamplingRegion {
    let d = spec.base_dim();
    let radius = window.circumradius(spec.n, r) + base_circumradius_bound;
    SamplingRegion {
        radius,
        mean_count: spec.gamma * unit_ball_volume(d) * radius.powi(d as i32),
    }
}

/// Samples the cylinders of one realization that can meet `W_r`.
///
/// Counts, directions, bases and positions are drawn from separate streams
/// of the seed path in index order, so the realization is a pure function
/// of the path and unaffected by any probe-stream consumption.
pub fn sample_realization(
    spec: &ModelSpec,
    window: &Window,
    r: f64,
    seed: &SeedPath,
) -> Result<Vec<Cylinder>, SampleError> {
    let region = sampling_region(spec, window, r, spec.bases().max_circumradius_origin());
    let count = {
        let mut rng = seed.rng(StreamTag::Count);
        let poisson = Poisson::new(region.mean_count).expect("positive mean");
        poisson.sample(&mut rng) as u64
    };
    if count > COUNT_CAP {
        return Err(SampleError::CountCapExceeded {
            mean: region.mean_count,
            count,
        });
    }
    let count = count as usize;
    let d = spec.base_dim();

    let mut position_rng = seed.rng(StreamTag::Position);
    let mut direction_rng = seed.rng(StreamTag::Direction);
    let mut base_rng = seed.rng(StreamTag::Base);

    let atom_frames: Vec<Arc<Frame>> = spec
        .directions
        .atoms()
        .iter()
        .map(|(f, _)| Arc::new((*f).clone()))
        .collect();

    let mut cylinders = Vec::with_capacity(count);
    for _ in 0..count {
        let position = uniform_in_ball(d, region.radius, &mut position_rng);
        let frame = match &spec.directions {
            DirectionLaw::Uniform => {
                Arc::new(Frame::sample_uniform(spec.n, spec.m, &mut direction_rng))
            }
            DirectionLaw::Fixed(_) => atom_frames[0].clone(),
            DirectionLaw::Atoms(atoms) => {
                let u: f64 = direction_rng.random();
                let mut acc = 0.0;
                let mut chosen = atom_frames.len() - 1;
                for (i, (_, w)) in atoms.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        chosen = i;
                        break;
                    }
                }
                atom_frames[chosen].clone()
            }
        };
        let base = spec.bases.sample(&mut base_rng);
        cylinders.push(Cylinder::new(position, frame, base));
    }
    Ok(cylinders)
}

/// Whether any of the cylinders covers the point.
pub fn coverage_indicator(cylinders: &[Cylinder], y: &[f64]) -> bool {
    cylinders.iter().any(|c| c.contains(y))
}

fn uniform_in_ball<R: Rng + ?Sized>(dim: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    let mut y: Vec<f64> = (0..dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = if norm > 0.0 {
        radius * rng.random::<f64>().powf(1.0 / dim as f64) / norm
    } else {
        0.0
    };
    y.iter_mut().for_each(|v| *v *= scale);
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BaseShape, DilationFactor};

    fn boolean_1d() -> ModelSpec {
        ModelSpec::new(
            1,
            0,
            1.0,
            DirectionLaw::Fixed(Frame::identity(1, 0).unwrap()),
            BaseLaw::Fixed(BaseShape::Interval { a: 0.5, b: 0.5 }),
        )
        .unwrap()
    }

    fn slab_2d(gamma: f64) -> ModelSpec {
        ModelSpec::new(
            2,
            1,
            gamma,
            DirectionLaw::Uniform,
            BaseLaw::Fixed(BaseShape::Ball { radius: 0.5 }),
        )
        .unwrap()
    }

    #[test]
    fn sampling_region_examples() {
        // 1-D Boolean model on [−5, 5] with unit intervals.
        let spec = boolean_1d();
        let region = sampling_region(&spec, &Window::Cube { side: 10.0 }, 1.0, 0.5);
        assert!((region.radius - 5.5).abs() < 1e-12);
        assert!((region.mean_count - 11.0).abs() < 1e-12);

        // Slabs through a unit disk window.
        let spec = slab_2d(0.7);
        let region = sampling_region(&spec, &Window::Ball { radius: 1.0 }, 1.0, 0.5);
        assert!((region.radius - 1.5).abs() < 1e-12);
        assert!((region.mean_count - 0.7 * 2.0 * 1.5).abs() < 1e-12);

        // Point bases: region radius is the window circumradius.
        let spec = ModelSpec::new(
            3,
            1,
            0.4,
            DirectionLaw::Uniform,
            BaseLaw::Fixed(BaseShape::Point),
        )
        .unwrap();
        let region = sampling_region(&spec, &Window::Ball { radius: 1.3 }, 2.0, 0.0);
        assert!((region.radius - 2.6).abs() < 1e-12);
        assert!((region.mean_count - 0.4 * std::f64::consts::PI * 2.6 * 2.6).abs() < 1e-12);
    }

    #[test]
    fn same_seed_path_reproduces_bitwise() {
        let spec = slab_2d(2.0);
        let w = Window::Ball { radius: 1.0 };
        let seed = SeedPath::new(99, 3);
        let a = sample_realization(&spec, &w, 4.0, &seed).unwrap();
        let b = sample_realization(&spec, &w, 4.0, &seed).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.position, y.position);
            assert_eq!(x.frame.matrix(), y.frame.matrix());
            assert_eq!(x.base, y.base);
        }
    }

    #[test]
    fn probe_stream_does_not_perturb_sampling() {
        let spec = slab_2d(2.0);
        let w = Window::Ball { radius: 1.0 };
        let seed = SeedPath::new(7, 0);
        let a = sample_realization(&spec, &w, 2.0, &seed).unwrap();
        // Consume arbitrary amounts of probe randomness in between.
        let mut probe = seed.rng(StreamTag::Probe);
        for _ in 0..12345 {
            let _: f64 = probe.random();
        }
        let b = sample_realization(&spec, &w, 2.0, &seed).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.position, y.position);
        }
    }

    #[test]
    fn distinct_realization_indices_differ() {
        let spec = slab_2d(2.0);
        let w = Window::Ball { radius: 1.0 };
        let a = sample_realization(&spec, &w, 4.0, &SeedPath::new(99, 0)).unwrap();
        let b = sample_realization(&spec, &w, 4.0, &SeedPath::new(99, 1)).unwrap();
        let same = a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.position == y.position);
        assert!(!same, "distinct indices must give distinct realizations");
    }

    #[test]
    fn tiny_intensity_is_almost_always_empty() {
        let spec = ModelSpec::new(
            2,
            1,
            1e-9,
            DirectionLaw::Uniform,
            BaseLaw::Fixed(BaseShape::Ball { radius: 0.5 }),
        )
        .unwrap();
        let w = Window::Ball { radius: 1.0 };
        let mut empty = 0u32;
        let trials = 10_000;
        for i in 0..trials {
            if sample_realization(&spec, &w, 1.0, &SeedPath::new(5, i))
                .unwrap()
                .is_empty()
            {
                empty += 1;
            }
        }
        assert!(empty as f64 >= (1.0 - 1e-4) * trials as f64);
    }

    #[test]
    fn mean_count_matches_poisson_mean() {
        let spec = slab_2d(1.5);
        let w = Window::Ball { radius: 1.0 };
        let region = sampling_region(&spec, &w, 2.0, 0.5);
        let trials = 10_000u64;
        let mut counts = Vec::with_capacity(trials as usize);
        for i in 0..trials {
            counts.push(
                sample_realization(&spec, &w, 2.0, &SeedPath::new(321, i))
                    .unwrap()
                    .len() as f64,
            );
        }
        let mean = counts.iter().sum::<f64>() / trials as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let se = (var / trials as f64).sqrt();
        assert!(
            (mean - region.mean_count).abs() <= 3.0 * se,
            "mean {mean} vs {} (se {se})",
            region.mean_count
        );
    }

    #[test]
    fn atom_frequencies_match_weights() {
        let n = 2;
        let m = 1;
        let f1 = Frame::identity(n, m).unwrap();
        let f2 = {
            let q = nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
            Frame::from_matrix(n, m, q).unwrap()
        };
        let spec = ModelSpec::new(
            n,
            m,
            2.0,
            DirectionLaw::Atoms(vec![(f1.clone(), 0.3), (f2, 0.7)]),
            BaseLaw::Fixed(BaseShape::Interval { a: 0.5, b: 0.5 }),
        )
        .unwrap();
        let w = Window::Ball { radius: 1.0 };
        let mut first = 0u64;
        let mut total = 0u64;
        for i in 0..4000 {
            for c in sample_realization(&spec, &w, 3.0, &SeedPath::new(8, i)).unwrap() {
                total += 1;
                if c.frame.matrix() == f1.matrix() {
                    first += 1;
                }
            }
        }
        let p = first as f64 / total as f64;
        let se = (0.3 * 0.7 / total as f64).sqrt();
        assert!((p - 0.3).abs() <= 4.0 * se, "p {p}, total {total}");
    }

    #[test]
    fn coverage_probability_across_model_families() {
        // Families: fixed interval (atomic direction), uniform slab, box
        // base with atoms, dilated ball base.
        let f1 = Frame::identity(2, 1).unwrap();
        let specs = vec![
            boolean_1d(),
            slab_2d(0.8),
            ModelSpec::new(
                2,
                1,
                0.6,
                DirectionLaw::Atoms(vec![(f1.clone(), 0.5), (f1, 0.5)]),
                BaseLaw::Fixed(BaseShape::Box {
                    half_widths: vec![0.7],
                }),
            )
            .unwrap(),
            ModelSpec::new(
                3,
                1,
                0.5,
                DirectionLaw::Uniform,
                BaseLaw::Dilation {
                    prototype: BaseShape::Ball { radius: 0.5 },
                    factor: DilationFactor::Uniform { lo: 0.5, hi: 1.5 },
                },
            )
            .unwrap(),
        ];
        for (k, spec) in specs.iter().enumerate() {
            let w = Window::Ball { radius: 1.0 };
            let p_true = spec.coverage_probability();
            let trials = 4000;
            // Two probe points inside the window (stationarity: same law).
            let probes: [Vec<f64>; 2] = [vec![0.0; spec.n()], {
                let mut v = vec![0.0; spec.n()];
                v[0] = 0.5;
                v
            }];
            for (pi, y) in probes.iter().enumerate() {
                let mut hit = 0u32;
                for i in 0..trials {
                    let cyls =
                        sample_realization(spec, &w, 1.0, &SeedPath::new(1000 + k as u64, i))
                            .unwrap();
                    if coverage_indicator(&cyls, y) {
                        hit += 1;
                    }
                }
                let p = hit as f64 / trials as f64;
                let se = (p_true * (1.0 - p_true) / trials as f64).sqrt();
                assert!(
                    (p - p_true).abs() <= 3.0 * se,
                    "family {k} probe {pi}: p {p} vs {p_true} (se {se})"
                );
            }
        }
    }

    #[test]
    fn cylinders_outside_region_cannot_touch_window() {
        use rand::SeedableRng;
        let spec = ModelSpec::new(
            3,
            1,
            0.5,
            DirectionLaw::Uniform,
            BaseLaw::Fixed(BaseShape::Ball { radius: 0.5 }),
        )
        .unwrap();
        let w = Window::Ball { radius: 1.0 };
        let r = 2.0;
        let region = sampling_region(&spec, &w, r, spec.bases().max_circumradius_origin());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let frame = Arc::new(Frame::sample_uniform(3, 1, &mut rng));
            let mut pos = uniform_in_ball(2, 1.0, &mut rng);
            let norm = pos.iter().map(|v| v * v).sum::<f64>().sqrt();
            let target = region.radius + 1e-9;
            if norm == 0.0 {
                continue;
            }
            pos.iter_mut().for_each(|v| *v *= target / norm);
            let c = Cylinder::new(pos, frame, BaseShape::Ball { radius: 0.5 });
            for _ in 0..500 {
                let y = w.sample_point(3, r, &mut rng);
                assert!(!c.contains(&y));
            }
        }
    }

    #[test]
    fn coverage_indicator_edges() {
        assert!(!coverage_indicator(&[], &[0.0, 0.0]));
        let frame = Arc::new(Frame::identity(2, 1).unwrap());
        let c = Cylinder::new(vec![0.25], frame, BaseShape::Ball { radius: 0.3 });
        assert!(coverage_indicator(std::slice::from_ref(&c), &[0.25, 9.0]));
        assert!(!coverage_indicator(&[c], &[-0.1, 0.0]));
    }

    #[test]
    fn model_validation() {
        assert!(ModelSpec::new(
            2,
            2,
            1.0,
            DirectionLaw::Uniform,
            BaseLaw::Fixed(BaseShape::Point)
        )
        .is_err());
        assert!(ModelSpec::new(
            2,
            1,
            0.0,
            DirectionLaw::Uniform,
            BaseLaw::Fixed(BaseShape::Point)
        )
        .is_err());
        // Interval base in a 2-D base space is rejected.
        assert!(ModelSpec::new(
            3,
            1,
            1.0,
            DirectionLaw::Uniform,
            BaseLaw::Fixed(BaseShape::Interval { a: 1.0, b: 1.0 })
        )
        .is_err());
    }
}
