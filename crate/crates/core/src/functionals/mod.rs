//! Per-realization estimation of geometric functionals of the clipped
//! cylinder union: volume, one-sided Minkowski surface content, and the
//! difference operators of the volume functional.
//!
//! Every estimator draws its probes from the `Probe` stream of the supplied
//! seed path. Estimators called with the same seed therefore share one probe
//! set, which turns additive identities (difference-operator formulas,
//! monotonicity, idempotence of unions) into exact integer invariants
//! instead of statistical ones.

use thiserror::Error;

use crate::geometry::{Cylinder, Window};
use crate::sampler::{
    coverage_indicator, sample_realization, ModelSpec, SampleError, SeedPath, StreamTag,
};

/// Hard ceiling for difference-operator order: the definition needs 2^k
/// union evaluations.
pub const MAX_DIFFERENCE_ORDER: usize = 20;

#[derive(Debug, Error)]
pub enum FunctionalError {
    /// Zero-volume bases have no full-dimensional boundary; the Minkowski
    /// surface estimator does not apply.
    #[error("flat base: {0}")]
    FlatBase(String),
    #[error("difference operator of order {k} exceeds the maximum {max}")]
    TooManyExtras { k: usize, max: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

/// Monte Carlo volume estimate with its binomial error.
#[derive(Debug, Clone, Copy)]
pub struct VolumeEstimate {
    pub value: f64,
    /// Standard error of `value` given the cylinder configuration.
    pub se: f64,
    pub hits: u64,
    pub probes: u64,
    pub window_volume: f64,
}

/// Shared-probe counts behind the joint volume/surface estimate. Keeping the
/// raw counts lets callers form unbiased estimates of the probe-noise
/// variances and covariance, which they can subtract when studying the
/// fluctuations of the underlying set functionals.
#[derive(Debug, Clone, Copy)]
pub struct VolumeSurfaceSample {
    pub window_volume: f64,
    pub probes: u64,
    /// Probes covered by the union itself.
    pub interior_hits: u64,
    /// Probes within distance `eps` of the union (interior included).
    pub dilated_hits: u64,
    pub eps: f64,
}

impl VolumeSurfaceSample {
    pub fn volume(&self) -> f64 {
        self.window_volume * self.interior_hits as f64 / self.probes as f64
    }

    /// One-sided Minkowski content: [vol(Z^ε ∩ W) − vol(Z ∩ W)] / (2ε).
    pub fn surface(&self) -> f64 {
        let shell = (self.dilated_hits - self.interior_hits) as f64;
        self.window_volume * shell / self.probes as f64 / (2.0 * self.eps)
    }

    fn denominator(&self) -> f64 {
        (self.probes.saturating_sub(1)).max(1) as f64
    }

    /// Unbiased estimate of the probe-noise variance of `volume()`.
    pub fn volume_noise_var(&self) -> f64 {
        let p = self.interior_hits as f64 / self.probes as f64;
        self.window_volume * self.window_volume * p * (1.0 - p) / self.denominator()
    }

    /// Unbiased estimate of the probe-noise variance of `surface()`.
    pub fn surface_noise_var(&self) -> f64 {
        let q = (self.dilated_hits - self.interior_hits) as f64 / self.probes as f64;
        let v = self.window_volume;
        v * v * q * (1.0 - q) / (4.0 * self.eps * self.eps) / self.denominator()
    }

    /// Probe-noise covariance between `volume()` and `surface()`. Interior
    /// and shell counts are multinomial, so the noise covariance is negative:
    /// −V² p q / (2ε (P−1)).
    pub fn cross_noise_cov(&self) -> f64 {
        let p = self.interior_hits as f64 / self.probes as f64;
        let q = (self.dilated_hits - self.interior_hits) as f64 / self.probes as f64;
        let v = self.window_volume;
        -v * v * p * q / (2.0 * self.eps) / self.denominator()
    }
}

/// Both evaluations of the k-th difference operator of the volume; they
/// agree exactly by construction and are returned for reporting.
#[derive(Debug, Clone, Copy)]
pub struct DifferenceCheck {
    /// Inclusion–exclusion over all 2^k unions.
    pub definition: f64,
    /// Closed form: (−1)^{k+1} vol(⋂ extras ∩ W ∖ Z).
    pub closed_form: f64,
}

/// One simulated realization reduced to its reported functionals.
#[derive(Debug, Clone, Copy)]
pub struct RealizationResult {
    pub vol_estimate: f64,
    pub vol_se: f64,
    pub surf_estimate: Option<f64>,
    pub cylinder_count: u64,
    pub probe_count: u64,
    pub seed: SeedPath,
    pub r: f64,
}

fn validate_probes(probes: usize) -> Result<(), FunctionalError> {
    if probes == 0 {
        return Err(FunctionalError::InvalidInput(
            "at least one probe is required".into(),
        ));
    }
    Ok(())
}

fn validate_window(window: &Window, r: f64) -> Result<(), FunctionalError> {
    window
        .validate()
        .map_err(|e| FunctionalError::InvalidInput(e.to_string()))?;
    if !(r.is_finite() && r > 0.0) {
        return Err(FunctionalError::InvalidInput(format!(
            "window dilation must be positive, got {r}"
        )));
    }
    Ok(())
}

/// Uniform-probe estimate of the volume of the union clipped to `W_r`.
pub fn estimate_volume(
    cylinders: &[Cylinder],
    n: usize,
    window: &Window,
    r: f64,
    probes: usize,
    seed: &SeedPath,
) -> Result<VolumeEstimate, FunctionalError> {
    validate_window(window, r)?;
    validate_probes(probes)?;
    let volume = window.volume(n, r);
    let mut rng = seed.rng(StreamTag::Probe);
    let mut hits = 0_u64;
    for _ in 0..probes {
        let y = window.sample_point(n, r, &mut rng);
        if coverage_indicator(cylinders, &y) {
            hits += 1;
        }
    }
    let p = hits as f64 / probes as f64;
    let denom = (probes.saturating_sub(1)).max(1) as f64;
    Ok(VolumeEstimate {
        value: volume * p,
        se: volume * (p * (1.0 - p) / denom).sqrt(),
        hits,
        probes: probes as u64,
        window_volume: volume,
    })
}

/// Joint volume/surface sample on one shared probe set.
pub fn estimate_volume_surface(
    cylinders: &[Cylinder],
    n: usize,
    window: &Window,
    r: f64,
    eps: f64,
    probes: usize,
    seed: &SeedPath,
) -> Result<VolumeSurfaceSample, FunctionalError> {
    validate_window(window, r)?;
    validate_probes(probes)?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(FunctionalError::InvalidInput(format!(
            "dilation radius must be positive, got {eps}"
        )));
    }
    for cylinder in cylinders {
        let d = cylinder.frame.base_dim();
        if cylinder.base.volume(d) == 0.0 {
            return Err(FunctionalError::FlatBase(format!(
                "base {} has zero volume; its union has no Minkowski surface content of this form",
                cylinder.base.descriptor()
            )));
        }
    }
    let volume = window.volume(n, r);
    let mut rng = seed.rng(StreamTag::Probe);
    let mut interior = 0_u64;
    let mut dilated = 0_u64;
    for _ in 0..probes {
        let y = window.sample_point(n, r, &mut rng);
        let mut inside = false;
        let mut near = false;
        for cylinder in cylinders {
            let dist = cylinder.distance(&y);
            if dist <= 0.0 {
                inside = true;
                near = true;
                break;
            }
            if dist <= eps {
                near = true;
            }
        }
        if inside {
            interior += 1;
        }
        if near {
            dilated += 1;
        }
    }
    Ok(VolumeSurfaceSample {
        window_volume: volume,
        probes: probes as u64,
        interior_hits: interior,
        dilated_hits: dilated,
        eps,
    })
}

/// Minkowski-content estimate of V_{n−1}(Z ∩ W_r).
pub fn estimate_surface(
    cylinders: &[Cylinder],
    n: usize,
    window: &Window,
    r: f64,
    eps: f64,
    probes: usize,
    seed: &SeedPath,
) -> Result<f64, FunctionalError> {
    Ok(estimate_volume_surface(cylinders, n, window, r, eps, probes, seed)?.surface())
}

/// Default dilation radius for the surface estimator.
pub fn default_surface_eps(spec: &ModelSpec) -> f64 {
    0.01 * spec.bases().max_circumradius_origin().min(1.0)
}

/// k-th difference operator of the volume functional at `cylinders`, in the
/// directions of the `extras`, evaluated two ways on one probe set:
///
/// * definition: Σ_{J ⊆ [k]} (−1)^{k−|J|} vol(Z ∪ ⋃_{i∈J} Z_i ∩ W);
/// * closed form: (−1)^{k+1} vol((⋂_i Z_i ∩ W) ∖ Z).
///
/// The shared probes make the two integer counts identical, which the
/// function asserts before returning.
pub fn difference_operator_volume(
    cylinders: &[Cylinder],
    extras: &[Cylinder],
    n: usize,
    window: &Window,
    r: f64,
    probes: usize,
    seed: &SeedPath,
) -> Result<DifferenceCheck, FunctionalError> {
    validate_window(window, r)?;
    validate_probes(probes)?;
    let k = extras.len();
    if k == 0 {
        return Err(FunctionalError::InvalidInput(
            "the difference operator needs at least one added cylinder".into(),
        ));
    }
    if k > MAX_DIFFERENCE_ORDER {
        return Err(FunctionalError::TooManyExtras {
            k,
            max: MAX_DIFFERENCE_ORDER,
        });
    }

    let full: usize = (1 << k) - 1;
    // not_in_z[mask]: probes outside Z whose extras-membership is exactly
    // `mask`. Probes inside Z cancel from every alternating sum.
    let mut not_in_z = vec![0_i64; 1 << k];
    let mut rng = seed.rng(StreamTag::Probe);
    for _ in 0..probes {
        let y = window.sample_point(n, r, &mut rng);
        if coverage_indicator(cylinders, &y) {
            continue;
        }
        let mut mask = 0_usize;
        for (i, extra) in extras.iter().enumerate() {
            if extra.contains(&y) {
                mask |= 1 << i;
            }
        }
        not_in_z[mask] += 1;
    }
    let exactly_full = not_in_z[full];

    // Subset-sum transform: not_in_z[mask] becomes the count over all
    // submasks, i.e. probes outside Z that miss every extra outside `mask`.
    for bit in 0..k {
        for mask in 0..=full {
            if mask & (1 << bit) != 0 {
                not_in_z[mask] += not_in_z[mask ^ (1 << bit)];
            }
        }
    }

    let mut definition_count = 0_i64;
    for subset in 0..=full {
        // vol(Z ∪ ⋃_{i∈subset} Z_i) counts everything except the probes
        // outside Z that also miss every chosen extra.
        let hits = probes as i64 - not_in_z[full & !subset];
        let sign = if (k - (subset as usize).count_ones() as usize) % 2 == 0 {
            1
        } else {
            -1
        };
        definition_count += sign * hits;
    }
    let closed_sign = if (k + 1) % 2 == 0 { 1 } else { -1 };
    let closed_count = closed_sign * exactly_full;
    assert_eq!(
        definition_count, closed_count,
        "difference-operator identity must hold exactly on shared probes"
    );

    let scale = window.volume(n, r) / probes as f64;
    Ok(DifferenceCheck {
        definition: scale * definition_count as f64,
        closed_form: scale * closed_count as f64,
    })
}

/// Exact length of a union of intervals clipped to `window`. Plain
/// sort-and-sweep; the one-dimensional cases are cheap enough to not need
/// probes at all.
pub fn union_volume_1d(intervals: &[(f64, f64)], window: (f64, f64)) -> f64 {
    let (wlo, whi) = window;
    let mut clipped: Vec<(f64, f64)> = intervals
        .iter()
        .map(|&(a, b)| (a.max(wlo), b.min(whi)))
        .filter(|&(a, b)| b > a)
        .collect();
    clipped.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut total = 0.0;
    let mut current: Option<(f64, f64)> = None;
    for (a, b) in clipped {
        match current {
            Some((lo, hi)) if a <= hi => current = Some((lo, hi.max(b))),
            Some((lo, hi)) => {
                total += hi - lo;
                current = Some((a, b));
            }
            None => current = Some((a, b)),
        }
    }
    if let Some((lo, hi)) = current {
        total += hi - lo;
    }
    total
}

/// Samples one realization and reduces it to its reported functionals. The
/// volume and surface estimates share one probe set.
pub fn evaluate_realization(
    spec: &ModelSpec,
    window: &Window,
    r: f64,
    probes: usize,
    eps: Option<f64>,
    seed: SeedPath,
) -> Result<RealizationResult, FunctionalError> {
    let cylinders = sample_realization(spec, window, r, &seed)?;
    let n = spec.n();
    let (vol_estimate, vol_se, surf_estimate) = match eps {
        Some(eps) => {
            let sample = estimate_volume_surface(&cylinders, n, window, r, eps, probes, &seed)?;
            (
                sample.volume(),
                sample.volume_noise_var().sqrt(),
                Some(sample.surface()),
            )
        }
        None => {
            let estimate = estimate_volume(&cylinders, n, window, r, probes, &seed)?;
            (estimate.value, estimate.se, None)
        }
    };
    Ok(RealizationResult {
        vol_estimate,
        vol_se,
        surf_estimate,
        cylinder_count: cylinders.len() as u64,
        probe_count: probes as u64,
        seed,
        r,
    })
}
