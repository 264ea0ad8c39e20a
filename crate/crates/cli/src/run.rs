//! Experiment drivers: each mode turns a validated config into a canonically
//! sorted batch of result records. The batch is a pure function of the config
//! (master seed included); worker count and scheduling never change it.

use std::io;

use cylproc_core::analytics::{
    atomic_example, mean_volume, v_volume, variance_volume_exact, AnalyticsError, AtomConvention,
};
use cylproc_core::functionals::{
    difference_operator_volume, evaluate_realization, FunctionalError, RealizationResult,
};
use cylproc_core::sampler::sample_realization;
use cylproc_core::stats::{ks_distance_to_normal, standardize, SampleSummary};
use cylproc_core::{BaseLaw, BaseShape, DirectionLaw, Frame, SampleError, SeedPath};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, Mode};
use crate::record::{sort_canonical, ResultRecord, AGGREGATE_INDEX};

/// Offset separating the seed streams of the added cylinders in the
/// difference-operator mode from the main realization streams.
const EXTRA_STREAM_OFFSET: u64 = 1 << 32;

/// Failure classes with stable exit codes and diagnostic tags.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("{0}")]
    Cap(String),
    #[error("{0}")]
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Unsupported(_) => 2,
            RunError::Cap(_) => 3,
            RunError::Io(_) => 4,
        }
    }

    /// Short tag printed as `error[tag]: …` on stderr.
    pub fn diagnostic(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Unsupported(_) => "unsupported",
            RunError::Cap(_) => "cap",
            RunError::Io(_) => "io",
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.to_string())
    }
}

impl From<SampleError> for RunError {
    fn from(e: SampleError) -> Self {
        match e {
            SampleError::CountCapExceeded { .. } => RunError::Cap(e.to_string()),
            SampleError::Geometry(_) => RunError::Config(e.to_string()),
        }
    }
}

impl From<AnalyticsError> for RunError {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::InvalidInput(_) => RunError::Config(e.to_string()),
            // A quadrature that refuses to converge is a model the analytic
            // path cannot serve, not a user mistake.
            AnalyticsError::Unsupported(_) | AnalyticsError::Quadrature(_) => {
                RunError::Unsupported(e.to_string())
            }
        }
    }
}

impl From<FunctionalError> for RunError {
    fn from(e: FunctionalError) -> Self {
        match e {
            FunctionalError::Sample(inner) => inner.into(),
            other => RunError::Config(other.to_string()),
        }
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

/// Runs the configured experiment and returns its records sorted by
/// `(r, index)`.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| RunError::Config(e.to_string()))?;
    let mut records = pool.install(|| match cfg.mode {
        Mode::Simulate => simulate(cfg),
        Mode::Analytic => analytic(cfg),
        Mode::CltScan => clt_scan(cfg),
        Mode::VarianceScan => variance_scan(cfg),
        Mode::DiffopTest => diffop_test(cfg),
        Mode::AtomicExample => atomic_interval(cfg),
    })?;
    sort_canonical(&mut records);
    Ok(records)
}

/// Record with the model columns filled in and the per-row ones zeroed.
fn template(cfg: &ExperimentConfig) -> ResultRecord {
    ResultRecord {
        mode: cfg.mode.as_str().to_string(),
        n: cfg.spec.n() as u32,
        m: cfg.spec.m() as u32,
        gamma: cfg.spec.gamma(),
        base: cfg.spec.bases().descriptor(),
        direction: cfg.spec.directions().descriptor(),
        r: 0.0,
        index: 0,
        vol: 0.0,
        surf: None,
        count: 0,
        analytic_mean: None,
        analytic_var: None,
        seed: cfg.master_seed,
    }
}

/// Seed stream of realization `j` at the `r_idx`-th scan point. Distinct scan
/// points never share streams.
fn stream_index(cfg: &ExperimentConfig, r_idx: usize, j: u64) -> u64 {
    r_idx as u64 * cfg.realizations + j
}

fn job_grid(cfg: &ExperimentConfig) -> Vec<(usize, u64)> {
    (0..cfg.r_values.len())
        .flat_map(|i| (0..cfg.realizations).map(move |j| (i, j)))
        .collect()
}

/// Evaluates every (scan point, realization) job in parallel; the collected
/// order matches the job order regardless of the worker count.
fn simulate_grid(
    cfg: &ExperimentConfig,
    eps: Option<f64>,
) -> Result<Vec<(usize, u64, RealizationResult)>, RunError> {
    job_grid(cfg)
        .par_iter()
        .map(|&(i, j)| {
            let seed = SeedPath::new(cfg.master_seed, stream_index(cfg, i, j));
            let result = evaluate_realization(
                &cfg.spec,
                &cfg.window,
                cfg.r_values[i],
                cfg.probes as usize,
                eps,
                seed,
            )?;
            Ok((i, j, result))
        })
        .collect()
}

/// Aggregate-aware lookup: exact mean per scan point, computed once.
fn scan_means(cfg: &ExperimentConfig) -> Vec<f64> {
    cfg.r_values
        .iter()
        .map(|&r| mean_volume(&cfg.spec, &cfg.window, r))
        .collect()
}

/// Exact variance when the model admits it, `None` when it does not.
fn optional_variance(cfg: &ExperimentConfig, r: f64) -> Result<Option<f64>, RunError> {
    match variance_volume_exact(&cfg.spec, &cfg.window, r, cfg.quad_tol) {
        Ok(v) => Ok(Some(v)),
        Err(AnalyticsError::Unsupported(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Scaled asymptotic volume variance when the model admits it.
fn optional_v_volume(cfg: &ExperimentConfig) -> Result<Option<f64>, RunError> {
    match v_volume(
        &cfg.spec,
        &cfg.window,
        AtomConvention::Marginal,
        cfg.quad_tol,
    ) {
        Ok(v) => Ok(Some(v)),
        Err(AnalyticsError::Unsupported(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn simulate(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, RunError> {
    let results = simulate_grid(cfg, cfg.eps)?;
    let means = scan_means(cfg);
    let mut records = Vec::with_capacity(results.len());
    for (i, j, res) in results {
        let mut rec = template(cfg);
        rec.r = cfg.r_values[i];
        rec.index = j as i64;
        rec.vol = res.vol_estimate;
        rec.surf = res.surf_estimate;
        rec.count = res.cylinder_count;
        rec.analytic_mean = Some(means[i]);
        records.push(rec);
    }
    Ok(records)
}

fn analytic(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, RunError> {
    let mut records = Vec::with_capacity(cfg.r_values.len());
    for &r in &cfg.r_values {
        let mean = mean_volume(&cfg.spec, &cfg.window, r);
        let mut rec = template(cfg);
        rec.r = r;
        rec.index = AGGREGATE_INDEX;
        rec.vol = mean;
        rec.analytic_mean = Some(mean);
        rec.analytic_var = optional_variance(cfg, r)?;
        records.push(rec);
    }
    Ok(records)
}

/// Per-realization volumes plus, per scan point, the empirical variance with
/// the probe noise subtracted, scaled by `r^{-(n+m)}` to sit next to the
/// asymptotic constant.
fn variance_scan(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, RunError> {
    let results = simulate_grid(cfg, None)?;
    let means = scan_means(cfg);
    let v_ref = optional_v_volume(cfg)?;
    let nm = (cfg.spec.n() + cfg.spec.m()) as i32;
    let mut records = Vec::new();
    for (i, &r) in cfg.r_values.iter().enumerate() {
        let mut summary = SampleSummary::new();
        let mut noise = 0.0;
        for (_, j, res) in results.iter().filter(|(ri, _, _)| *ri == i) {
            summary.push(res.vol_estimate);
            noise += res.vol_se * res.vol_se;

            let mut rec = template(cfg);
            rec.r = r;
            rec.index = *j as i64;
            rec.vol = res.vol_estimate;
            rec.count = res.cylinder_count;
            rec.analytic_mean = Some(means[i]);
            records.push(rec);
        }
        noise /= cfg.realizations as f64;

        let mut agg = template(cfg);
        agg.r = r;
        agg.index = AGGREGATE_INDEX;
        agg.vol = (summary.variance() - noise).max(0.0) / r.powi(nm);
        agg.count = cfg.realizations;
        agg.analytic_mean = Some(means[i]);
        agg.analytic_var = v_ref;
        records.push(agg);
    }
    Ok(records)
}

/// Per scan point: standardized sample against the exact mean and variance
/// (asymptotic fallback), aggregated into one Kolmogorov–Smirnov distance.
fn clt_scan(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, RunError> {
    let results = simulate_grid(cfg, None)?;
    let means = scan_means(cfg);
    let nm = (cfg.spec.n() + cfg.spec.m()) as i32;
    let mut records = Vec::new();
    for (i, &r) in cfg.r_values.iter().enumerate() {
        let var = match optional_variance(cfg, r)? {
            Some(v) => v,
            None => match optional_v_volume(cfg)? {
                Some(v) => v * r.powi(nm),
                None => {
                    return Err(RunError::Unsupported(format!(
                        "no variance reference available for the model at r = {r}"
                    )))
                }
            },
        };
        let group: Vec<&RealizationResult> = results
            .iter()
            .filter(|(ri, _, _)| *ri == i)
            .map(|(_, _, res)| res)
            .collect();
        // The estimator carries probe noise on top of the process variance;
        // both are part of the spread of the reported values.
        let noise =
            group.iter().map(|res| res.vol_se * res.vol_se).sum::<f64>() / group.len() as f64;
        let vols: Vec<f64> = group.iter().map(|res| res.vol_estimate).collect();
        let z = standardize(&vols, means[i], (var + noise).sqrt())
            .map_err(|e| RunError::Config(e.to_string()))?;
        let ks = ks_distance_to_normal(&z);

        for (j, res) in group.iter().enumerate() {
            let mut rec = template(cfg);
            rec.r = r;
            rec.index = j as i64;
            rec.vol = res.vol_estimate;
            rec.count = res.cylinder_count;
            rec.analytic_mean = Some(means[i]);
            rec.analytic_var = Some(var);
            records.push(rec);
        }
        let mut agg = template(cfg);
        agg.r = r;
        agg.index = AGGREGATE_INDEX;
        agg.vol = ks;
        agg.count = cfg.realizations;
        agg.analytic_mean = Some(means[i]);
        agg.analytic_var = Some(var);
        records.push(agg);
    }
    Ok(records)
}

/// Samples a second, independent realization per job and uses its first
/// `1 + (j mod 3)` cylinders as the added directions of the difference
/// operator. `vol` reports the inclusion–exclusion value, `surf` the closed
/// form; the two agree exactly on the shared probe set.
fn diffop_test(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, RunError> {
    let rows: Vec<(usize, u64, f64, f64, u64)> = job_grid(cfg)
        .par_iter()
        .map(|&(i, j)| {
            let r = cfg.r_values[i];
            let seed = SeedPath::new(cfg.master_seed, stream_index(cfg, i, j));
            let cylinders = sample_realization(&cfg.spec, &cfg.window, r, &seed)?;
            let extra_seed = SeedPath::new(
                cfg.master_seed,
                EXTRA_STREAM_OFFSET + stream_index(cfg, i, j),
            );
            let mut extras = sample_realization(&cfg.spec, &cfg.window, r, &extra_seed)?;
            extras.truncate(1 + (j as usize % 3));
            if extras.is_empty() {
                // Nothing to add: every difference of the empty family is 0.
                return Ok((i, j, 0.0, 0.0, 0));
            }
            let check = difference_operator_volume(
                &cylinders,
                &extras,
                cfg.spec.n(),
                &cfg.window,
                r,
                cfg.probes as usize,
                &seed,
            )?;
            Ok((
                i,
                j,
                check.definition,
                check.closed_form,
                extras.len() as u64,
            ))
        })
        .collect::<Result<_, RunError>>()?;

    let mut records = Vec::with_capacity(rows.len());
    for (i, j, definition, closed, k) in rows {
        let mut rec = template(cfg);
        rec.r = cfg.r_values[i];
        rec.index = j as i64;
        rec.vol = definition;
        rec.surf = Some(closed);
        rec.count = k;
        records.push(rec);
    }
    Ok(records)
}

/// Interval-base example over atomic directions. `r` scans the intensity:
/// `vol` is the surface-variance constant, `surf` the critical bracket
/// weight, and the aggregate row (present when the degenerate intensity
/// exists) sits at `r = γ*` with the residual constant as its value.
fn atomic_interval(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, RunError> {
    let atoms: Vec<(Frame, f64)> = match cfg.spec.directions() {
        DirectionLaw::Uniform => {
            return Err(RunError::Unsupported(
                "the interval-base example needs finitely many direction atoms".into(),
            ))
        }
        law => law
            .atoms()
            .into_iter()
            .map(|(f, w)| (f.clone(), w))
            .collect(),
    };
    let (a, b) = match cfg.spec.bases() {
        BaseLaw::Fixed(BaseShape::Interval { a, b }) => (*a, *b),
        other => {
            return Err(RunError::Unsupported(format!(
                "the interval-base example needs a fixed interval base, got {}",
                other.descriptor()
            )))
        }
    };
    let report = atomic_example(a, b, &atoms, &cfg.window, cfg.quad_tol)?;

    let mut records = Vec::with_capacity(cfg.r_values.len() + 1);
    for (i, &gamma) in cfg.r_values.iter().enumerate() {
        let mut rec = template(cfg);
        rec.r = gamma;
        rec.index = i as i64;
        rec.vol = report.surface_constant(gamma);
        rec.surf = Some(report.critical_weight(gamma));
        rec.count = atoms.len() as u64;
        rec.analytic_mean = Some(report.m_max);
        rec.analytic_var = Some(report.p_at_m);
        records.push(rec);
    }
    if let (Some(gamma_star), Some(residual)) = (report.gamma_star, report.v_at_gamma_star) {
        let mut agg = template(cfg);
        agg.r = gamma_star;
        agg.index = AGGREGATE_INDEX;
        agg.vol = residual;
        agg.surf = Some(report.critical_weight(gamma_star));
        agg.count = atoms.len() as u64;
        agg.analytic_mean = Some(report.m_max);
        agg.analytic_var = Some(report.p_at_m);
        records.push(agg);
    }
    Ok(records)
}
