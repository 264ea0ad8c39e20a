//! Experiment configuration: a TOML file describing the model, window, and
//! run parameters, plus CLI overrides (flags win over file values).

use std::path::{Path, PathBuf};
use std::str::FromStr;

use cylproc_core::geometry::{BaseLaw, BaseShape, DilationFactor, DirectionLaw, Frame, Window};
use cylproc_core::sampler::ModelSpec;
use nalgebra::DMatrix;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {reason}")]
    Read { path: PathBuf, reason: String },
    #[error("cannot parse {path}: {reason}")]
    Parse { path: PathBuf, reason: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Analytic,
    CltScan,
    VarianceScan,
    DiffopTest,
    AtomicExample,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Analytic => "analytic",
            Mode::CltScan => "clt-scan",
            Mode::VarianceScan => "variance-scan",
            Mode::DiffopTest => "diffop-test",
            Mode::AtomicExample => "atomic-example",
        }
    }
}

impl FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "simulate" => Ok(Mode::Simulate),
            "analytic" => Ok(Mode::Analytic),
            "clt-scan" => Ok(Mode::CltScan),
            "variance-scan" => Ok(Mode::VarianceScan),
            "diffop-test" => Ok(Mode::DiffopTest),
            "atomic-example" => Ok(Mode::AtomicExample),
            other => Err(ConfigError::Invalid(format!(
                "unknown mode {other:?}; expected one of simulate, analytic, clt-scan, \
                 variance-scan, diffop-test, atomic-example"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    JsonLines,
}

impl FromStr for OutputFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "jsonlines" => Ok(OutputFormat::JsonLines),
            other => Err(ConfigError::Invalid(format!(
                "unknown format {other:?}; expected csv or jsonlines"
            ))),
        }
    }
}

/// Validated, ready-to-run experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub spec: ModelSpec,
    pub window: Window,
    /// Scan abscissas: window dilations for simulation modes, intensities
    /// for the atomic example.
    pub r_values: Vec<f64>,
    pub realizations: u64,
    pub probes: u64,
    /// Surface-estimator dilation; `None` disables surface estimation.
    pub eps: Option<f64>,
    pub master_seed: u64,
    pub output: PathBuf,
    pub format: OutputFormat,
    pub workers: usize,
    pub quad_tol: f64,
}

/// CLI flags that take precedence over file values.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub format: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<String>,
    model: RawModel,
    window: RawWindow,
    run: RawRun,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    n: usize,
    m: usize,
    gamma: f64,
    /// "uniform", "fixed", or "atoms".
    direction: String,
    /// Axis vectors for a fixed direction: `m` vectors of length `n`
    /// spanning the sweep subspace.
    axes: Option<Vec<Vec<f64>>>,
    /// Direction atoms, each with its own axis vectors and weight.
    atoms: Option<Vec<RawAtom>>,
    base: RawBase,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    axes: Vec<Vec<f64>>,
    weight: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBase {
    /// "ball", "interval", "box", or "point".
    kind: String,
    radius: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    half_widths: Option<Vec<f64>>,
    /// "fixed" (default) or "dilation".
    law: Option<String>,
    factor_const: Option<f64>,
    factor_lo: Option<f64>,
    factor_hi: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWindow {
    /// "ball" or "cube".
    kind: String,
    radius: Option<f64>,
    side: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    r_values: Vec<f64>,
    realizations: u64,
    probes: u64,
    eps: Option<f64>,
    master_seed: u64,
    output: Option<String>,
    format: Option<String>,
    workers: Option<usize>,
    quad_tol: Option<f64>,
}

/// Loads, merges, and validates a configuration. The CLI mode argument wins
/// over a `mode` key in the file; the override flags win over their file
/// counterparts.
pub fn load(
    path: &Path,
    cli_mode: &str,
    overrides: &Overrides,
) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let raw: RawConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    build(raw, cli_mode, overrides)
}

fn build(
    raw: RawConfig,
    cli_mode: &str,
    overrides: &Overrides,
) -> Result<ExperimentConfig, ConfigError> {
    let mode = if cli_mode.is_empty() {
        raw.mode
            .as_deref()
            .ok_or_else(|| ConfigError::Invalid("no mode given".into()))?
            .parse()?
    } else {
        cli_mode.parse()?
    };

    let spec = build_spec(&raw.model)?;
    let window = build_window(&raw.window)?;
    window
        .validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;

    let run = &raw.run;
    if run.r_values.is_empty() {
        return Err(ConfigError::Invalid("r_values must be nonempty".into()));
    }
    for w in run.r_values.windows(2) {
        if !(w[0] < w[1]) {
            return Err(ConfigError::Invalid(format!(
                "r_values must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    for &r in &run.r_values {
        if !(r.is_finite() && r > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "r_values must be positive, got {r}"
            )));
        }
    }
    if run.realizations == 0 {
        return Err(ConfigError::Invalid(
            "realizations must be at least 1".into(),
        ));
    }
    if run.probes == 0 {
        return Err(ConfigError::Invalid("probes must be at least 1".into()));
    }
    if let Some(eps) = run.eps {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "eps must be positive, got {eps}"
            )));
        }
    }
    let workers = overrides.workers.or(run.workers).unwrap_or(1);
    if workers == 0 {
        return Err(ConfigError::Invalid("workers must be at least 1".into()));
    }
    let quad_tol = run.quad_tol.unwrap_or(1e-8);
    if !(quad_tol.is_finite() && quad_tol > 0.0) {
        return Err(ConfigError::Invalid(format!(
            "quad_tol must be positive, got {quad_tol}"
        )));
    }
    let format = match (&overrides.format, &run.format) {
        (Some(s), _) => s.parse()?,
        (None, Some(s)) => s.parse()?,
        (None, None) => OutputFormat::Csv,
    };
    let output = overrides
        .out
        .clone()
        .or_else(|| run.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("cylproc-results.csv"));

    Ok(ExperimentConfig {
        mode,
        spec,
        window,
        r_values: run.r_values.clone(),
        realizations: run.realizations,
        probes: run.probes,
        eps: run.eps,
        master_seed: overrides.seed.unwrap_or(run.master_seed),
        output,
        format,
        workers,
        quad_tol,
    })
}

fn build_spec(model: &RawModel) -> Result<ModelSpec, ConfigError> {
    let directions = match model.direction.as_str() {
        "uniform" => DirectionLaw::Uniform,
        "fixed" => {
            let axes = model
                .axes
                .as_ref()
                .ok_or_else(|| ConfigError::Invalid("fixed direction needs model.axes".into()))?;
            DirectionLaw::Fixed(frame_from_axes(model.n, model.m, axes)?)
        }
        "atoms" => {
            let atoms = model.atoms.as_ref().ok_or_else(|| {
                ConfigError::Invalid("atomic direction needs [[model.atoms]] entries".into())
            })?;
            let mut built = Vec::with_capacity(atoms.len());
            for atom in atoms {
                built.push((frame_from_axes(model.n, model.m, &atom.axes)?, atom.weight));
            }
            DirectionLaw::Atoms(built)
        }
        other => {
            return Err(ConfigError::Invalid(format!(
                "unknown direction {other:?}; expected uniform, fixed, or atoms"
            )))
        }
    };
    let bases = build_base(&model.base)?;
    ModelSpec::new(model.n, model.m, model.gamma, directions, bases)
        .map_err(|e| ConfigError::Invalid(e.to_string()))
}

fn build_base(base: &RawBase) -> Result<BaseLaw, ConfigError> {
    let shape = match base.kind.as_str() {
        "ball" => BaseShape::Ball {
            radius: base
                .radius
                .ok_or_else(|| ConfigError::Invalid("ball base needs radius".into()))?,
        },
        "interval" => BaseShape::Interval {
            a: base
                .a
                .ok_or_else(|| ConfigError::Invalid("interval base needs a".into()))?,
            b: base
                .b
                .ok_or_else(|| ConfigError::Invalid("interval base needs b".into()))?,
        },
        "box" => BaseShape::Box {
            half_widths: base
                .half_widths
                .clone()
                .ok_or_else(|| ConfigError::Invalid("box base needs half_widths".into()))?,
        },
        "point" => BaseShape::Point,
        other => {
            return Err(ConfigError::Invalid(format!(
                "unknown base kind {other:?}; expected ball, interval, box, or point"
            )))
        }
    };
    match base.law.as_deref().unwrap_or("fixed") {
        "fixed" => Ok(BaseLaw::Fixed(shape)),
        "dilation" => {
            let factor = match (base.factor_const, base.factor_lo, base.factor_hi) {
                (Some(c), None, None) => DilationFactor::Constant(c),
                (None, Some(lo), Some(hi)) => DilationFactor::Uniform { lo, hi },
                _ => {
                    return Err(ConfigError::Invalid(
                        "dilation law needs either factor_const or factor_lo + factor_hi".into(),
                    ))
                }
            };
            Ok(BaseLaw::Dilation {
                prototype: shape,
                factor,
            })
        }
        other => Err(ConfigError::Invalid(format!(
            "unknown base law {other:?}; expected fixed or dilation"
        ))),
    }
}

fn build_window(window: &RawWindow) -> Result<Window, ConfigError> {
    match window.kind.as_str() {
        "ball" => Ok(Window::Ball {
            radius: window
                .radius
                .ok_or_else(|| ConfigError::Invalid("ball window needs radius".into()))?,
        }),
        "cube" => Ok(Window::Cube {
            side: window
                .side
                .ok_or_else(|| ConfigError::Invalid("cube window needs side".into()))?,
        }),
        other => Err(ConfigError::Invalid(format!(
            "unknown window kind {other:?}; expected ball or cube"
        ))),
    }
}

/// Builds a direction frame from `m` axis vectors of length `n`: the vectors
/// are orthonormalized and become the frame's direction columns; the base
/// columns are a deterministic Gram–Schmidt completion over the standard
/// basis. Orientation is fixed by flipping the last direction column (a
/// geometric no-op: only the sweep span matters).
pub fn frame_from_axes(n: usize, m: usize, axes: &[Vec<f64>]) -> Result<Frame, ConfigError> {
    if axes.len() != m {
        return Err(ConfigError::Invalid(format!(
            "expected {m} axis vectors, got {}",
            axes.len()
        )));
    }
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n);
    for axis in axes {
        if axis.len() != n {
            return Err(ConfigError::Invalid(format!(
                "axis vectors must have length {n}, got {}",
                axis.len()
            )));
        }
        let mut v = axis.clone();
        orthogonalize(&mut v, &columns);
        let norm = norm(&v);
        if norm < 1e-9 {
            return Err(ConfigError::Invalid(
                "axis vectors must be linearly independent".into(),
            ));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        columns.push(v);
    }
    let axis_columns = columns.clone();
    let mut base_columns: Vec<Vec<f64>> = Vec::with_capacity(n - m);
    for i in 0..n {
        if base_columns.len() == n - m {
            break;
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        orthogonalize(&mut v, &columns);
        let norm = norm(&v);
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            columns.push(v.clone());
            base_columns.push(v);
        }
    }
    if base_columns.len() != n - m {
        return Err(ConfigError::Invalid(
            "could not complete the axis vectors to a basis".into(),
        ));
    }
    let mut q = DMatrix::zeros(n, n);
    for (j, col) in base_columns.iter().chain(&axis_columns).enumerate() {
        for (i, &v) in col.iter().enumerate() {
            q[(i, j)] = v;
        }
    }
    if q.determinant() < 0.0 {
        // The last column is a direction column whenever m >= 1, so the flip
        // does not change the model; at m = 0 it lands on a base column and
        // matters only for asymmetric base shapes.
        let j = n - 1;
        for i in 0..n {
            q[(i, j)] = -q[(i, j)];
        }
    }
    Frame::from_matrix(n, m, q).map_err(|e| ConfigError::Invalid(e.to_string()))
}

fn orthogonalize(v: &mut [f64], columns: &[Vec<f64>]) {
    for col in columns {
        let dot: f64 = v.iter().zip(col).map(|(a, b)| a * b).sum();
        for (vi, ci) in v.iter_mut().zip(col) {
            *vi -= dot * ci;
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
