//! Command-line driver around the core library: configuration loading,
//! deterministic experiment execution, record serialization, and SVG scan
//! plots.

pub mod config;
pub mod plot;
pub mod record;
pub mod run;
