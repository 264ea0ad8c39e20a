use std::path::PathBuf;
use std::process;

use clap::Parser;

use cylproc::config::{load, Mode, Overrides};
use cylproc::plot::{plot_scan, PlotKind};
use cylproc::record::emit;
use cylproc::run::{run, RunError};

/// Simulation and analytics driver for stationary Poisson cylinder models.
#[derive(Parser)]
#[command(name = "cylproc", version, about)]
struct Cli {
    /// Experiment mode: simulate, analytic, clt-scan, variance-scan,
    /// diffop-test, or atomic-example.
    mode: String,
    /// TOML experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread count override (the records never depend on it).
    #[arg(long)]
    workers: Option<usize>,
    /// Output format override: csv or jsonlines.
    #[arg(long)]
    format: Option<String>,
    /// Also render the aggregate rows into an SVG at this path.
    #[arg(long)]
    plot: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(&cli) {
        eprintln!("error[{}]: {e}", e.diagnostic());
        process::exit(e.exit_code());
    }
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        workers: cli.workers,
        format: cli.format.clone(),
    };
    let cfg = load(&cli.config, &cli.mode, &overrides)?;
    // Fail fast on a plot request the mode cannot serve.
    let plot_kind = match (&cli.plot, cfg.mode) {
        (None, _) => None,
        (Some(_), Mode::VarianceScan) => Some(PlotKind::Variance),
        (Some(_), Mode::CltScan) => Some(PlotKind::CltRate),
        (Some(_), _) => {
            return Err(RunError::Config(
                "plotting needs a scan mode (variance-scan or clt-scan)".into(),
            ))
        }
    };

    let records = run(&cfg)?;
    emit(&records, cfg.format, &cfg.output)?;
    println!(
        "wrote {} records to {}",
        records.len(),
        cfg.output.display()
    );
    if let (Some(path), Some(kind)) = (&cli.plot, plot_kind) {
        let svg = plot_scan(&records, kind)?;
        std::fs::write(path, svg)?;
        println!("wrote plot to {}", path.display());
    }
    Ok(())
}
