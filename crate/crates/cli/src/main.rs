//! `swme-lab`: run the shallow water moment benchmarks from the command line.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use swme_core::harness::{
    compare_models, format_tables, run_scenario, tables, write_comparison_csv, write_csv,
    write_run, Scenario,
};
use swme_core::models::{hyperbolicity_scan, write_scan_csv, Model, ModelKind};

#[derive(Parser)]
#[command(
    name = "swme-lab",
    version,
    about = "Shallow water moment equations: benchmarks and diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and report the L1 change between initial and final state.
    Run(RunArgs),
    /// Reproduce the well-balancing error tables for tests 1–4.
    Tables {
        /// Number of worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Number of cells (default: the scenarios' 1000).
        #[arg(long)]
        cells: Option<usize>,
        /// Also write the entries as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one scenario with several models and compare profiles.
    Compare {
        /// Built-in scenario name or TOML file.
        #[arg(long)]
        scenario: String,
        /// Comma-separated model kinds.
        #[arg(long, value_delimiter = ',', default_value = "swlme,hswme,betahswme")]
        models: Vec<ModelKind>,
        /// Spatial order (1 or 2).
        #[arg(long)]
        order: Option<u8>,
        /// Number of cells.
        #[arg(long)]
        cells: Option<usize>,
        /// Directory for per-model CSVs and the aligned profile file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Map where the system matrix has real eigenvalues over a grid of (α1, α2).
    ScanHyperbolicity {
        /// Model kind to scan.
        #[arg(long, default_value = "swme2")]
        model: ModelKind,
        /// Number of moments (ignored by models with a fixed order).
        #[arg(long = "N", default_value_t = 2)]
        moments: usize,
        /// Water height of the sampled states.
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        /// Mean velocity of the sampled states.
        #[arg(long, default_value_t = 0.0)]
        u: f64,
        /// Gravitational acceleration.
        #[arg(long, default_value_t = 1.0)]
        gravity: f64,
        /// Half-width of the symmetric α range.
        #[arg(long, default_value_t = 3.0)]
        range: f64,
        /// Samples per axis.
        #[arg(long, default_value_t = 101)]
        samples: usize,
        /// Output CSV file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Built-in scenario name (test1 … test6) or TOML file.
    #[arg(long)]
    scenario: String,
    /// Model kind (swe, swme1, swme2, swmegeneral, swlme, hswme, betahswme).
    #[arg(long)]
    model: Option<ModelKind>,
    /// Number of moments.
    #[arg(long = "N")]
    moments: Option<usize>,
    /// Spatial order (1 or 2).
    #[arg(long)]
    order: Option<u8>,
    /// Use the well-balanced reconstruction.
    #[arg(long, conflicts_with = "no_wb")]
    wb: bool,
    /// Use the trivial (non well-balanced) reconstruction.
    #[arg(long)]
    no_wb: bool,
    /// Number of cells.
    #[arg(long)]
    cells: Option<usize>,
    /// CFL number.
    #[arg(long)]
    cfl: Option<f64>,
    /// Final time.
    #[arg(long)]
    tend: Option<f64>,
    /// Output directory for CSV snapshots and the JSON manifest.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(source: &str) -> Result<Scenario> {
    Scenario::load(source).with_context(|| format!("loading scenario '{source}'"))
}

fn run(args: RunArgs) -> Result<()> {
    let mut s = load(&args.scenario)?;
    if let Some(m) = args.model {
        s.model = m;
    }
    if let Some(n) = args.moments {
        s.moments = n;
    }
    if let Some(o) = args.order {
        s.order = o;
    }
    if args.wb {
        s.well_balanced = true;
    }
    if args.no_wb {
        s.well_balanced = false;
    }
    if let Some(c) = args.cells {
        s.cells = c;
    }
    if let Some(c) = args.cfl {
        s.cfl = c;
    }
    if let Some(t) = args.tend {
        s.t_end = t;
    }
    let out = run_scenario(&s).with_context(|| format!("running scenario '{}'", s.name))?;
    println!(
        "{}: model={} N={} order={} wb={} cells={} steps={} t={} wall={:.2}s",
        s.name,
        s.model,
        s.moments,
        s.order,
        s.well_balanced,
        s.cells,
        out.stats.steps,
        out.stats.final_time,
        out.wall_seconds
    );
    println!(
        "L1 |W(T) - W(0)|: h={:.3e} u={:.3e}",
        out.errors.h, out.errors.u
    );
    for (j, e) in out.errors.alpha.iter().enumerate() {
        println!("  alpha{}={:.3e}", j + 1, e);
    }
    if let Some(dir) = args.out {
        write_run(&dir, &out).with_context(|| format!("writing output to {}", dir.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Tables { jobs, cells, out } => {
            let entries = tables(jobs, cells)?;
            print!("{}", format_tables(&entries));
            if let Some(path) = out {
                fs::write(&path, serde_json::to_string_pretty(&entries)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(())
        }
        Command::Compare {
            scenario,
            models,
            order,
            cells,
            out,
        } => {
            let mut s = load(&scenario)?;
            if let Some(o) = order {
                s.order = o;
            }
            if let Some(c) = cells {
                s.cells = c;
            }
            let cmp = compare_models(&s, &models)?;
            println!("{:<10} {:>14} {:>14}", "model", "shock x", "TV(alpha_N)");
            for ((run, x), tv) in cmp
                .runs
                .iter()
                .zip(&cmp.shock_positions)
                .zip(&cmp.last_moment_variation)
            {
                let x = x.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"));
                println!("{:<10} {:>14} {:>14.6e}", run.scenario.model, x, tv);
            }
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                for run in &cmp.runs {
                    let path = dir.join(format!("{}.csv", run.scenario.model));
                    write_csv(fs::File::create(&path)?, &run.grid, &run.solution)?;
                }
                write_comparison_csv(fs::File::create(dir.join("profiles.csv"))?, &cmp)?;
            }
            Ok(())
        }
        Command::ScanHyperbolicity {
            model,
            moments,
            h,
            u,
            gravity,
            range,
            samples,
            out,
        } => {
            let n = match model {
                ModelKind::Swe => 0,
                ModelKind::Swme1 => 1,
                ModelKind::Swme2 => 2,
                _ => moments,
            };
            let model = Model::new(model, n, gravity)?;
            let scan = hyperbolicity_scan(&model, h, u, (-range, range), (-range, range), samples)?;
            match out {
                Some(path) => write_scan_csv(fs::File::create(&path)?, &scan)?,
                None => write_scan_csv(std::io::stdout().lock(), &scan)?,
            }
            Ok(())
        }
    }
}
