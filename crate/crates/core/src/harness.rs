//! Scenario definitions, runs, error norms and CSV/JSON output.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{project_profile, BasisSet};
use crate::error::{Error, Result};
use crate::models::{Model, ModelKind, StateVector};
use crate::scheme::{Cells, Discretization, Grid, SchemeOrder, Topography};
use crate::steady::{evaluate_steady_state, FlowRegime, SteadyConstants};
use crate::timeint::{integrate, RunStats, TimeMethod, TimeStepper};

/// Gravity used by the steady-state benchmarks.
pub const STEADY_GRAVITY: f64 = 9.812;

/// Branch used to build a steady initial condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SteadyBranch {
    Subcritical,
    Supercritical,
    /// Subcritical for `x < crest`, supercritical for `x > crest`.
    Transcritical {
        crest: f64,
    },
}

/// Initial velocity profile of a dam break.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VelocityProfile {
    /// Mean velocity `mean`, `α_1 = first`, `α_N = last`, other moments zero.
    Moments { mean: f64, first: f64, last: f64 },
    /// `u(ζ) = scale·√ζ`, projected onto the moment basis.
    Sqrt { scale: f64 },
}

/// Initial condition of a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// Still water with free surface `h + b = level`.
    LakeAtRest { level: f64 },
    /// Smooth steady state with constants `C1`, `C2` and `C_{j+2} = moment_ratio`.
    Steady {
        c1: f64,
        c2: f64,
        moment_ratio: f64,
        branch: SteadyBranch,
    },
    /// `h = h_left` for `x < x0`, `h_right` otherwise, with a uniform velocity profile.
    DamBreak {
        x0: f64,
        h_left: f64,
        h_right: f64,
        profile: VelocityProfile,
    },
}

/// A complete, declarative run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub x_min: f64,
    pub x_max: f64,
    pub cells: usize,
    pub topography: Topography,
    pub initial: InitialCondition,
    pub model: ModelKind,
    /// Number of moments `N`.
    pub moments: usize,
    pub gravity: f64,
    pub cfl: f64,
    pub t_end: f64,
    /// Spatial order, 1 or 2.
    pub order: u8,
    pub well_balanced: bool,
}

fn bump() -> Topography {
    Topography::CosineBump {
        center: 1.5,
        half_width: 0.2,
        height: 0.5,
    }
}

impl Scenario {
    /// Names of the built-in scenarios.
    pub const BUILTIN: [&'static str; 6] = ["test1", "test2", "test3", "test4", "test5", "test6"];

    /// One of the built-in benchmark scenarios `test1` … `test6`.
    pub fn builtin(name: &str) -> Result<Self> {
        let steady = |name: &str, initial: InitialCondition| Scenario {
            name: name.to_string(),
            x_min: 0.0,
            x_max: 3.0,
            cells: 1000,
            topography: bump(),
            initial,
            model: ModelKind::Swlme,
            moments: 8,
            gravity: STEADY_GRAVITY,
            cfl: 0.5,
            t_end: 0.5,
            order: 1,
            well_balanced: true,
        };
        let dam_break = |name: &str, profile: VelocityProfile| Scenario {
            name: name.to_string(),
            x_min: -0.4,
            x_max: 0.4,
            cells: 1000,
            topography: Topography::Flat { level: 0.0 },
            initial: InitialCondition::DamBreak {
                x0: 0.0,
                h_left: 5.0,
                h_right: 1.0,
                profile,
            },
            model: ModelKind::Swlme,
            moments: 8,
            gravity: 1.0,
            cfl: 0.5,
            t_end: 0.1,
            order: 1,
            well_balanced: false,
        };
        Ok(match name {
            "test1" => Scenario {
                x_min: -1.0,
                x_max: 1.0,
                topography: Topography::Parabola {
                    center: 0.0,
                    peak: 2.0,
                    half_width: 0.5,
                },
                ..steady("test1", InitialCondition::LakeAtRest { level: 3.0 })
            },
            "test2" => steady(
                "test2",
                InitialCondition::Steady {
                    c1: 3.5,
                    c2: 21.15525,
                    moment_ratio: 0.0,
                    branch: SteadyBranch::Subcritical,
                },
            ),
            "test3" => steady(
                "test3",
                InitialCondition::Steady {
                    c1: 2.5,
                    c2: 17.56957396120237,
                    moment_ratio: 0.0,
                    branch: SteadyBranch::Transcritical { crest: 1.5 },
                },
            ),
            "test4" => steady(
                "test4",
                InitialCondition::Steady {
                    c1: 3.5,
                    c2: 21.15525,
                    moment_ratio: 0.25,
                    branch: SteadyBranch::Subcritical,
                },
            ),
            "test5" => dam_break(
                "test5",
                VelocityProfile::Moments {
                    mean: 0.25,
                    first: -0.25,
                    last: 0.25,
                },
            ),
            "test6" => dam_break("test6", VelocityProfile::Sqrt { scale: 1.5 }),
            other => {
                return Err(Error::Config(format!(
                    "unknown scenario '{other}' (built-in: {})",
                    Self::BUILTIN.join(", ")
                )))
            }
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// A built-in name or a path to a TOML scenario file.
    pub fn load(source: &str) -> Result<Self> {
        if Self::BUILTIN.contains(&source) {
            return Self::builtin(source);
        }
        if !Path::new(source).is_file() {
            return Err(Error::Config(format!(
                "unknown scenario '{source}': neither a built-in ({}) nor a scenario file",
                Self::BUILTIN.join(", ")
            )));
        }
        Self::from_toml_str(&fs::read_to_string(source)?)
    }

    pub fn model(&self) -> Result<Model> {
        Model::new(self.model, self.moments, self.gravity)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.x_min, self.x_max, self.cells)
    }

    pub fn discretization(&self) -> Result<Discretization> {
        Discretization::new(
            self.model()?,
            self.grid()?,
            self.topography.clone(),
            SchemeOrder::from_number(self.order)?,
            self.well_balanced,
        )
    }

    pub fn stepper(&self) -> Result<TimeStepper> {
        if !(self.cfl > 0.0 && self.t_end >= 0.0) {
            return Err(Error::Config(format!(
                "need cfl > 0 and t_end ≥ 0, got cfl = {}, t_end = {}",
                self.cfl, self.t_end
            )));
        }
        Ok(TimeStepper {
            method: TimeMethod::for_order(SchemeOrder::from_number(self.order)?),
            cfl: self.cfl,
            t_end: self.t_end,
        })
    }

    /// Point values of the initial condition at the cell centres.
    pub fn initial_cells(&self, disc: &Discretization) -> Result<Cells> {
        let n = self.moments;
        let g = self.gravity;
        match &self.initial {
            InitialCondition::LakeAtRest { level } => disc.sample(|_, b| {
                Ok(
                    StateVector::from_primitives(level - b, 0.0, &vec![0.0; n], b)
                        .conserved()
                        .to_vec(),
                )
            }),
            InitialCondition::Steady {
                c1,
                c2,
                moment_ratio,
                branch,
            } => {
                let constants = SteadyConstants {
                    c1: *c1,
                    c2: *c2,
                    ratios: vec![*moment_ratio; n],
                };
                disc.sample(|x, b| {
                    let regime = match branch {
                        SteadyBranch::Subcritical => FlowRegime::Subcritical,
                        SteadyBranch::Supercritical => FlowRegime::Supercritical,
                        SteadyBranch::Transcritical { crest } if x < *crest => {
                            FlowRegime::Subcritical
                        }
                        SteadyBranch::Transcritical { .. } => FlowRegime::Supercritical,
                    };
                    Ok(evaluate_steady_state(&constants, b, regime, g)?
                        .conserved()
                        .to_vec())
                })
            }
            InitialCondition::DamBreak {
                x0,
                h_left,
                h_right,
                profile,
            } => {
                let (mean, alpha) = match *profile {
                    VelocityProfile::Moments { mean, first, last } => {
                        let mut alpha = vec![0.0; n];
                        if n > 0 {
                            alpha[0] = first;
                            alpha[n - 1] = last;
                        }
                        (mean, alpha)
                    }
                    VelocityProfile::Sqrt { scale } => {
                        let p = project_profile(|z: f64| scale * z.sqrt(), &BasisSet::new(n))?;
                        (p.mean, p.alpha)
                    }
                };
                disc.sample(|x, b| {
                    let h = if x < *x0 { *h_left } else { *h_right };
                    Ok(StateVector::from_primitives(h, mean, &alpha, b)
                        .conserved()
                        .to_vec())
                })
            }
        }
    }
}

/// L¹ errors per variable, computed on primitives as `Δx Σ |a − b|`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub h: f64,
    pub u: f64,
    pub alpha: Vec<f64>,
}

impl ErrorReport {
    /// Largest error over all moments (0 without moments).
    pub fn alpha_max(&self) -> f64 {
        self.alpha.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest error over all moments (0 without moments).
    pub fn alpha_min(&self) -> f64 {
        self.alpha.iter().copied().reduce(f64::min).unwrap_or(0.0)
    }
}

/// L¹ distance between two solutions on the same grid.
pub fn l1_error(grid: &Grid, a: &Cells, b: &Cells) -> Result<ErrorReport> {
    if a.len() != b.len() || a.dim() != b.dim() || a.len() != grid.cells {
        return Err(Error::GridMismatch(format!(
            "cannot compare {}×{} with {}×{} on a {}-cell grid",
            a.len(),
            a.dim(),
            b.len(),
            b.dim(),
            grid.cells
        )));
    }
    let dx = grid.dx();
    let n = a.dim() - 2;
    let mut report = ErrorReport {
        alpha: vec![0.0; n],
        ..Default::default()
    };
    for i in 0..a.len() {
        let (qa, qb) = (a.q(i), b.q(i));
        report.h += dx * (qa[0] - qb[0]).abs();
        report.u += dx * (qa[1] / qa[0] - qb[1] / qb[0]).abs();
        for j in 0..n {
            report.alpha[j] += dx * (qa[j + 2] / qa[0] - qb[j + 2] / qb[0]).abs();
        }
    }
    Ok(report)
}

/// Result of one scenario run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub scenario: Scenario,
    pub grid: Grid,
    pub initial: Cells,
    pub solution: Cells,
    pub stats: RunStats,
    /// Difference between final and initial state.
    pub errors: ErrorReport,
    pub wall_seconds: f64,
}

/// Builds the initial condition and integrates to the end time.
pub fn run_scenario(s: &Scenario) -> Result<RunOutput> {
    let disc = s.discretization()?;
    let stepper = s.stepper()?;
    let initial = s.initial_cells(&disc)?;
    let mut solution = initial.clone();
    let start = Instant::now();
    let stats = integrate(&disc, &mut solution, &stepper)?;
    let wall_seconds = start.elapsed().as_secs_f64();
    let errors = l1_error(&disc.grid, &solution, &initial)?;
    Ok(RunOutput {
        scenario: s.clone(),
        grid: disc.grid,
        initial,
        solution,
        stats,
        errors,
        wall_seconds,
    })
}

/// Writes cell data as CSV with header `x,b,h,hu,halpha1..halphaN`.
pub fn write_csv<W: Write>(out: W, grid: &Grid, cells: &Cells) -> Result<()> {
    let n = cells.dim() - 2;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["x".to_string(), "b".into(), "h".into(), "hu".into()];
    header.extend((1..=n).map(|j| format!("halpha{j}")));
    w.write_record(&header)?;
    for i in 0..cells.len() {
        w.serialize((grid.center(i as isize), cells.b(i), cells.q(i)))?;
    }
    w.flush()?;
    Ok(())
}

/// `git describe` of the working directory, or `"unknown"`.
pub fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| "unknown".to_string())
}

/// JSON manifest accompanying a run's CSV output.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest<'a> {
    pub scenario: &'a Scenario,
    pub git_describe: String,
    pub wall_seconds: f64,
    pub stats: RunStats,
    pub errors: &'a ErrorReport,
}

/// Writes `initial.csv`, `final.csv` and `manifest.json` into `dir`.
pub fn write_run(dir: &Path, run: &RunOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(
        fs::File::create(dir.join("initial.csv"))?,
        &run.grid,
        &run.initial,
    )?;
    write_csv(
        fs::File::create(dir.join("final.csv"))?,
        &run.grid,
        &run.solution,
    )?;
    let manifest = RunManifest {
        scenario: &run.scenario,
        git_describe: git_describe(),
        wall_seconds: run.wall_seconds,
        stats: run.stats,
        errors: &run.errors,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(dir.join("manifest.json"), json)?;
    Ok(())
}

/// Total variation `Σ |v_{i+1} − v_i|`.
pub fn total_variation(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Primitive profile `q_k / h` of component `k` (1 = velocity, `j + 1` = `α_j`).
pub fn primitive_profile(cells: &Cells, k: usize) -> Vec<f64> {
    (0..cells.len())
        .map(|i| cells.q(i)[k] / cells.q(i)[0])
        .collect()
}

/// Position of the right-going shock front: the rightmost point where the
/// height crosses the mean of its maximum right of `x_from` and the
/// undisturbed value in the last cell, located by linear interpolation.
pub fn shock_position(grid: &Grid, cells: &Cells, x_from: f64) -> Option<f64> {
    let h: Vec<f64> = (0..cells.len()).map(|i| cells.q(i)[0]).collect();
    let x = grid.centers();
    let start = x.iter().position(|&xi| xi > x_from)?;
    let ambient = *h.last()?;
    let peak = h[start..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > ambient) {
        return None;
    }
    let level = 0.5 * (peak + ambient);
    (start..h.len() - 1)
        .rev()
        .find(|&i| h[i] >= level && h[i + 1] < level)
        .map(|i| x[i] + (h[i] - level) / (h[i] - h[i + 1]) * (x[i + 1] - x[i]))
}

/// Result of running one scenario with several models.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub runs: Vec<RunOutput>,
    /// Right-going shock position per run.
    pub shock_positions: Vec<Option<f64>>,
    /// Total variation of `α_N` per run.
    pub last_moment_variation: Vec<f64>,
}

/// Runs `base` once per model kind (same grid, order and `N`).
pub fn compare_models(base: &Scenario, kinds: &[ModelKind]) -> Result<Comparison> {
    let runs: Vec<RunOutput> = kinds
        .par_iter()
        .map(|&kind| {
            run_scenario(&Scenario {
                model: kind,
                name: format!("{}-{}", base.name, kind),
                ..base.clone()
            })
        })
        .collect::<Result<_>>()?;
    let shock_positions = runs
        .iter()
        .map(|r| shock_position(&r.grid, &r.solution, 0.0))
        .collect();
    let last_moment_variation = runs
        .iter()
        .map(|r| {
            let n = r.solution.dim() - 2;
            if n == 0 {
                0.0
            } else {
                total_variation(&primitive_profile(&r.solution, n + 1))
            }
        })
        .collect();
    Ok(Comparison {
        runs,
        shock_positions,
        last_moment_variation,
    })
}

/// Writes aligned primitive profiles `x, h_<model>, u_<model>, alpha1_<model>,
/// alphaN_<model>, …` of a comparison.
pub fn write_comparison_csv<W: Write>(out: W, cmp: &Comparison) -> Result<()> {
    let Some(first) = cmp.runs.first() else {
        return Ok(());
    };
    let n = first.solution.dim() - 2;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["x".to_string()];
    for r in &cmp.runs {
        let m = r.scenario.model;
        header.extend([format!("h_{m}"), format!("u_{m}")]);
        if n > 0 {
            header.extend([format!("alpha1_{m}"), format!("alpha{n}_{m}")]);
        }
    }
    w.write_record(&header)?;
    for i in 0..first.grid.cells {
        let mut row = vec![first.grid.center(i as isize)];
        for r in &cmp.runs {
            let q = r.solution.q(i);
            row.extend([q[0], q[1] / q[0]]);
            if n > 0 {
                row.extend([q[2] / q[0], q[n + 1] / q[0]]);
            }
        }
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// One entry of the well-balancing tables.
#[derive(Clone, Debug, Serialize)]
pub struct TableEntry {
    pub scenario: String,
    pub well_balanced: bool,
    pub order: u8,
    pub errors: ErrorReport,
    pub wall_seconds: f64,
}

/// Runs tests 1–4 with well-balanced and trivial reconstruction at orders
/// 1 and 2, on `jobs` worker threads. `cells` overrides the default mesh.
pub fn tables(jobs: usize, cells: Option<usize>) -> Result<Vec<TableEntry>> {
    let mut configs = Vec::new();
    for name in ["test1", "test2", "test3", "test4"] {
        for wb in [true, false] {
            for order in [1u8, 2] {
                let base = Scenario::builtin(name)?;
                configs.push(Scenario {
                    well_balanced: wb,
                    order,
                    cells: cells.unwrap_or(base.cells),
                    ..base
                });
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| {
        configs
            .par_iter()
            .map(|s| {
                let run = run_scenario(s)?;
                Ok(TableEntry {
                    scenario: s.name.clone(),
                    well_balanced: s.well_balanced,
                    order: s.order,
                    errors: run.errors,
                    wall_seconds: run.wall_seconds,
                })
            })
            .collect()
    })
}

/// Formats table entries grouped per scenario, one row per reconstruction.
pub fn format_tables(entries: &[TableEntry]) -> String {
    let mut out = String::new();
    let mut names: Vec<&str> = entries.iter().map(|e| e.scenario.as_str()).collect();
    names.dedup();
    for name in names {
        out.push_str(&format!(
            "{name}\n{:<18} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
            "scheme", "h (1st)", "u (1st)", "alpha (1st)", "h (2nd)", "u (2nd)", "alpha (2nd)"
        ));
        for wb in [true, false] {
            let label = if wb {
                "well-balanced"
            } else {
                "non well-balanced"
            };
            let mut line = format!("{label:<18}");
            for order in [1u8, 2] {
                if let Some(e) = entries
                    .iter()
                    .find(|e| e.scenario == name && e.well_balanced == wb && e.order == order)
                {
                    line.push_str(&format!(
                        " {:>10.2e} {:>10.2e} {:>10.2e}",
                        e.errors.h,
                        e.errors.u,
                        e.errors.alpha_max()
                    ));
                }
            }
            out.push_str(&line);
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
