//! Path-conservative finite-volume discretization: grid and topography,
//! generalized Roe averages, PVM-HLL fluctuations, well-balanced
//! reconstructions of order 1 and 2, and the semi-discrete right-hand side.

mod roe;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use roe::{path_mean_weight, pvm_hll_fluctuations, roe_averages, Fluctuations, RoeData};

use crate::error::{Error, Result};
use crate::models::{Model, StateVector};
use crate::steady::{
    classify_regime, constants_from_state, evaluate_steady_state_near, side_regime, FlowRegime,
};

/// Uniform 1D mesh of `cells` cells on `[x_min, x_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub cells: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, cells: usize) -> Result<Self> {
        if !(x_max > x_min) || cells == 0 {
            return Err(Error::Config(format!(
                "invalid grid [{x_min}, {x_max}] with {cells} cells"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            cells,
        })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.cells as f64
    }

    /// Centre of cell `i`; negative indices and `i ≥ cells` address ghost cells.
    pub fn center(&self, i: isize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    /// Position of interface `f`, between cells `f − 1` and `f`.
    pub fn face(&self, f: usize) -> f64 {
        self.x_min + f as f64 * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells as isize).map(|i| self.center(i)).collect()
    }
}

/// Analytic bottom topography.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topography {
    /// `b ≡ level`.
    Flat { level: f64 },
    /// `b = peak − (x − center)²` for `|x − center| < half_width`, continued
    /// constantly outside.
    Parabola {
        center: f64,
        peak: f64,
        half_width: f64,
    },
    /// `b = (height/2)(1 + cos(π (x − center)/half_width))` for
    /// `|x − center| < half_width`, zero outside.
    CosineBump {
        center: f64,
        half_width: f64,
        height: f64,
    },
}

impl Topography {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Topography::Flat { level } => level,
            Topography::Parabola {
                center,
                peak,
                half_width,
            } => {
                let r = (x - center).abs().min(half_width);
                peak - r * r
            }
            Topography::CosineBump {
                center,
                half_width,
                height,
            } => {
                let r = x - center;
                if r.abs() < half_width {
                    0.5 * height * (1.0 + (std::f64::consts::PI * r / half_width).cos())
                } else {
                    0.0
                }
            }
        }
    }
}

/// Cell averages of the conserved variables (row-major, `dim` per cell) and
/// the bottom sampled at cell centres.
#[derive(Clone, Debug, PartialEq)]
pub struct Cells {
    dim: usize,
    q: Vec<f64>,
    b: Vec<f64>,
}

impl Cells {
    pub fn new(dim: usize, q: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if dim == 0 || q.len() != dim * b.len() {
            return Err(Error::GridMismatch(format!(
                "{} values do not form {} cells of dimension {dim}",
                q.len(),
                b.len()
            )));
        }
        Ok(Self { dim, q, b })
    }

    pub fn from_states(states: &[StateVector]) -> Result<Self> {
        let dim = states.first().map(|s| s.conserved().len()).unwrap_or(2);
        let mut q = Vec::with_capacity(dim * states.len());
        for s in states {
            if s.conserved().len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: s.conserved().len(),
                });
            }
            q.extend_from_slice(s.conserved());
        }
        Ok(Self {
            dim,
            q,
            b: states.iter().map(|s| s.b).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self, i: usize) -> &[f64] {
        &self.q[i * self.dim..(i + 1) * self.dim]
    }

    pub fn b(&self, i: usize) -> f64 {
        self.b[i]
    }

    pub fn bottom(&self) -> &[f64] {
        &self.b
    }

    pub fn values(&self) -> &[f64] {
        &self.q
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.q
    }

    pub fn state(&self, i: usize) -> StateVector {
        StateVector::new(self.q(i).to_vec(), self.b[i]).expect("cell dimension is at least 2")
    }

    pub fn states(&self) -> Vec<StateVector> {
        (0..self.len()).map(|i| self.state(i)).collect()
    }
}

/// Spatial order of the scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeOrder {
    First,
    Second,
}

impl SchemeOrder {
    pub fn from_number(order: u8) -> Result<Self> {
        match order {
            1 => Ok(SchemeOrder::First),
            2 => Ok(SchemeOrder::Second),
            o => Err(Error::Config(format!(
                "scheme order must be 1 or 2, got {o}"
            ))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            SchemeOrder::First => 1,
            SchemeOrder::Second => 2,
        }
    }
}

/// Reconstructed interface states. Vectors are augmented with the bottom
/// elevation as their last component.
#[derive(Clone, Debug)]
pub struct ReconstructionPair {
    /// `W⁻_{f}`: the value at interface `f` seen from cell `f − 1`.
    pub minus: Vec<Vec<f64>>,
    /// `W⁺_{f}`: the value at interface `f` seen from cell `f`.
    pub plus: Vec<Vec<f64>>,
    /// Limited slope per cell (all zero for order 1).
    pub slopes: Vec<Vec<f64>>,
    /// Cells where no steady reference existed and the constant extension was used.
    pub fallback: Vec<bool>,
}

/// Diagnostics of one right-hand-side evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RhsDiagnostics {
    /// Interfaces where the topography correction was dropped.
    pub resonant_faces: usize,
    /// Cells that fell back to a constant reference state.
    pub fallback_cells: usize,
}

/// A complete spatial discretization.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub model: Model,
    pub grid: Grid,
    pub topography: Topography,
    pub order: SchemeOrder,
    pub well_balanced: bool,
}

/// Per-cell reconstruction: values at the left and right interfaces and the slope.
struct CellReconstruction {
    left: Vec<f64>,
    right: Vec<f64>,
    slope: Vec<f64>,
    fallback: bool,
}

/// `minmod(a, b, c)`: the smallest-magnitude argument if all share a sign, else 0.
pub fn minmod(a: f64, b: f64, c: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 {
        a.min(b).min(c)
    } else if a < 0.0 && b < 0.0 && c < 0.0 {
        a.max(b).max(c)
    } else {
        0.0
    }
}

impl Discretization {
    pub fn new(
        model: Model,
        grid: Grid,
        topography: Topography,
        order: SchemeOrder,
        well_balanced: bool,
    ) -> Result<Self> {
        if well_balanced && !model.kind().has_linear_moment_block() {
            return Err(Error::Config(format!(
                "well-balanced reconstruction needs smooth steady states, unavailable for model {}",
                model.kind()
            )));
        }
        Ok(Self {
            model,
            grid,
            topography,
            order,
            well_balanced,
        })
    }

    /// Cell averages sampled from a pointwise initial condition, with the
    /// bottom sampled at the centres.
    pub fn sample<F>(&self, init: F) -> Result<Cells>
    where
        F: Fn(f64, f64) -> Result<Vec<f64>>,
    {
        let dim = self.model.dim();
        let mut q = Vec::with_capacity(dim * self.grid.cells);
        let mut b = Vec::with_capacity(self.grid.cells);
        for x in self.grid.centers() {
            let bx = self.topography.eval(x);
            let state = init(x, bx)?;
            if state.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: state.len(),
                });
            }
            q.extend(state);
            b.push(bx);
        }
        Cells::new(dim, q, b)
    }

    fn check(&self, cells: &Cells) -> Result<()> {
        if cells.len() != self.grid.cells || cells.dim() != self.model.dim() {
            return Err(Error::GridMismatch(format!(
                "{} cells of dimension {} for a grid of {} cells and a model of dimension {}",
                cells.len(),
                cells.dim(),
                self.grid.cells,
                self.model.dim()
            )));
        }
        Ok(())
    }

    /// Augmented state `(q, b)` of cell `i`, with ghost cells copying the
    /// nearest interior cell.
    fn augmented(&self, cells: &Cells, i: isize) -> Vec<f64> {
        let j = i.clamp(0, cells.len() as isize - 1) as usize;
        let mut v = cells.q(j).to_vec();
        v.push(cells.b(j));
        v
    }

    fn regimes(&self, cells: &Cells) -> Result<Vec<FlowRegime>> {
        let g = self.model.gravity();
        (0..cells.len())
            .map(|i| classify_regime(&cells.state(i), g))
            .collect()
    }

    /// Steady reference of cell `i` evaluated at the given positions and
    /// branches. `None` when some evaluation has no steady solution.
    fn steady_reference(
        &self,
        cells: &Cells,
        i: usize,
        targets: &[(f64, FlowRegime)],
    ) -> Option<Vec<Vec<f64>>> {
        let g = self.model.gravity();
        let state = cells.state(i);
        let c = constants_from_state(&state, g).ok()?;
        targets
            .iter()
            .map(|&(x, regime)| {
                let b = self.topography.eval(x);
                let s = evaluate_steady_state_near(&c, b, regime, g, Some(state.h())).ok()?;
                let mut v = s.conserved().to_vec();
                v.push(b);
                Some(v)
            })
            .collect()
    }

    fn reconstruct_cell(
        &self,
        cells: &Cells,
        regimes: &[FlowRegime],
        i: usize,
    ) -> CellReconstruction {
        let n = cells.len();
        let ii = i as isize;
        let dx = self.grid.dx();
        let here = self.augmented(cells, ii);
        let left_nb = self.augmented(cells, ii - 1);
        let right_nb = self.augmented(cells, ii + 1);
        let second = self.order == SchemeOrder::Second;

        // Reference values at x_{i−1/2}, x_{i+1/2}, x_{i−1}, x_{i+1}.
        let mut fallback = false;
        let refs = if self.well_balanced {
            let r_left = side_regime(regimes[i.saturating_sub(1)]);
            let r_right = side_regime(regimes[(i + 1).min(n - 1)]);
            let mut targets = vec![
                (self.grid.face(i), r_left),
                (self.grid.face(i + 1), r_right),
            ];
            if second {
                targets.push((self.grid.center(ii - 1), r_left));
                targets.push((self.grid.center(ii + 1), r_right));
            }
            match self.steady_reference(cells, i, &targets) {
                Some(v) => Some(v),
                None => {
                    fallback = true;
                    None
                }
            }
        } else {
            None
        };
        let refs = refs.unwrap_or_else(|| vec![here.clone(); if second { 4 } else { 2 }]);

        let mut slope = vec![0.0; here.len()];
        if second {
            // Fluctuations about the reference; V_i = 0.
            for k in 0..here.len() {
                let v_left = left_nb[k] - refs[2][k];
                let v_right = right_nb[k] - refs[3][k];
                slope[k] = minmod(-v_left / dx, (v_right - v_left) / (2.0 * dx), v_right / dx);
            }
        }
        let half = 0.5 * dx;
        let left = refs[0]
            .iter()
            .zip(&slope)
            .map(|(w, s)| w - s * half)
            .collect();
        let right = refs[1]
            .iter()
            .zip(&slope)
            .map(|(w, s)| w + s * half)
            .collect();
        CellReconstruction {
            left,
            right,
            slope,
            fallback,
        }
    }

    /// Well-balanced (or, when disabled, trivial) reconstruction.
    pub fn reconstruct(&self, cells: &Cells) -> Result<ReconstructionPair> {
        self.check(cells)?;
        let n = cells.len();
        let regimes = if self.well_balanced {
            self.regimes(cells)?
        } else {
            Vec::new()
        };
        let recon: Vec<CellReconstruction> = (0..n)
            .into_par_iter()
            .map(|i| self.reconstruct_cell(cells, &regimes, i))
            .collect();
        let mut minus = Vec::with_capacity(n + 1);
        let mut plus = Vec::with_capacity(n + 1);
        minus.push(self.augmented(cells, -1));
        for r in &recon {
            plus.push(r.left.clone());
            minus.push(r.right.clone());
        }
        plus.push(self.augmented(cells, n as isize));
        Ok(ReconstructionPair {
            minus,
            plus,
            fallback: recon.iter().map(|r| r.fallback).collect(),
            slopes: recon.into_iter().map(|r| r.slope).collect(),
        })
    }

    /// First-order well-balanced reconstruction.
    pub fn wb_reconstruct_order1(&self, cells: &Cells) -> Result<ReconstructionPair> {
        let d = Self {
            order: SchemeOrder::First,
            well_balanced: true,
            ..self.clone()
        };
        d.reconstruct(cells)
    }

    /// Second-order well-balanced reconstruction.
    pub fn wb_reconstruct_order2(&self, cells: &Cells) -> Result<ReconstructionPair> {
        let d = Self {
            order: SchemeOrder::Second,
            well_balanced: true,
            ..self.clone()
        };
        d.reconstruct(cells)
    }

    /// Semi-discrete right-hand side `dW/dt`, written into `out`
    /// (same layout as the cell values).
    pub fn semidiscrete_rhs(&self, cells: &Cells, out: &mut [f64]) -> Result<RhsDiagnostics> {
        let recon = self.reconstruct(cells)?;
        let dim = self.model.dim();
        let dx = self.grid.dx();
        let faces: Vec<Fluctuations> = (0..=cells.len())
            .into_par_iter()
            .map(|f| {
                let (l, r) = (&recon.minus[f], &recon.plus[f]);
                pvm_hll_fluctuations(&self.model, &l[..dim], &r[..dim], l[dim], r[dim])
            })
            .collect::<Result<_>>()?;

        let volume: Vec<Option<Vec<f64>>> = if self.order == SchemeOrder::Second {
            (0..cells.len())
                .into_par_iter()
                .map(|i| self.volume_term(cells.q(i), &recon.slopes[i]))
                .collect::<Result<_>>()?
        } else {
            vec![None; cells.len()]
        };

        for (i, chunk) in out.chunks_exact_mut(dim).enumerate() {
            let dm = &faces[i + 1].minus;
            let dp = &faces[i].plus;
            for k in 0..dim {
                chunk[k] = -(dm[k] + dp[k]) / dx;
            }
            if let Some(v) = &volume[i] {
                for k in 0..dim {
                    chunk[k] -= v[k];
                }
            }
        }
        Ok(RhsDiagnostics {
            resonant_faces: faces.iter().filter(|f| f.resonant).count(),
            fallback_cells: recon.fallback.iter().filter(|&&f| f).count(),
        })
    }

    /// `𝒜(W_i) σ_i = A(W_i) σ_U − S(W_i) σ_b`; `None` when the slope vanishes.
    fn volume_term(&self, q: &[f64], slope: &[f64]) -> Result<Option<Vec<f64>>> {
        if slope.iter().all(|&s| s == 0.0) {
            return Ok(None);
        }
        let dim = self.model.dim();
        let a = self.model.system_matrix(q)?;
        let sigma = nalgebra::DVector::from_column_slice(&slope[..dim]);
        let mut v = a * sigma;
        v[1] += self.model.gravity() * q[0] * slope[dim];
        Ok(Some(v.iter().copied().collect()))
    }
}
