//! Explicit time integration with CFL-controlled global time steps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheme::{Cells, Discretization, SchemeOrder};

/// Time-stepping method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeMethod {
    /// Forward Euler (first order).
    Euler,
    /// Two-stage strong-stability-preserving Runge–Kutta (second order).
    SspRk2,
}

impl TimeMethod {
    /// The method matching a spatial order.
    pub fn for_order(order: SchemeOrder) -> Self {
        match order {
            SchemeOrder::First => TimeMethod::Euler,
            SchemeOrder::Second => TimeMethod::SspRk2,
        }
    }
}

/// Time-stepping parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeStepper {
    pub method: TimeMethod,
    pub cfl: f64,
    pub t_end: f64,
}

/// Summary of an integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RunStats {
    pub steps: usize,
    pub final_time: f64,
    /// Interface evaluations that dropped the topography correction.
    pub resonant_faces: usize,
    /// Cell reconstructions that fell back to a constant reference.
    pub fallback_cells: usize,
}

/// `Δt = CFL·Δx / max_i max_k |λ_k(U_i)|`, falling back to
/// `CFL·Δx/√(g·max h)` when every characteristic speed vanishes.
pub fn compute_dt(cells: &Cells, disc: &Discretization, cfl: f64) -> Result<f64> {
    let model = &disc.model;
    let dx = disc.grid.dx();
    let mut max_speed: f64 = 0.0;
    let mut max_h: f64 = 0.0;
    for i in 0..cells.len() {
        let q = cells.q(i);
        max_speed = max_speed.max(model.max_speed(q)?);
        max_h = max_h.max(q[0]);
    }
    if max_speed > 0.0 {
        Ok(cfl * dx / max_speed)
    } else {
        Ok(cfl * dx / (model.gravity() * max_h).sqrt())
    }
}

/// Advances `values` by one step of `method` for the ODE `w' = rhs(w)`.
/// The SSP-RK2 step is the convex combination `½ w⁰ + ½ (w¹ + Δt L(w¹))`
/// of two forward Euler steps.
pub fn advance<F>(values: &mut [f64], dt: f64, method: TimeMethod, mut rhs: F) -> Result<()>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let r0 = rhs(values)?;
    let start = (method == TimeMethod::SspRk2).then(|| values.to_vec());
    for (w, r) in values.iter_mut().zip(&r0) {
        *w += dt * r;
    }
    if let Some(start) = start {
        let r1 = rhs(values)?;
        for ((w, w0), r) in values.iter_mut().zip(&start).zip(&r1) {
            *w = 0.5 * w0 + 0.5 * (*w + dt * r);
        }
    }
    Ok(())
}

fn check_depth(disc: &Discretization, cells: &Cells, t: f64) -> Result<()> {
    for i in 0..cells.len() {
        let h = cells.q(i)[0];
        if !(h > 0.0) {
            return Err(Error::NegativeDepth {
                h,
                x: disc.grid.center(i as isize),
                t,
            });
        }
    }
    Ok(())
}

/// Advances `cells` by one step of size `dt`. The bottom is never modified.
pub fn step(
    disc: &Discretization,
    cells: &mut Cells,
    dt: f64,
    method: TimeMethod,
    stats: &mut RunStats,
) -> Result<()> {
    let dim = cells.dim();
    let bottom = cells.bottom().to_vec();
    advance(cells.values_mut(), dt, method, |w| {
        let stage = Cells::new(dim, w.to_vec(), bottom.clone())?;
        let mut out = vec![0.0; w.len()];
        let diag = disc.semidiscrete_rhs(&stage, &mut out)?;
        stats.resonant_faces += diag.resonant_faces;
        stats.fallback_cells += diag.fallback_cells;
        Ok(out)
    })
}

/// Integrates from `t = 0` to `stepper.t_end`, landing exactly on the end time.
pub fn integrate(
    disc: &Discretization,
    cells: &mut Cells,
    stepper: &TimeStepper,
) -> Result<RunStats> {
    let mut stats = RunStats::default();
    let mut t = 0.0;
    check_depth(disc, cells, t)?;
    while t < stepper.t_end {
        let mut dt = compute_dt(cells, disc, stepper.cfl)?;
        let last = t + dt >= stepper.t_end;
        if last {
            dt = stepper.t_end - t;
        }
        step(disc, cells, dt, stepper.method, &mut stats)?;
        t = if last { stepper.t_end } else { t + dt };
        stats.steps += 1;
        check_depth(disc, cells, t)?;
    }
    stats.final_time = t;
    Ok(stats)
}
