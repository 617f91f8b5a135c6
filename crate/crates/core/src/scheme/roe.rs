//! Generalized Roe linearization and PVM-HLL fluctuations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::models::{linear_moment_spectrum, Model, Primitives};

/// Interface averages and the assembled Roe-type matrices.
#[derive(Clone, Debug)]
pub struct RoeData {
    /// Arithmetic mean height.
    pub h: f64,
    /// `√h`-weighted mean velocity.
    pub u: f64,
    /// `√h`-weighted mean moments.
    pub alpha: Vec<f64>,
    /// Path mean of the velocity along the straight segment in conserved variables.
    pub u_b: f64,
    /// Path means of the moments.
    pub alpha_b: Vec<f64>,
    /// `A = J(h, u, α) + B_b`.
    pub a: DMatrix<f64>,
    /// `B_b = ∫₀¹ B(Ψ(s)) ds`.
    pub b: DMatrix<f64>,
    /// `S = (0, −g (h_l + h_r)/2, 0, …)`.
    pub s: DVector<f64>,
    /// Smallest and largest (real part of the) eigenvalue of `A`.
    pub s_left: f64,
    pub s_right: f64,
}

/// Weight `I` of the left state in the mean of a primitive `q/h` along the
/// linear path: `∫₀¹ q(s)/h(s) ds = I p_l + (1 − I) p_r`, with
/// `I = ((1 + d) ln(1 + d) − d)/d²`, `d = h_r/h_l − 1`.
pub fn path_mean_weight(h_l: f64, h_r: f64) -> f64 {
    let d = h_r / h_l - 1.0;
    if d.abs() < 0.1 {
        // I = Σ_{k≥0} (−d)^k / ((k+1)(k+2)), summed by Horner's rule.
        let mut acc = 0.0;
        for m in (2..=24).rev() {
            let m = m as f64;
            acc = 1.0 / (m * (m - 1.0)) - d * acc;
        }
        acc
    } else {
        ((1.0 + d) * d.ln_1p() - d) / (d * d)
    }
}

/// Roe averages of two states (given as conserved vectors).
pub fn roe_averages(model: &Model, q_l: &[f64], q_r: &[f64]) -> Result<RoeData> {
    let pl = model.primitives(q_l)?;
    let pr = model.primitives(q_r)?;
    let (sl, sr) = (pl.h.sqrt(), pr.h.sqrt());
    let w = sl / (sl + sr);
    let roe = Primitives {
        h: 0.5 * (pl.h + pr.h),
        u: w * pl.u + (1.0 - w) * pr.u,
        alpha: pl
            .alpha
            .iter()
            .zip(&pr.alpha)
            .map(|(a, b)| w * a + (1.0 - w) * b)
            .collect(),
    };
    let i = path_mean_weight(pl.h, pr.h);
    let u_b = i * pl.u + (1.0 - i) * pr.u;
    let alpha_b: Vec<f64> = pl
        .alpha
        .iter()
        .zip(&pr.alpha)
        .map(|(a, b)| i * a + (1.0 - i) * b)
        .collect();
    let b = model.nonconservative_from(u_b, &alpha_b);
    let a = model.jacobian_from(&roe) + &b;
    let mut s = DVector::zeros(model.dim());
    s[1] = -model.gravity() * roe.h;
    let (s_left, s_right) = if model.kind().has_linear_moment_block() {
        let c = 2.0 * roe.u - u_b;
        extreme_real_parts(&linear_moment_spectrum(model.gravity(), &roe, c))
    } else {
        extreme_real_parts(&linalg::eigenvalues(&a)?)
    };
    Ok(RoeData {
        h: roe.h,
        u: roe.u,
        alpha: roe.alpha,
        u_b,
        alpha_b,
        a,
        b,
        s,
        s_left,
        s_right,
    })
}

fn extreme_real_parts(ev: &[num_complex::Complex64]) -> (f64, f64) {
    ev.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| {
            (lo.min(z.re), hi.max(z.re))
        })
}

/// Left- and right-going fluctuations at one interface.
#[derive(Clone, Debug)]
pub struct Fluctuations {
    pub minus: DVector<f64>,
    pub plus: DVector<f64>,
    /// The topography correction `A⁻¹ S Δb` had to be dropped because `A`
    /// is singular and the system is inconsistent.
    pub resonant: bool,
}

/// PVM-HLL fluctuations
/// `D± = ½[ΔF + B ΔU − S Δb ± Q (ΔU − A⁻¹ S Δb)]`, `Q = a0 I + a1 A`.
pub fn pvm_hll_fluctuations(
    model: &Model,
    q_l: &[f64],
    q_r: &[f64],
    b_l: f64,
    b_r: f64,
) -> Result<Fluctuations> {
    let roe = roe_averages(model, q_l, q_r)?;
    let pl = model.primitives(q_l)?;
    let pr = model.primitives(q_r)?;
    let dq = DVector::from_iterator(q_l.len(), q_r.iter().zip(q_l).map(|(r, l)| r - l));
    let db = b_r - b_l;
    let (sl, sr) = (roe.s_left, roe.s_right);
    let width = sr - sl;
    if !(width > f64::EPSILON * sl.abs().max(sr.abs())) {
        return Err(Error::DegenerateWaves { speed: sr });
    }
    let a0 = (sr * sl.abs() - sl * sr.abs()) / width;
    let a1 = (sr.abs() - sl.abs()) / width;

    let mut central = model.flux_from(&pr) - model.flux_from(&pl) + &roe.b * &dq;
    let mut viscous_arg = dq;
    let mut resonant = false;
    if db != 0.0 {
        let sdb = &roe.s * db;
        central -= &sdb;
        match linalg::solve_consistent(&roe.a, &sdb) {
            Some(x) => viscous_arg -= x,
            None => resonant = true,
        }
    }
    let viscous = &viscous_arg * a0 + &roe.a * &viscous_arg * a1;
    Ok(Fluctuations {
        minus: (&central - &viscous) * 0.5,
        plus: (central + viscous) * 0.5,
        resonant,
    })
}
