//! Scaled Legendre basis on the vertical coordinate `ζ ∈ [0, 1]`.
//!
//! The basis functions are `φ_j(ζ) = P_j(1 − 2ζ)`, where `P_j` is the
//! classical Legendre polynomial on `[-1, 1]`. This is the same polynomial as
//! the Rodrigues form `(1/j!) dʲ/dζʲ (ζ − ζ²)ʲ`, normalised so that
//! `φ_j(0) = 1` and `∫₀¹ φ_m φ_n dζ = δ_mn / (2n + 1)`.

mod quadrature;

pub use quadrature::{gauss_legendre, gauss_legendre_unit, AdaptiveGauss};

use crate::error::{Error, Result};
use crate::models::StateVector;

/// Basis of order `N` (the number of non-constant functions) together with a
/// quadrature rule that is exact for triple products of basis polynomials.
#[derive(Debug, Clone)]
pub struct BasisSet {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl BasisSet {
    pub fn new(order: usize) -> Self {
        // 2n - 1 >= 3N + 3 covers every integrand of the moment tensors.
        let n_nodes = (3 * order + 2).div_ceil(2) + 1;
        let (nodes, weights) = gauss_legendre_unit(n_nodes);
        Self {
            order,
            nodes,
            weights,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn quadrature(&self) -> (&[f64], &[f64]) {
        (&self.nodes, &self.weights)
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j > self.order {
            return Err(Error::BasisIndex {
                index: j,
                order: self.order,
            });
        }
        Ok(())
    }

    /// Value of `φ_j(ζ)`.
    pub fn eval_phi(&self, j: usize, zeta: f64) -> Result<f64> {
        self.check_index(j)?;
        Ok(legendre_table(j, 1.0 - 2.0 * zeta).0[j])
    }

    /// Derivative `φ_j'(ζ)`.
    pub fn eval_dphi(&self, j: usize, zeta: f64) -> Result<f64> {
        self.check_index(j)?;
        Ok(-2.0 * legendre_table(j, 1.0 - 2.0 * zeta).1[j])
    }

    /// Inner antiderivative `∫₀^ζ φ_j dζ'`.
    pub fn eval_phi_integral(&self, j: usize, zeta: f64) -> Result<f64> {
        self.check_index(j)?;
        Ok(phi_integral(j, zeta))
    }

    /// Reconstructs `u(ζ) = u_m + Σ α_j φ_j(ζ)`.
    pub fn velocity_at(&self, mean: f64, alpha: &[f64], zeta: f64) -> f64 {
        let (p, _) = legendre_table(alpha.len(), 1.0 - 2.0 * zeta);
        mean + alpha.iter().zip(&p[1..]).map(|(a, p)| a * p).sum::<f64>()
    }
}

/// `P_0..=P_n` and their derivatives at `x`, via Bonnet's recurrence.
fn legendre_table(n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; n + 2];
    let mut dp = vec![0.0; n + 2];
    p[0] = 1.0;
    p[1] = x;
    dp[1] = 1.0;
    for k in 1..=n {
        let kf = k as f64;
        p[k + 1] = ((2.0 * kf + 1.0) * x * p[k] - kf * p[k - 1]) / (kf + 1.0);
        dp[k + 1] = dp[k - 1] + (2.0 * kf + 1.0) * p[k];
    }
    p.truncate(n + 1);
    dp.truncate(n + 1);
    (p, dp)
}

fn phi_integral(j: usize, zeta: f64) -> f64 {
    if j == 0 {
        return zeta;
    }
    // ∫_x^1 P_j = (P_{j-1}(x) - P_{j+1}(x)) / (2j + 1) with x = 1 - 2ζ.
    let (p, _) = legendre_table(j + 1, 1.0 - 2.0 * zeta);
    (p[j - 1] - p[j + 1]) / (2.0 * (2.0 * j as f64 + 1.0))
}

/// Coupling tensors of the moment system, indexed `1..=N`.
///
/// * `A_ijk = (2i+1) ∫ φ_i φ_j φ_k`
/// * `B_ijk = (2i+1) ∫ φ_i' (∫₀^ζ φ_j) φ_k`
/// * `C_ij  = ∫ φ_i' φ_j'`
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTensors {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl MomentTensors {
    pub fn order(&self) -> usize {
        self.n
    }

    fn idx3(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(
            (1..=self.n).contains(&i) && (1..=self.n).contains(&j) && (1..=self.n).contains(&k)
        );
        ((i - 1) * self.n + (j - 1)) * self.n + (k - 1)
    }

    pub fn a(&self, i: usize, j: usize, k: usize) -> f64 {
        self.a[self.idx3(i, j, k)]
    }

    pub fn b(&self, i: usize, j: usize, k: usize) -> f64 {
        self.b[self.idx3(i, j, k)]
    }

    pub fn c(&self, i: usize, j: usize) -> f64 {
        self.c[(i - 1) * self.n + (j - 1)]
    }
}

pub fn compute_moment_tensors(basis: &BasisSet) -> MomentTensors {
    let n = basis.order();
    let (nodes, weights) = basis.quadrature();
    let mut a = vec![0.0; n * n * n];
    let mut b = vec![0.0; n * n * n];
    let mut c = vec![0.0; n * n];
    for (&z, &w) in nodes.iter().zip(weights) {
        let (p, dp) = legendre_table(n, 1.0 - 2.0 * z);
        let dphi: Vec<f64> = dp.iter().map(|d| -2.0 * d).collect();
        let integ: Vec<f64> = (0..=n).map(|j| phi_integral(j, z)).collect();
        for i in 1..=n {
            let wi = w * (2.0 * i as f64 + 1.0);
            for j in 1..=n {
                c[(i - 1) * n + (j - 1)] += w * dphi[i] * dphi[j];
                for k in 1..=n {
                    let at = ((i - 1) * n + (j - 1)) * n + (k - 1);
                    a[at] += wi * p[i] * p[j] * p[k];
                    b[at] += wi * dphi[i] * integ[j] * p[k];
                }
            }
        }
    }
    MomentTensors { n, a, b, c }
}

/// Mean velocity and moment coefficients of a vertical velocity profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCoefficients {
    pub mean: f64,
    pub alpha: Vec<f64>,
}

/// Projects `u0(ζ)` onto the basis:
/// `u_m = ∫₀¹ u0`, `α_i = (2i+1) ∫₀¹ u0 φ_i`.
///
/// Integration is adaptive so that profiles with singular derivatives (such
/// as `√ζ`) are resolved to roughly `1e-12`.
pub fn project_profile<F: Fn(f64) -> f64>(u0: F, basis: &BasisSet) -> Result<ProfileCoefficients> {
    const TOL: f64 = 1e-13;
    let quad = AdaptiveGauss::default();
    let mean = quad.integrate(&u0, 0.0, 1.0, TOL)?;
    let alpha = (1..=basis.order())
        .map(|i| {
            let weight = 2.0 * i as f64 + 1.0;
            quad.integrate(
                |z| u0(z) * legendre_table(i, 1.0 - 2.0 * z).0[i],
                0.0,
                1.0,
                TOL,
            )
            .map(|v| weight * v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProfileCoefficients { mean, alpha })
}

/// Coupling constant `a_{i,j}` of the explicit friction term.
pub fn friction_coupling(i: usize, j: usize) -> f64 {
    if (i + j).is_multiple_of(2) {
        return 0.0;
    }
    let m = (i - 1).min(j) as f64;
    m * (m + 1.0) / 2.0
}

/// Newtonian friction with slip at the bottom, as a source vector of length
/// `N + 2` in conserved ordering `(h, hu, hα_1, …, hα_N)`.
///
/// Row `k` of the moment hierarchy (`k = 0` is momentum) reads
/// `-(ν/λ)(2k+1)(u_m + Σα_j) - (ν/h) 4(2k+1) Σ_j a_{k+1,j} α_j`.
pub fn friction_source(state: &StateVector, viscosity: f64, slip_length: f64) -> Result<Vec<f64>> {
    let h = state.h();
    if h <= 0.0 {
        return Err(Error::DryState { h });
    }
    let n = state.order();
    let mut out = vec![0.0; n + 2];
    if viscosity == 0.0 {
        return Ok(out);
    }
    let u = state.velocity();
    let alpha: Vec<f64> = (1..=n).map(|j| state.alpha(j)).collect();
    let bottom = u + alpha.iter().sum::<f64>();
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        let row = k - 1;
        let weight = 2.0 * row as f64 + 1.0;
        let coupling: f64 = alpha
            .iter()
            .enumerate()
            .map(|(jm1, a)| friction_coupling(row + 1, jm1 + 1) * a)
            .sum();
        *slot = -(viscosity / slip_length) * weight * bottom
            - (viscosity / h) * 4.0 * weight * coupling;
    }
    Ok(out)
}
