//! Gauss–Legendre rules and an adaptive composite integrator.

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Nodes are computed by Newton iteration on `P_n` from Chebyshev-type
/// initial guesses and are returned in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.iter().map(|&t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|&v| 0.5 * v).collect(),
    )
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Adaptive composite Gauss–Legendre integration of `f` over `[a, b]`.
///
/// Each panel is integrated with a 15-point rule and compared against the sum
/// over its two halves; panels are bisected until the difference is below the
/// panel's share of `tol` (an absolute tolerance).
pub struct AdaptiveGauss {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    max_depth: usize,
}

impl Default for AdaptiveGauss {
    fn default() -> Self {
        let (nodes, weights) = gauss_legendre(15);
        Self {
            nodes,
            weights,
            max_depth: 60,
        }
    }
}

impl AdaptiveGauss {
    fn panel<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
        let whole = self.panel(&f, a, b);
        let mut stack = vec![(a, b, whole, 0usize)];
        let mut total = 0.0;
        let mut worst: f64 = 0.0;
        let length = (b - a).abs();
        while let Some((lo, hi, estimate, depth)) = stack.pop() {
            let mid = 0.5 * (lo + hi);
            let left = self.panel(&f, lo, mid);
            let right = self.panel(&f, mid, hi);
            let refined = left + right;
            let err = (refined - estimate).abs();
            let share = tol * ((hi - lo).abs() / length).max(1e-3);
            if err <= share {
                total += refined;
            } else if depth >= self.max_depth {
                worst = worst.max(err);
                total += refined;
            } else {
                stack.push((lo, mid, left, depth + 1));
                stack.push((mid, hi, right, depth + 1));
            }
        }
        if worst > tol {
            return Err(Error::Quadrature {
                achieved: worst,
                requested: tol,
            });
        }
        Ok(total)
    }
}
