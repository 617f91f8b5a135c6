//! Dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance above which an imaginary part counts as genuinely complex.
pub const COMPLEX_TOL: f64 = 1e-10;

pub fn is_real(z: &Complex64) -> bool {
    z.im.abs() <= COMPLEX_TOL * (1.0 + z.re.abs())
}

/// All eigenvalues of a general real matrix (real Schur form).
///
/// The QR iteration can stall at machine-epsilon deflation on clustered
/// (repeated) eigenvalues; it is retried with slightly looser thresholds.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    [f64::EPSILON, 1e-15, 1e-14, 1e-13]
        .into_iter()
        .find_map(|eps| m.clone().try_schur(eps, 10_000))
        .map(|schur| schur.complex_eigenvalues().iter().copied().collect())
        .ok_or_else(|| {
            Error::Eigen(format!(
                "Schur iteration did not converge for {}x{} matrix",
                m.nrows(),
                m.ncols()
            ))
        })
}

/// Solves `m x = rhs`. Falls back to a least-squares solution when `m` is
/// singular; `None` if that solution does not satisfy the system.
pub fn solve_consistent(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(x) = m.clone().lu().solve(rhs) {
        if x.iter().all(|v| v.is_finite()) {
            return Some(x);
        }
    }
    let svd = m.clone().svd(true, true);
    let scale = svd.singular_values.max().max(f64::MIN_POSITIVE);
    let x = svd.solve(rhs, 1e-12 * scale).ok()?;
    let residual = (m * &x - rhs).norm();
    (residual <= 1e-10 * (rhs.norm() + scale * x.norm()) + f64::MIN_POSITIVE).then_some(x)
}

/// Roots of `x² + b x + c`, computed without cancellation.
pub fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = 0.25 * b * b - c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let big = -0.5 * b - s.copysign(b);
        if big == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        let other = c / big;
        [Complex64::new(big, 0.0), Complex64::new(other, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [Complex64::new(-0.5 * b, s), Complex64::new(-0.5 * b, -s)]
    }
}

/// Roots of the monic cubic `x³ + a x² + b x + c`.
///
/// One real root is located by safeguarded Newton iteration from `guess`,
/// the remaining pair follows from deflation.
pub fn cubic_roots(a: f64, b: f64, c: f64, guess: f64) -> [Complex64; 3] {
    let p = |x: f64| ((x + a) * x + b) * x + c;
    let dp = |x: f64| (3.0 * x + 2.0 * a) * x + b;
    // Cauchy bound brackets every real root.
    let bound = 1.0 + a.abs().max(b.abs()).max(c.abs());
    let (mut lo, mut hi) = (-bound, bound);
    let mut x = guess.clamp(lo, hi);
    for _ in 0..200 {
        let fx = p(x);
        if fx == 0.0 {
            break;
        }
        if fx < 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        // p is increasing at the bracket ends, so the sign convention holds.
        let d = dp(x);
        let mut next = if d != 0.0 { x - fx / d } else { f64::NAN };
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            x = next;
            break;
        }
        x = next;
    }
    let beta = a + x;
    let gamma = b + x * beta;
    let [r1, r2] = quadratic_roots(beta, gamma);
    [Complex64::new(x, 0.0), r1, r2]
}

/// Real roots of the monic cubic `x³ + a x² + b x + c` by Cardano's
/// formula (trigonometric form for three real roots), each polished by one
/// Newton step.
pub fn cardano_real_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = 0.25 * q * q + p * p * p / 27.0;
    let mut roots = if disc > 0.0 {
        let s = disc.sqrt();
        // Avoid cancellation: take the larger-magnitude cube root first.
        let w = (-0.5 * q - s.copysign(q)).cbrt();
        let t = if w != 0.0 { w - p / (3.0 * w) } else { 0.0 };
        vec![t - shift]
    } else if p == 0.0 {
        vec![-shift]
    } else {
        let r = (-p / 3.0).sqrt();
        let arg = (-0.5 * q / (r * r * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| 2.0 * r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
            .collect()
    };
    for x in &mut roots {
        let f = ((*x + a) * *x + b) * *x + c;
        let d = (3.0 * *x + 2.0 * a) * *x + b;
        if d != 0.0 {
            let next = *x - f / d;
            if next.is_finite() && (((next + a) * next + b) * next + c).abs() <= f.abs() {
                *x = next;
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}
