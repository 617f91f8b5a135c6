//! Smooth steady states of the linearized moment equations and their
//! Rankine–Hugoniot jumps.
//!
//! A smooth steady state is described by the invariants
//! `C1 = hu`, `C2 = u²/2 + g(h + b) + (3/2) Σ α_j²/(2j+1)` and `C_{j+2} = α_j/h`.
//! The height at a point with bottom `b` is a positive root of
//! `f(h) = D h⁴ + 2g h³ + 2h²(g b − C2) + C1²` with `D = 3 Σ C_{j+2}²/(2j+1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::models::{celerity, StateVector};

const MAX_NEWTON_ITERATIONS: usize = 100;

/// Relative size of `f(h_c)` below which the critical point is treated as a
/// double root (the transcritical crest).
const DOUBLE_ROOT_TOLERANCE: f64 = 1e-11;

/// Invariants of a smooth steady state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyConstants {
    /// Discharge `C1 = h u`.
    pub c1: f64,
    /// Energy-like invariant `C2`.
    pub c2: f64,
    /// Moment ratios `C_{j+2} = α_j / h`, `j = 1…N`.
    pub ratios: Vec<f64>,
}

impl SteadyConstants {
    /// `D = 3 Σ C_{j+2}² / (2j+1)`.
    pub fn d(&self) -> f64 {
        self.ratios
            .iter()
            .enumerate()
            .map(|(i, c)| 3.0 * c * c / (2 * i + 3) as f64)
            .sum()
    }

    /// The root function `f(h)` at bottom elevation `b`.
    pub fn root_function(&self, h: f64, b: f64, g: f64) -> f64 {
        let d = self.d();
        h * h * (d * h * h + 2.0 * g * h + 2.0 * (g * b - self.c2)) + self.c1 * self.c1
    }

    /// Magnitude of the terms of `f`, used to make tolerances relative.
    fn scale(&self, h: f64, b: f64, g: f64) -> f64 {
        let d = self.d();
        d * h.powi(4)
            + 2.0 * g * h.powi(3)
            + 2.0 * h * h * (g * b - self.c2).abs()
            + self.c1 * self.c1
    }

    /// Critical height `h_c`, the positive root of `f'`, at bottom `b`.
    /// `None` when `C2 ≤ g b` (no positive critical point).
    pub fn critical_height(&self, b: f64, g: f64) -> Option<f64> {
        let e = self.c2 - g * b;
        (e > 0.0).then(|| 4.0 * e / (3.0 * g + (9.0 * g * g + 16.0 * self.d() * e).sqrt()))
    }

    /// Inflection point `h0` of `f` (root of `f''`), the supercritical
    /// Newton start. Satisfies `0 ≤ h0 ≤ h_c`.
    pub fn inflection_height(&self, b: f64, g: f64) -> Option<f64> {
        let e = self.c2 - g * b;
        (e > 0.0).then(|| 2.0 * e / (3.0 * g + (9.0 * g * g + 12.0 * self.d() * e).sqrt()))
    }
}

/// Flow regime of a state relative to the gravity-wave celerity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlowRegime {
    Subcritical,
    Supercritical,
    /// A cell whose neighbours lie in different regimes.
    Transcritical,
}

/// Steady-state invariants of `state` at its own bottom elevation.
pub fn constants_from_state(state: &StateVector, g: f64) -> Result<SteadyConstants> {
    let p = state.primitives()?;
    let c2 = 0.5 * p.u * p.u + g * (p.h + state.b) + 1.5 * p.moment_energy();
    Ok(SteadyConstants {
        c1: p.h * p.u,
        c2,
        ratios: p.alpha.iter().map(|a| a / p.h).collect(),
    })
}

/// Height of the steady state `c` at a point with bottom `b`, on the branch
/// selected by `regime` (`Transcritical` is treated as subcritical).
pub fn steady_height_at(c: &SteadyConstants, b: f64, regime: FlowRegime, g: f64) -> Result<f64> {
    steady_height_near(c, b, regime, g, None)
}

/// As [`steady_height_at`], starting Newton from `guess` when it lies on the
/// requested side of the critical height.
pub fn steady_height_near(
    c: &SteadyConstants,
    b: f64,
    regime: FlowRegime,
    g: f64,
    guess: Option<f64>,
) -> Result<f64> {
    let e = c.c2 - g * b;
    let Some(hc) = c.critical_height(b, g) else {
        return Err(Error::NoSteadyState { f_min: c.c1 * c.c1 });
    };
    let d = c.d();
    if c.c1 == 0.0 {
        // f = h²(D h² + 2 g h − 2E): the only positive root.
        return Ok(2.0 * e / (g + (g * g + 2.0 * d * e).sqrt()));
    }
    let c1sq = c.c1 * c.c1;
    let gb = g * b - c.c2;
    let f = |h: f64| h * h * (d * h * h + 2.0 * g * h + 2.0 * gb) + c1sq;
    let df = |h: f64| 2.0 * h * (2.0 * d * h * h + 3.0 * g * h + 2.0 * gb);
    let fc = f(hc);
    let scale = c.scale(hc, b, g);
    if fc.abs() <= DOUBLE_ROOT_TOLERANCE * scale {
        return Ok(hc);
    }
    if fc > 0.0 {
        return Err(Error::NoSteadyState { f_min: fc });
    }
    match regime {
        FlowRegime::Supercritical => {
            let start = guess
                .filter(|&h| h > 0.0 && h < hc)
                .or_else(|| c.inflection_height(b, g))
                .unwrap_or(0.5 * hc);
            safeguarded_newton(f, df, 0.0, hc, start)
        }
        FlowRegime::Subcritical | FlowRegime::Transcritical => {
            // f(E/g) = C1² > 0 and f increases beyond h_c, so the root lies
            // below E/g + h_c; Newton from there converges monotonically.
            let hi = e / g + hc;
            let start = guess.filter(|&h| h > hc && h < hi).unwrap_or(hi);
            safeguarded_newton(f, df, hc, hi, start)
        }
    }
}

/// Newton iteration kept inside the sign-change bracket `[lo, hi]`,
/// bisecting whenever a step leaves it.
fn safeguarded_newton<F, D>(f: F, df: D, mut lo: f64, mut hi: f64, start: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let f_lo_sign = f(lo).signum();
    let mut x = start;
    let mut fx = f(x);
    for _ in 0..MAX_NEWTON_ITERATIONS {
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == f_lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let mut next = x - fx / d;
        if !next.is_finite() || next <= lo.min(hi) || next >= lo.max(hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        fx = f(x);
        if step <= 2.0 * f64::EPSILON * x.abs() {
            return Ok(x);
        }
    }
    Err(Error::NewtonDiverged {
        iterations: MAX_NEWTON_ITERATIONS,
        residual: fx.abs(),
    })
}

/// The steady state `c` at a point with bottom `b` on the requested branch.
pub fn evaluate_steady_state(
    c: &SteadyConstants,
    b: f64,
    regime: FlowRegime,
    g: f64,
) -> Result<StateVector> {
    evaluate_steady_state_near(c, b, regime, g, None)
}

/// As [`evaluate_steady_state`] with a Newton starting guess for `h`.
pub fn evaluate_steady_state_near(
    c: &SteadyConstants,
    b: f64,
    regime: FlowRegime,
    g: f64,
    guess: Option<f64>,
) -> Result<StateVector> {
    let h = steady_height_near(c, b, regime, g, guess)?;
    let mut q = Vec::with_capacity(c.ratios.len() + 2);
    q.push(h);
    q.push(c.c1);
    q.extend(c.ratios.iter().map(|r| r * h * h));
    StateVector::new(q, b)
}

/// Sub- or supercritical classification of a single state; equality within
/// `1e-12` counts as subcritical.
pub fn classify_regime(state: &StateVector, g: f64) -> Result<FlowRegime> {
    let p = state.primitives()?;
    let c = celerity(g, &p);
    Ok(if p.u.abs() > c * (1.0 + 1e-12) {
        FlowRegime::Supercritical
    } else {
        FlowRegime::Subcritical
    })
}

/// Admissible downstream heights across a steady jump.
#[derive(Clone, Debug, PartialEq)]
pub struct RhJump {
    /// `h0` followed by every positive root `h = y h0`.
    pub heights: Vec<f64>,
    /// Set when `u0 = 0` but some `α ≠ 0`, where the moment number is undefined.
    pub degenerate: bool,
}

/// Solves `−Fr² + (y² + y)/2 + Mα² Fr² (y³ + y² + y) = 0` for `y = h/h0`.
pub fn rh_jump(h0: f64, u0: f64, alpha0: &[f64], g: f64) -> Result<RhJump> {
    if !(h0 > 0.0) {
        return Err(Error::DryState { h: h0 });
    }
    let moment: f64 = alpha0
        .iter()
        .enumerate()
        .map(|(i, a)| a * a / (2 * i + 3) as f64)
        .sum();
    if u0 == 0.0 && moment > 0.0 {
        return Ok(RhJump {
            heights: vec![h0],
            degenerate: true,
        });
    }
    let fr2 = u0 * u0 / (g * h0);
    // Mα² Fr² = Σ α²/(2i+1) / (g h0).
    let k = moment / (g * h0);
    let roots = if k == 0.0 {
        // y² + y − 2Fr² = 0.
        vec![-0.5 + 0.5 * (1.0 + 8.0 * fr2).sqrt()]
    } else {
        let lin = k + 0.5;
        linalg::cardano_real_roots(lin / k, lin / k, -fr2 / k)
    };
    let mut heights = vec![h0];
    heights.extend(roots.into_iter().filter(|&y| y > 0.0).map(|y| y * h0));
    Ok(RhJump {
        heights,
        degenerate: false,
    })
}

/// Branch used when evaluating the steady reconstruction of a cell towards a
/// neighbour: the regime of that neighbour's own state. In a cell whose
/// neighbours agree this equals the cell's regime; in a transcritical cell it
/// continues each side onto the neighbouring branch.
pub fn side_regime(neighbour: FlowRegime) -> FlowRegime {
    match neighbour {
        FlowRegime::Transcritical => FlowRegime::Subcritical,
        r => r,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const G: f64 = 9.812;

    fn constants(c1: f64, c2: f64, ratios: Vec<f64>) -> SteadyConstants {
        SteadyConstants { c1, c2, ratios }
    }

    #[test]
    fn lake_at_rest_constants_and_height() {
        let s = StateVector::from_primitives(1.25, 0.0, &[0.0; 8], 1.75);
        let c = constants_from_state(&s, G).unwrap();
        assert_eq!(c.c1, 0.0);
        assert!((c.c2 - 29.436).abs() < 1e-12);
        assert!(c.ratios.iter().all(|&r| r == 0.0));
        for b in [0.0, 0.3, 1.75, 2.0] {
            let h = steady_height_at(&c, b, FlowRegime::Subcritical, G).unwrap();
            assert!((h - (3.0 - b)).abs() < 1e-14);
        }
    }

    #[test]
    fn no_steady_state_when_energy_too_low() {
        let c = constants(1.0, 0.0, vec![]);
        assert!(matches!(
            steady_height_at(&c, 1.0, FlowRegime::Subcritical, G),
            Err(Error::NoSteadyState { .. })
        ));
    }

    #[test]
    fn branches_bracket_critical_height() {
        let c = constants(3.5, 21.15525, vec![0.25; 8]);
        for b in [0.0, 0.25, 0.5] {
            let hc = c.critical_height(b, G).unwrap();
            let h0 = c.inflection_height(b, G).unwrap();
            assert!(0.0 <= h0 && h0 <= hc);
            let sub = steady_height_at(&c, b, FlowRegime::Subcritical, G).unwrap();
            let sup = steady_height_at(&c, b, FlowRegime::Supercritical, G).unwrap();
            assert!(sup < hc && hc < sub);
            for h in [sub, sup] {
                assert!(c.root_function(h, b, G).abs() < 1e-12 * c.scale(h, b, G));
            }
        }
    }

    #[test]
    fn subcritical_root_matches_bisection() {
        let c = constants(2.5, 21.15525, vec![]);
        let b = 0.0;
        let h = steady_height_at(&c, b, FlowRegime::Subcritical, G).unwrap();
        let (mut lo, mut hi) = (c.critical_height(b, G).unwrap(), 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if c.root_function(mid, b, G) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((h - lo).abs() < 1e-13);
    }

    #[test]
    fn steady_state_round_trip() {
        let c = constants(3.5, 21.15525, vec![0.25, -0.1, 0.05]);
        for (b, regime) in [
            (0.1, FlowRegime::Subcritical),
            (0.4, FlowRegime::Supercritical),
        ] {
            let s = evaluate_steady_state(&c, b, regime, G).unwrap();
            let back = constants_from_state(&s, G).unwrap();
            assert!((back.c1 - c.c1).abs() < 1e-12);
            assert!((back.c2 - c.c2).abs() < 1e-12 * c.c2);
            for (x, y) in back.ratios.iter().zip(&c.ratios) {
                assert!((x - y).abs() < 1e-12);
            }
            assert_eq!(classify_regime(&s, G).unwrap(), regime);
        }
    }

    #[test]
    fn critical_constants_give_double_root() {
        let c = constants(2.5, 17.56957396120237, vec![]);
        let b = 0.5;
        let hc = c.critical_height(b, G).unwrap();
        let sub = steady_height_at(&c, b, FlowRegime::Subcritical, G).unwrap();
        let sup = steady_height_at(&c, b, FlowRegime::Supercritical, G).unwrap();
        assert_eq!(sub, hc);
        assert_eq!(sup, hc);
    }

    #[test]
    fn regime_classification() {
        let still = StateVector::from_primitives(1.0, 0.0, &[0.3], 0.0);
        assert_eq!(classify_regime(&still, G).unwrap(), FlowRegime::Subcritical);
        let fast = StateVector::from_primitives(0.1, 5.0, &[0.3], 0.0);
        assert_eq!(
            classify_regime(&fast, G).unwrap(),
            FlowRegime::Supercritical
        );
    }

    #[test]
    fn swe_jump_formula() {
        let (h0, g): (f64, f64) = (1.0, 9.81);
        for fr in [0.5, 1.0, 2.0, 3.7] {
            let u0 = fr * (g * h0).sqrt();
            let jump = rh_jump(h0, u0, &[0.0, 0.0], g).unwrap();
            let y = -0.5 + 0.5 * (1.0 + 8.0 * fr * fr).sqrt();
            assert_eq!(jump.heights.len(), 2);
            assert!((jump.heights[1] - y * h0).abs() < 1e-14);
        }
        let critical = rh_jump(1.0, 1.0, &[], 1.0).unwrap();
        assert!((critical.heights[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn moment_jump_satisfies_cubic() {
        // Fr = 2, Mα = 0.5 with N = 1: α = Mα u0.
        let (h0, g) = (1.0, 1.0);
        let u0 = 2.0;
        let alpha = 0.5 * u0;
        let jump = rh_jump(h0, u0, &[alpha], g).unwrap();
        assert!(jump.heights.len() >= 2);
        for &h in &jump.heights[1..] {
            let y = h / h0;
            let r = -4.0 + 0.5 * (y * y + y) + (1.0 / 3.0) * 0.25 * 4.0 * (y * y * y + y * y + y);
            assert!(r.abs() < 1e-12, "residual {r}");
        }
    }

    #[test]
    fn degenerate_jump_flagged() {
        let jump = rh_jump(1.0, 0.0, &[0.2], 1.0).unwrap();
        assert!(jump.degenerate);
        assert_eq!(jump.heights, vec![1.0]);
    }
}
