//! PDE models: conservative flux, non-conservative matrix, topography source
//! and eigen-information behind a single [`Model`] interface.
//!
//! Every model is written as `∂_t U + ∂_x F(U) + B(U) ∂_x U = S(U) ∂_x b`
//! with `U = (h, hu, hα_1, …, hα_N)`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{compute_moment_tensors, BasisSet, MomentTensors};
use crate::error::{Error, Result};
use crate::linalg;

/// Heights at or below this value are rejected as dry.
pub const DRY_TOLERANCE: f64 = 1e-12;

/// Conserved unknowns of one cell together with the bottom elevation there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    conserved: Vec<f64>,
    pub b: f64,
}

impl StateVector {
    /// Builds a state from conserved variables `(h, hu, hα_1, …, hα_N)`.
    pub fn new(conserved: Vec<f64>, b: f64) -> Result<Self> {
        if conserved.len() < 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: conserved.len(),
            });
        }
        Ok(Self { conserved, b })
    }

    /// Builds a state from primitive variables `h, u, α_1…α_N`.
    pub fn from_primitives(h: f64, u: f64, alpha: &[f64], b: f64) -> Self {
        let mut conserved = Vec::with_capacity(alpha.len() + 2);
        conserved.push(h);
        conserved.push(h * u);
        conserved.extend(alpha.iter().map(|a| h * a));
        Self { conserved, b }
    }

    pub fn order(&self) -> usize {
        self.conserved.len() - 2
    }

    pub fn h(&self) -> f64 {
        self.conserved[0]
    }

    pub fn hu(&self) -> f64 {
        self.conserved[1]
    }

    pub fn velocity(&self) -> f64 {
        self.conserved[1] / self.conserved[0]
    }

    /// Moment coefficient `α_j`, `1 ≤ j ≤ N`.
    pub fn alpha(&self, j: usize) -> f64 {
        self.conserved[j + 1] / self.conserved[0]
    }

    pub fn alphas(&self) -> Vec<f64> {
        (1..=self.order()).map(|j| self.alpha(j)).collect()
    }

    pub fn conserved(&self) -> &[f64] {
        &self.conserved
    }

    pub fn primitives(&self) -> Result<Primitives> {
        Primitives::from_conserved(&self.conserved)
    }
}

/// Primitive variables `(h, u, α)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Primitives {
    pub h: f64,
    pub u: f64,
    pub alpha: Vec<f64>,
}

impl Primitives {
    pub fn from_conserved(q: &[f64]) -> Result<Self> {
        if q.len() < 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: q.len(),
            });
        }
        let h = q[0];
        if !(h > DRY_TOLERANCE) {
            return Err(Error::DryState { h });
        }
        Ok(Self {
            h,
            u: q[1] / h,
            alpha: q[2..].iter().map(|v| v / h).collect(),
        })
    }

    pub fn to_conserved(&self) -> Vec<f64> {
        let mut q = Vec::with_capacity(self.alpha.len() + 2);
        q.push(self.h);
        q.push(self.h * self.u);
        q.extend(self.alpha.iter().map(|a| self.h * a));
        q
    }

    /// `Σ α_i² / (2i+1)`.
    pub fn moment_energy(&self) -> f64 {
        self.alpha
            .iter()
            .enumerate()
            .map(|(i, a)| a * a / (2 * i + 3) as f64)
            .sum()
    }
}

/// The available model families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Swe,
    Swme1,
    Swme2,
    SwmeGeneral,
    Swlme,
    Hswme,
    BetaHswme,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Swe,
        ModelKind::Swme1,
        ModelKind::Swme2,
        ModelKind::SwmeGeneral,
        ModelKind::Swlme,
        ModelKind::Hswme,
        ModelKind::BetaHswme,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Swe => "swe",
            ModelKind::Swme1 => "swme1",
            ModelKind::Swme2 => "swme2",
            ModelKind::SwmeGeneral => "swmegeneral",
            ModelKind::Swlme => "swlme",
            ModelKind::Hswme => "hswme",
            ModelKind::BetaHswme => "betahswme",
        }
    }

    /// Models whose system matrix has the linearized-moment structure
    /// (diagonal moment block), which admits closed-form eigenvalues.
    pub fn has_linear_moment_block(self) -> bool {
        matches!(self, ModelKind::Swe | ModelKind::Swme1 | ModelKind::Swlme)
    }

    /// Models whose non-conservative matrix depends on `α_1` as well as `u`.
    pub fn nonconservative_uses_alpha(self) -> bool {
        matches!(
            self,
            ModelKind::Swme2 | ModelKind::SwmeGeneral | ModelKind::Hswme | ModelKind::BetaHswme
        )
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown model kind '{s}'")))
    }
}

/// An immutable model specification: kind, order `N`, gravity `g`.
#[derive(Clone, Debug)]
pub struct Model {
    kind: ModelKind,
    order: usize,
    gravity: f64,
    tensors: Option<Arc<MomentTensors>>,
}

impl Model {
    pub fn new(kind: ModelKind, order: usize, gravity: f64) -> Result<Self> {
        let forced = match kind {
            ModelKind::Swe => Some(0),
            ModelKind::Swme1 => Some(1),
            ModelKind::Swme2 => Some(2),
            _ => None,
        };
        if let Some(required) = forced {
            if order != required {
                return Err(Error::ModelOrder {
                    kind: kind.name(),
                    required,
                    got: order,
                });
            }
        }
        if matches!(kind, ModelKind::Hswme | ModelKind::BetaHswme) && order == 0 {
            return Err(Error::ModelOrder {
                kind: kind.name(),
                required: 1,
                got: 0,
            });
        }
        if !(gravity > 0.0) {
            return Err(Error::Config(format!(
                "gravity must be positive, got {gravity}"
            )));
        }
        let tensors = (kind == ModelKind::SwmeGeneral)
            .then(|| Arc::new(compute_moment_tensors(&BasisSet::new(order))));
        Ok(Self {
            kind,
            order,
            gravity,
            tensors,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn gravity(&self) -> f64 {
        self.gravity
    }

    /// Number of conserved variables, `N + 2`.
    pub fn dim(&self) -> usize {
        self.order + 2
    }

    pub fn primitives(&self, q: &[f64]) -> Result<Primitives> {
        if q.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: q.len(),
            });
        }
        Primitives::from_conserved(q)
    }

    /// Conservative flux `F(U)`.
    pub fn flux(&self, q: &[f64]) -> Result<DVector<f64>> {
        let p = self.primitives(q)?;
        Ok(self.flux_from(&p))
    }

    pub(crate) fn flux_from(&self, p: &Primitives) -> DVector<f64> {
        let g = self.gravity;
        let (h, u, a) = (p.h, p.u, &p.alpha);
        let n = self.order;
        let mut f = DVector::zeros(n + 2);
        f[0] = h * u;
        match self.kind {
            ModelKind::Swe | ModelKind::Swme1 | ModelKind::Swlme => {
                f[1] = h * u * u + 0.5 * g * h * h + h * p.moment_energy();
                for i in 0..n {
                    f[i + 2] = 2.0 * h * u * a[i];
                }
            }
            ModelKind::Swme2 => {
                f[1] = h * u * u + 0.5 * g * h * h + h * p.moment_energy();
                f[2] = 2.0 * h * u * a[0] + 0.8 * h * a[0] * a[1];
                f[3] = 2.0 * h * u * a[1] + h * (2.0 / 3.0 * a[0] * a[0] + 2.0 / 7.0 * a[1] * a[1]);
            }
            ModelKind::SwmeGeneral => {
                let t = self.tensors();
                f[1] = h * u * u + 0.5 * g * h * h + h * p.moment_energy();
                for i in 1..=n {
                    let mut quad = 0.0;
                    for j in 1..=n {
                        for k in 1..=n {
                            quad += t.a(i, j, k) * a[j - 1] * a[k - 1];
                        }
                    }
                    f[i + 1] = 2.0 * h * u * a[i - 1] + h * quad;
                }
            }
            ModelKind::Hswme | ModelKind::BetaHswme => {
                f[1] = h * u * u + 0.5 * g * h * h + h * a[0] * a[0] / 3.0;
                f[2] = 2.0 * h * u * a[0];
                if n >= 2 {
                    f[3] = 2.0 / 3.0 * h * a[0] * a[0];
                }
            }
        }
        f
    }

    /// Analytic Jacobian `∂F/∂U`.
    pub fn flux_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let p = self.primitives(q)?;
        Ok(self.jacobian_from(&p))
    }

    pub(crate) fn jacobian_from(&self, p: &Primitives) -> DMatrix<f64> {
        let g = self.gravity;
        let (h, u, a) = (p.h, p.u, &p.alpha);
        let n = self.order;
        let mut j = DMatrix::zeros(n + 2, n + 2);
        j[(0, 1)] = 1.0;
        match self.kind {
            ModelKind::Hswme | ModelKind::BetaHswme => {
                j[(1, 0)] = g * h - u * u - a[0] * a[0] / 3.0;
                j[(1, 1)] = 2.0 * u;
                j[(1, 2)] = 2.0 * a[0] / 3.0;
                j[(2, 0)] = -2.0 * u * a[0];
                j[(2, 1)] = 2.0 * a[0];
                j[(2, 2)] = 2.0 * u;
                if n >= 2 {
                    j[(3, 0)] = -2.0 / 3.0 * a[0] * a[0];
                    j[(3, 2)] = 4.0 / 3.0 * a[0];
                }
            }
            _ => {
                j[(1, 0)] = g * h - u * u - p.moment_energy();
                j[(1, 1)] = 2.0 * u;
                for i in 0..n {
                    j[(1, i + 2)] = 2.0 * a[i] / (2 * i + 3) as f64;
                    j[(i + 2, 0)] = -2.0 * u * a[i];
                    j[(i + 2, 1)] = 2.0 * a[i];
                    j[(i + 2, i + 2)] = 2.0 * u;
                }
                match self.kind {
                    ModelKind::Swme2 => {
                        let (a1, a2) = (a[0], a[1]);
                        j[(2, 0)] -= 0.8 * a1 * a2;
                        j[(2, 2)] += 0.8 * a2;
                        j[(2, 3)] += 0.8 * a1;
                        j[(3, 0)] -= 2.0 / 3.0 * a1 * a1 + 2.0 / 7.0 * a2 * a2;
                        j[(3, 2)] += 4.0 / 3.0 * a1;
                        j[(3, 3)] += 4.0 / 7.0 * a2;
                    }
                    ModelKind::SwmeGeneral => {
                        let t = self.tensors();
                        for i in 1..=n {
                            let mut quad = 0.0;
                            for l in 1..=n {
                                let mut lin = 0.0;
                                for k in 1..=n {
                                    lin += t.a(i, l, k) * a[k - 1];
                                    quad += t.a(i, l, k) * a[l - 1] * a[k - 1];
                                }
                                j[(i + 1, l + 1)] += 2.0 * lin;
                            }
                            j[(i + 1, 0)] -= quad;
                        }
                    }
                    _ => {}
                }
            }
        }
        j
    }

    /// Non-conservative matrix `B(U)`.
    pub fn nonconservative_matrix(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let p = self.primitives(q)?;
        Ok(self.nonconservative_from(p.u, &p.alpha))
    }

    /// `B` as a function of the primitives `u` and `α`; it is linear in both.
    pub(crate) fn nonconservative_from(&self, u: f64, a: &[f64]) -> DMatrix<f64> {
        let n = self.order;
        let mut b = DMatrix::zeros(n + 2, n + 2);
        match self.kind {
            ModelKind::Swe => {}
            ModelKind::Swme1 | ModelKind::Swlme => {
                for i in 0..n {
                    b[(i + 2, i + 2)] = -u;
                }
            }
            ModelKind::Swme2 => {
                let (a1, a2) = (a[0], a[1]);
                b[(2, 2)] = -(u - a2 / 5.0);
                b[(2, 3)] = -(a1 / 5.0);
                b[(3, 2)] = -a1;
                b[(3, 3)] = -(u + a2 / 7.0);
            }
            ModelKind::SwmeGeneral => {
                let t = self.tensors();
                for i in 1..=n {
                    for j in 1..=n {
                        let mut s = 0.0;
                        for k in 1..=n {
                            s += t.b(i, j, k) * a[k - 1];
                        }
                        let q = if i == j { u } else { 0.0 } - s;
                        b[(i + 1, j + 1)] = -q;
                    }
                }
            }
            ModelKind::Hswme | ModelKind::BetaHswme => {
                let a1 = a[0];
                for i in 1..=n {
                    let r = i + 1;
                    b[(r, r)] = if i == 1 { -u } else { u };
                    if i < n {
                        b[(r, r + 1)] = (i + 2) as f64 / (2 * i + 3) as f64 * a1;
                    }
                    if i >= 2 {
                        let mut sub = (i - 1) as f64 / (2 * i - 1) as f64 * a1;
                        if i == 2 {
                            sub -= 4.0 / 3.0 * a1;
                        }
                        b[(r, r - 1)] = sub;
                    }
                }
                if self.kind == ModelKind::BetaHswme && n >= 2 {
                    b[(n + 1, n)] += beta_coefficient(n) * a1;
                }
            }
        }
        b
    }

    /// Topography source coefficient `S(U) = (0, −gh, 0, …, 0)`.
    pub fn source_coefficient(&self, h: f64) -> DVector<f64> {
        let mut s = DVector::zeros(self.dim());
        s[1] = -self.gravity * h;
        s
    }

    /// System matrix `A = ∂F/∂U + B`.
    pub fn system_matrix(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let p = self.primitives(q)?;
        Ok(self.system_from(&p))
    }

    pub(crate) fn system_from(&self, p: &Primitives) -> DMatrix<f64> {
        self.jacobian_from(p) + self.nonconservative_from(p.u, &p.alpha)
    }

    /// All `N + 2` eigenvalues of the system matrix.
    ///
    /// Closed forms are used for SWE, SWME1 and SWLME; the other models use a
    /// general real eigensolver, so complex pairs are reported as such.
    pub fn eigenvalues(&self, q: &[f64]) -> Result<Vec<Complex64>> {
        let p = self.primitives(q)?;
        if self.kind.has_linear_moment_block() {
            let c = celerity(self.gravity, &p);
            let mut ev = vec![Complex64::new(p.u + c, 0.0), Complex64::new(p.u - c, 0.0)];
            ev.extend(std::iter::repeat_n(Complex64::new(p.u, 0.0), self.order));
            Ok(ev)
        } else {
            linalg::eigenvalues(&self.system_from(&p))
        }
    }

    /// Whether all eigenvalues are real (within the classification tolerance).
    pub fn is_hyperbolic(&self, q: &[f64]) -> Result<bool> {
        Ok(self.eigenvalues(q)?.iter().all(linalg::is_real))
    }

    /// Largest characteristic speed magnitude `max |Re λ|`.
    pub fn max_speed(&self, q: &[f64]) -> Result<f64> {
        if self.kind.has_linear_moment_block() {
            let p = self.primitives(q)?;
            return Ok(p.u.abs() + celerity(self.gravity, &p));
        }
        Ok(self
            .eigenvalues(q)?
            .iter()
            .map(|z| z.re.abs())
            .fold(0.0, f64::max))
    }

    fn tensors(&self) -> &MomentTensors {
        self.tensors
            .as_deref()
            .expect("moment tensors are built for the general SWME model")
    }
}

/// Correction coefficient `β_N / α_1 = (N² − N)/(2N² + N − 1)`.
pub fn beta_coefficient(n: usize) -> f64 {
    let n = n as f64;
    (n * n - n) / (2.0 * n * n + n - 1.0)
}

/// Gravity-wave celerity of the linearized moment models,
/// `√(gh + Σ 3α_i²/(2i+1))`.
pub fn celerity(g: f64, p: &Primitives) -> f64 {
    (g * p.h + 3.0 * p.moment_energy()).sqrt()
}

/// Spectrum of a matrix with linearized-moment structure whose moment
/// diagonal equals `c` (`c = u` for a cell state, `c = 2ũ − u_b` for a Roe
/// matrix). Returned unsorted.
pub(crate) fn linear_moment_spectrum(g: f64, p: &Primitives, c: f64) -> Vec<Complex64> {
    let n = p.alpha.len();
    let (h, u) = (p.h, p.u);
    let m = p.moment_energy();
    if n == 0 {
        let s = (g * h).sqrt();
        return vec![Complex64::new(u + s, 0.0), Complex64::new(u - s, 0.0)];
    }
    let mut ev = Vec::with_capacity(n + 2);
    if c == u {
        let s = (g * h + 3.0 * m).sqrt();
        ev.push(Complex64::new(u + s, 0.0));
        ev.push(Complex64::new(u - s, 0.0));
        ev.extend(std::iter::repeat_n(Complex64::new(u, 0.0), n));
        return ev;
    }
    // (λ² − 2uλ − d0)(λ − c) − 4M(λ − u) with d0 = gh − u² − M.
    let d0 = g * h - u * u - m;
    let a2 = -(2.0 * u + c);
    let a1 = 2.0 * u * c - d0 - 4.0 * m;
    let a0 = c * d0 + 4.0 * m * u;
    ev.extend(linalg::cubic_roots(a2, a1, a0, c));
    ev.extend(std::iter::repeat_n(Complex64::new(c, 0.0), n - 1));
    ev
}

/// Right eigenvectors of the SWLME system matrix, one per column, in the
/// eigenvalue order `(u + c, u − c, u, …, u)`.
pub fn eigenvectors_swlme(state: &StateVector, g: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let p = state.primitives()?;
    let n = state.order();
    let c = celerity(g, &p);
    let m = p.moment_energy();
    let dim = n + 2;
    let lambdas = {
        let mut l = vec![p.u + c, p.u - c];
        l.extend(std::iter::repeat_n(p.u, n));
        l
    };
    let mut v = DMatrix::zeros(dim, dim);
    for (col, &lam) in lambdas.iter().take(2).enumerate() {
        v[(0, col)] = 1.0;
        v[(1, col)] = lam;
        for i in 0..n {
            v[(i + 2, col)] = 2.0 * p.alpha[i];
        }
    }
    // Eigenspace of λ = u: x1 = u x0 and Σ b_i y_i = −(gh − M) x0 with
    // b_i = 2α_i/(2i+1).
    let bcoef: Vec<f64> = (0..n)
        .map(|i| 2.0 * p.alpha[i] / (2 * i + 3) as f64)
        .collect();
    let pivot = (0..n).max_by(|&i, &j| bcoef[i].abs().total_cmp(&bcoef[j].abs()));
    match pivot {
        Some(piv) if bcoef[piv] != 0.0 => {
            let mut col = 2;
            // One vector with x0 = 1.
            v[(0, col)] = 1.0;
            v[(1, col)] = p.u;
            v[(piv + 2, col)] = -(g * p.h - m) / bcoef[piv];
            col += 1;
            for k in (0..n).filter(|&k| k != piv) {
                v[(k + 2, col)] = 1.0;
                v[(piv + 2, col)] = -bcoef[k] / bcoef[piv];
                col += 1;
            }
        }
        _ => {
            for k in 0..n {
                v[(k + 2, k + 2)] = 1.0;
            }
        }
    }
    Ok((lambdas, v))
}

/// One sample of a hyperbolicity scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HyperbolicitySample {
    pub alpha1: f64,
    pub alpha2: f64,
    pub is_hyperbolic: bool,
}

/// Samples whether the system matrix has a real spectrum on a uniform grid
/// of `(α_1, α_2)` values at fixed `h` and `u`. Higher moments are zero.
pub fn hyperbolicity_scan(
    model: &Model,
    h: f64,
    u: f64,
    alpha1: (f64, f64),
    alpha2: (f64, f64),
    samples: usize,
) -> Result<Vec<HyperbolicitySample>> {
    if model.order() < 2 {
        return Err(Error::ModelOrder {
            kind: model.kind().name(),
            required: 2,
            got: model.order(),
        });
    }
    let samples = samples.max(2);
    let lerp = |(lo, hi): (f64, f64), k: usize| lo + (hi - lo) * k as f64 / (samples - 1) as f64;
    let mut out = Vec::with_capacity(samples * samples);
    let mut alpha = vec![0.0; model.order()];
    for i in 0..samples {
        for j in 0..samples {
            alpha[0] = lerp(alpha1, i);
            alpha[1] = lerp(alpha2, j);
            let q = StateVector::from_primitives(h, u, &alpha, 0.0);
            out.push(HyperbolicitySample {
                alpha1: alpha[0],
                alpha2: alpha[1],
                is_hyperbolic: model.is_hyperbolic(q.conserved())?,
            });
        }
    }
    Ok(out)
}

/// Writes scan samples as CSV with header `alpha1,alpha2,is_hyperbolic`.
pub fn write_scan_csv<W: Write>(out: W, samples: &[HyperbolicitySample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha1", "alpha2", "is_hyperbolic"])?;
    for s in samples {
        w.serialize((s.alpha1, s.alpha2, u8::from(s.is_hyperbolic)))?;
    }
    w.flush()?;
    Ok(())
}
