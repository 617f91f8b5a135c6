//! Acceptance suite: prints one PASS/FAIL line per criterion and exits with a
//! failure status if any asserted criterion fails.
//!
//! A criterion that cannot be met as stated is printed as FAIL with the
//! reason, but is not asserted; the line is tagged `known`.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use swme_core::basis::{project_profile, BasisSet};
use swme_core::harness::{
    l1_error, primitive_profile, run_scenario, shock_position, total_variation, InitialCondition,
    RunOutput, Scenario, SteadyBranch,
};
use swme_core::linalg;
use swme_core::models::{Model, ModelKind, StateVector};
use swme_core::scheme::{pvm_hll_fluctuations, roe_averages, Cells};
use swme_core::timeint::integrate;
use swme_core::Error;

/// Outcome of one criterion.
struct Verdict {
    id: &'static str,
    pass: bool,
    /// Printed as FAIL but excluded from the exit status.
    known: bool,
    detail: String,
}

impl Verdict {
    fn new(id: &'static str, pass: bool, detail: String) -> Self {
        Self {
            id,
            pass,
            known: false,
            detail,
        }
    }
}

fn builtin(name: &str, wb: bool, order: u8) -> Scenario {
    Scenario {
        well_balanced: wb,
        order,
        ..Scenario::builtin(name).expect("built-in scenario")
    }
}

fn runs(configs: &[Scenario]) -> Vec<RunOutput> {
    configs
        .par_iter()
        .map(|s| run_scenario(s).unwrap_or_else(|e| panic!("{} failed: {e}", s.name)))
        .collect()
}

fn criterion1() -> Verdict {
    let out = runs(&[builtin("test1", true, 1), builtin("test1", true, 2)]);
    let worst_h = out.iter().map(|r| r.errors.h).fold(0.0, f64::max);
    let worst_u = out.iter().map(|r| r.errors.u).fold(0.0, f64::max);
    let slowest = out.iter().map(|r| r.wall_seconds).fold(0.0, f64::max);
    Verdict::new(
        "1",
        worst_h < 1e-13 && worst_u < 1e-13 && slowest < 60.0,
        format!("lake at rest, WB o1/o2: max |Δh| = {worst_h:.2e}, max |Δu| = {worst_u:.2e} (< 1e-13); slowest run {slowest:.1} s (< 60 s)"),
    )
}

/// Test 2 with C2 = 17.56957396120237 has no steady state over
/// the crest; the corrected constants (those of Tests 3/4) are checked instead.
fn criterion2() -> Vec<Verdict> {
    let literal = Scenario {
        initial: InitialCondition::Steady {
            c1: 3.5,
            c2: 17.56957396120237,
            moment_ratio: 0.0,
            branch: SteadyBranch::Subcritical,
        },
        ..builtin("test2", true, 1)
    };
    // Minimum of f(h) = 2g h³ + 2h²(g b − C2) + C1² at the crest b = 0.5, at h = 2(C2 − g b)/(3g).
    let (g, c1, c2, crest) = (literal.gravity, 3.5f64, 17.56957396120237f64, 0.5);
    let h_min = 2.0 * (c2 - g * crest) / (3.0 * g);
    let f_crest = 2.0 * g * h_min.powi(3) + 2.0 * h_min * h_min * (g * crest - c2) + c1 * c1;
    let literal_verdict = match literal.initial_cells(&literal.discretization().unwrap()) {
        Err(Error::NoSteadyState { .. }) => Verdict {
            id: "2",
            pass: false,
            known: true,
            detail: format!(
                "C1 = 3.5, C2 = 17.56957396120237 as stated: no steady state over the bump (min f = {f_crest:.3} > 0 at the crest)"
            ),
        },
        Err(e) => Verdict::new("2", false, format!("literal constants: unexpected error {e}")),
        Ok(_) => Verdict::new("2", false, "literal constants unexpectedly admit a steady state".into()),
    };
    let out = runs(&[
        builtin("test2", true, 1),
        builtin("test2", true, 2),
        builtin("test2", false, 1),
    ]);
    let wb = out[..2]
        .iter()
        .map(|r| r.errors.h.max(r.errors.u))
        .fold(0.0, f64::max);
    let non_wb = out[2].errors.h;
    let ratio = non_wb / 2.48e-6;
    let corrected = Verdict::new(
        "2",
        wb < 1e-12 && (0.1..=10.0).contains(&ratio),
        format!(
            "C1 = 3.5, C2 = 21.15525: WB o1/o2 max error {wb:.2e} (< 1e-12); non-WB o1 |Δh| = {non_wb:.3e} ({ratio:.2}× 2.48e-6, within 10×)"
        ),
    );
    vec![literal_verdict, corrected]
}

fn criterion3() -> Verdict {
    let out = runs(&[
        builtin("test3", true, 1),
        builtin("test3", true, 2),
        builtin("test3", false, 1),
        builtin("test3", false, 2),
    ]);
    let wb_h = out[..2].iter().map(|r| r.errors.h).fold(0.0, f64::max);
    let wb_u = out[..2].iter().map(|r| r.errors.u).fold(0.0, f64::max);
    let non_wb = out[2..]
        .iter()
        .map(|r| r.errors.h.min(r.errors.u))
        .fold(f64::INFINITY, f64::min);
    Verdict::new(
        "3",
        wb_h < 1e-12 && wb_u < 1e-11 && non_wb > 1e-6,
        format!("transcritical: WB |Δh| = {wb_h:.2e} (< 1e-12), |Δu| = {wb_u:.2e} (< 1e-11); non-WB min error {non_wb:.2e} (> 1e-6)"),
    )
}

fn criterion4() -> Verdict {
    let out = runs(&[
        builtin("test4", true, 1),
        builtin("test4", true, 2),
        builtin("test4", false, 1),
        builtin("test4", false, 2),
    ]);
    let wb = out[..2]
        .iter()
        .map(|r| r.errors.alpha_max())
        .fold(0.0, f64::max);
    let non_wb_max = out[2..]
        .iter()
        .map(|r| r.errors.alpha_max())
        .fold(f64::INFINITY, f64::min);
    let non_wb_min = out[2..]
        .iter()
        .map(|r| r.errors.alpha_min())
        .fold(f64::INFINITY, f64::min);
    Verdict::new(
        "4",
        wb < 1e-12 && non_wb_max > 1e-7,
        format!(
            "moments C_i = 0.25: WB max_i |Δα_i| = {wb:.2e} (< 1e-12); non-WB max_i |Δα_i| ≥ {non_wb_max:.2e} (> 1e-7), smallest single moment {non_wb_min:.2e}"
        ),
    )
}

fn random_primitives(
    rng: &mut StdRng,
    n: usize,
    h_range: (f64, f64),
    bound: f64,
) -> (f64, f64, Vec<f64>) {
    let h = rng.random_range(h_range.0..h_range.1);
    let u = rng.random_range(-bound..bound);
    let alpha = (0..n).map(|_| rng.random_range(-bound..bound)).collect();
    (h, u, alpha)
}

fn conserved(h: f64, u: f64, alpha: &[f64]) -> Vec<f64> {
    StateVector::from_primitives(h, u, alpha, 0.0)
        .conserved()
        .to_vec()
}

fn criterion5() -> Verdict {
    const G: f64 = 9.81;
    let mut rng = StdRng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=8);
        let (h, u, alpha) = random_primitives(&mut rng, n, (0.1, 10.0), 5.0);
        let model = Model::new(ModelKind::Swlme, n, G).unwrap();
        let a = model.system_matrix(&conserved(h, u, &alpha)).unwrap();
        let mut numeric = linalg::eigenvalues(&a).unwrap();
        let m: f64 = alpha
            .iter()
            .enumerate()
            .map(|(i, a)| 3.0 * a * a / (2 * i + 3) as f64)
            .sum();
        let c = (G * h + m).sqrt();
        let mut exact: Vec<f64> = vec![u - c, u + c];
        exact.extend(std::iter::repeat_n(u, n));
        exact.sort_by(f64::total_cmp);
        numeric.sort_by(|x, y| x.re.total_cmp(&y.re));
        for (z, e) in numeric.iter().zip(&exact) {
            worst = worst.max((z - Complex64::new(*e, 0.0)).norm());
        }
    }
    Verdict::new(
        "5",
        worst < 1e-8,
        format!("SWLME spectrum at 1000 random states, N ∈ 1..8: max |λ_numeric − λ_closed| = {worst:.2e} (< 1e-8)"),
    )
}

/// Adaptive Simpson quadrature of a matrix-valued function, error measured in
/// the max norm.
fn simpson_matrix<F: Fn(f64) -> DMatrix<f64>>(f: &F, a: f64, b: f64, tol: f64) -> DMatrix<f64> {
    /// `ends` holds f(a), f((a+b)/2), f(b); `whole` is Simpson's rule on [a, b].
    fn rec<F: Fn(f64) -> DMatrix<f64>>(
        f: &F,
        (a, b): (f64, f64),
        ends: [&DMatrix<f64>; 3],
        whole: DMatrix<f64>,
        tol: f64,
        depth: usize,
    ) -> DMatrix<f64> {
        let [fa, fm, fb] = ends;
        let m = 0.5 * (a + b);
        let (flm, frm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
        let left = (fa + &flm * 4.0 + fm) * ((m - a) / 6.0);
        let right = (fm + &frm * 4.0 + fb) * ((b - m) / 6.0);
        let delta = &left + &right - &whole;
        if depth == 0 || delta.amax() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, (a, m), [fa, &flm, fm], left, 0.5 * tol, depth - 1)
            + rec(f, (m, b), [fm, &frm, fb], right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (&fa + &fm * 4.0 + &fb) * ((b - a) / 6.0);
    rec(f, (a, b), [&fa, &fm, &fb], whole, tol, 40)
}

fn criterion6() -> Verdict {
    const G: f64 = 9.81;
    let mut rng = StdRng::seed_from_u64(6);
    let (mut roe_err, mut path_err, mut fluct_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for trial in 0..1000 {
        let kind = ModelKind::ALL[trial % ModelKind::ALL.len()];
        let n = match kind {
            ModelKind::Swe => 0,
            ModelKind::Swme1 => 1,
            ModelKind::Swme2 => 2,
            _ => rng.random_range(1..=8),
        };
        let model = Model::new(kind, n, G).unwrap();
        let (hl, ul, al) = random_primitives(&mut rng, n, (0.1, 10.0), 2.0);
        let (hr, ur, ar) = random_primitives(&mut rng, n, (0.1, 10.0), 2.0);
        let (ql, qr) = (conserved(hl, ul, &al), conserved(hr, ur, &ar));
        let (bl, br) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let roe = roe_averages(&model, &ql, &qr).unwrap();
        let dq = DVector::from_iterator(n + 2, qr.iter().zip(&ql).map(|(r, l)| r - l));
        let df = model.flux(&qr).unwrap() - model.flux(&ql).unwrap();
        let scale = 1.0 + df.amax() + (&roe.a * &dq).amax();

        // Non-conservative path integral along the straight segment, by quadrature.
        let path = |s: f64| {
            let q: Vec<f64> = ql.iter().zip(&qr).map(|(l, r)| l + s * (r - l)).collect();
            model.nonconservative_matrix(&q).unwrap()
        };
        let b_quad = simpson_matrix(&path, 0.0, 1.0, 1e-13);
        path_err = path_err.max((&roe.b - &b_quad).amax() / (1.0 + b_quad.amax()));

        // Roe property with the quadrature matrix.
        let residual = &roe.a * &dq - &df - &b_quad * &dq;
        roe_err = roe_err.max(residual.amax() / scale);

        // D⁻ + D⁺ = ΔF + B ΔU − S Δb with S = (0, −g h̄, 0, …).
        let fl = pvm_hll_fluctuations(&model, &ql, &qr, bl, br).unwrap();
        let mut target = &df + &b_quad * &dq;
        target[1] += G * 0.5 * (hl + hr) * (br - bl);
        fluct_err = fluct_err.max((fl.minus + fl.plus - target).amax() / scale);
    }
    Verdict::new(
        "6",
        roe_err < 1e-10 && path_err < 1e-10 && fluct_err < 1e-10,
        format!(
            "1000 random interface pairs, all models: Roe property {roe_err:.1e}, path matrix vs quadrature {path_err:.1e}, D⁻+D⁺ identity {fluct_err:.1e} (relative, < 1e-10)"
        ),
    )
}

fn criterion7() -> Verdict {
    // Test 6 profile: (3/2)√ζ, whose depth average is 1.
    let p = project_profile(|z: f64| 1.5 * z.sqrt(), &BasisSet::new(8)).unwrap();
    let expected = [
        -3.0 / 5.0,
        -1.0 / 7.0,
        -1.0 / 15.0,
        -3.0 / 77.0,
        -1.0 / 39.0,
        -1.0 / 55.0,
        -3.0 / 221.0,
        -1.0 / 95.0,
    ];
    let worst = p
        .alpha
        .iter()
        .zip(&expected)
        .map(|(a, e)| (a - e).abs())
        .fold(0.0, f64::max);
    let mean_err = (p.mean - 1.0).abs();
    Verdict::new(
        "7",
        worst < 1e-10 && mean_err < 1e-10,
        format!("projection of (3/2)√ζ: max |α_i − rational| = {worst:.1e}, |u_m − 1| = {mean_err:.1e} (< 1e-10)"),
    )
}

fn criterion8() -> Verdict {
    let mut configs = vec![builtin("test5", false, 1), builtin("test5", false, 2)];
    for name in ["test5", "test6"] {
        configs.push(Scenario {
            model: ModelKind::Hswme,
            ..builtin(name, false, 1)
        });
    }
    configs.push(builtin("test6", false, 1));
    let out = runs(&configs);
    let completed = out[..2]
        .iter()
        .all(|r| (r.stats.final_time - 0.1).abs() < 1e-15);
    let shock = |r: &RunOutput| shock_position(&r.grid, &r.solution, 0.0).unwrap_or(f64::NAN);
    let tv8 = |r: &RunOutput| total_variation(&primitive_profile(&r.solution, 9));
    let (swlme5, hswme5, hswme6, swlme6) = (&out[0], &out[2], &out[3], &out[4]);
    let (tv_l, tv_h) = (tv8(swlme6), tv8(hswme6));
    let shocks = [
        (shock(swlme5), shock(hswme5)),
        (shock(swlme6), shock(hswme6)),
    ];
    let shock_ok = shocks.iter().all(|(l, h)| l >= h);
    Verdict::new(
        "8",
        completed && tv_l < tv_h && shock_ok,
        format!(
            "SWLME test 5 o1/o2 complete: {completed}; test 6 TV(α8) SWLME {tv_l:.4} < HSWME {tv_h:.4}; shock x SWLME ≥ HSWME: test 5 {:.5} vs {:.5}, test 6 {:.5} vs {:.5}",
            shocks[0].0, shocks[0].1, shocks[1].0, shocks[1].1
        ),
    )
}

/// Subcritical steady state (SWLME, N = 2, C_i = 0.25) plus a smooth bump
/// in the free surface, run to t = 0.05.
fn perturbed_run(cells: usize) -> Cells {
    let s = Scenario {
        cells,
        moments: 2,
        order: 2,
        t_end: 0.05,
        ..builtin("test4", true, 2)
    };
    let disc = s.discretization().unwrap();
    let mut state = s.initial_cells(&disc).unwrap();
    let dim = state.dim();
    for (i, x) in disc.grid.centers().into_iter().enumerate() {
        let bump = 0.05 * (-((x - 1.0) / 0.15).powi(2)).exp();
        state.values_mut()[i * dim] += bump;
    }
    integrate(&disc, &mut state, &s.stepper().unwrap()).unwrap();
    state
}

/// Averages pairs of fine cells onto the coarse grid.
fn restrict(fine: &Cells) -> Cells {
    let dim = fine.dim();
    let n = fine.len() / 2;
    let q = (0..n)
        .flat_map(|i| (0..dim).map(move |k| (i, k)))
        .map(|(i, k)| 0.5 * (fine.q(2 * i)[k] + fine.q(2 * i + 1)[k]))
        .collect();
    let b = (0..n)
        .map(|i| 0.5 * (fine.b(2 * i) + fine.b(2 * i + 1)))
        .collect();
    Cells::new(dim, q, b).unwrap()
}

fn criterion9() -> Verdict {
    let meshes = [100usize, 200, 400, 800];
    let solutions: Vec<Cells> = meshes.par_iter().map(|&n| perturbed_run(n)).collect();
    let errors: Vec<f64> = (0..meshes.len() - 1)
        .map(|k| {
            let grid = swme_core::scheme::Grid::new(0.0, 3.0, meshes[k]).unwrap();
            l1_error(&grid, &solutions[k], &restrict(&solutions[k + 1]))
                .unwrap()
                .h
        })
        .collect();
    let orders: Vec<f64> = errors.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    let observed = orders.iter().copied().fold(f64::INFINITY, f64::min);
    Verdict::new(
        "9",
        observed >= 1.8,
        format!(
            "self-convergence of |h| (100→800 cells, SWLME N=2, WB order 2): errors {:?}, orders {:?} (min ≥ 1.8)",
            errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>(),
            orders.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>()
        ),
    )
}

/// Independent first-order HLL solver for the shallow water equations with
/// speeds `ū ± √(g h̄)` (h̄ arithmetic, ū √h-weighted), transmissive
/// boundaries and forward Euler with `Δt = CFL Δx / max(|u| + √(gh))`.
fn hll_swe(h0: &[f64], hu0: &[f64], dx: f64, g: f64, cfl: f64, t_end: f64) -> (Vec<f64>, Vec<f64>) {
    let (mut h, mut hu) = (h0.to_vec(), hu0.to_vec());
    let n = h.len();
    let flux = |h: f64, hu: f64| [hu, hu * hu / h + 0.5 * g * h * h];
    let mut t = 0.0;
    while t < t_end {
        let smax = (0..n)
            .map(|i| (hu[i] / h[i]).abs() + (g * h[i]).sqrt())
            .fold(0.0, f64::max);
        let mut dt = cfl * dx / smax;
        let last = t + dt >= t_end;
        if last {
            dt = t_end - t;
        }
        let faces: Vec<[f64; 2]> = (0..=n)
            .map(|f| {
                let (l, r) = (f.saturating_sub(1), f.min(n - 1));
                let (hl, hr, ul, ur) = (h[l], h[r], hu[l] / h[l], hu[r] / h[r]);
                let (sl, sr) = (hl.sqrt(), hr.sqrt());
                let u_bar = (sl * ul + sr * ur) / (sl + sr);
                let c_bar = (g * 0.5 * (hl + hr)).sqrt();
                let (s_l, s_r) = (u_bar - c_bar, u_bar + c_bar);
                let (fl, fr) = (flux(hl, hu[l]), flux(hr, hu[r]));
                if s_l >= 0.0 {
                    fl
                } else if s_r <= 0.0 {
                    fr
                } else {
                    let du = [hr - hl, hu[r] - hu[l]];
                    [0, 1].map(|k| (s_r * fl[k] - s_l * fr[k] + s_l * s_r * du[k]) / (s_r - s_l))
                }
            })
            .collect();
        for i in 0..n {
            h[i] -= dt / dx * (faces[i + 1][0] - faces[i][0]);
            hu[i] -= dt / dx * (faces[i + 1][1] - faces[i][1]);
        }
        t = if last { t_end } else { t + dt };
    }
    (h, hu)
}

fn criterion10() -> Verdict {
    let s = Scenario {
        model: ModelKind::Swe,
        moments: 0,
        ..builtin("test5", false, 1)
    };
    let run = run_scenario(&s).unwrap();
    let h0: Vec<f64> = (0..run.initial.len())
        .map(|i| run.initial.q(i)[0])
        .collect();
    let hu0: Vec<f64> = (0..run.initial.len())
        .map(|i| run.initial.q(i)[1])
        .collect();
    let (h, hu) = hll_swe(&h0, &hu0, run.grid.dx(), s.gravity, s.cfl, s.t_end);
    let worst = (0..h.len())
        .map(|i| {
            let q = run.solution.q(i);
            (q[0] - h[i]).abs().max((q[1] - hu[i]).abs())
        })
        .fold(0.0, f64::max);
    Verdict::new(
        "10",
        worst < 1e-10,
        format!("N = 0 dam break vs independent HLL solver ({} cells): max per-cell deviation {worst:.2e} (< 1e-10)", h.len()),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut verdicts = Vec::new();
    // Optional positional arguments select criteria by number, e.g. `-- 5 6`.
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let criteria: [fn() -> Vec<Verdict>; 10] = [
        || vec![criterion1()],
        criterion2,
        || vec![criterion3()],
        || vec![criterion4()],
        || vec![criterion5()],
        || vec![criterion6()],
        || vec![criterion7()],
        || vec![criterion8()],
        || vec![criterion9()],
        || vec![criterion10()],
    ];
    for (k, check) in criteria.into_iter().enumerate() {
        if !selected.is_empty() && !selected.contains(&(k + 1)) {
            continue;
        }
        for v in check() {
            let status = match (v.pass, v.known) {
                (true, _) => "PASS",
                (false, true) => "FAIL (known)",
                (false, false) => "FAIL",
            };
            println!("criterion {:>2}: {status:<12} {}", v.id, v.detail);
            verdicts.push(v);
        }
    }
    let failed: Vec<&str> = verdicts
        .iter()
        .filter(|v| !v.pass && !v.known)
        .map(|v| v.id)
        .collect();
    let known: Vec<&str> = verdicts
        .iter()
        .filter(|v| !v.pass && v.known)
        .map(|v| v.id)
        .collect();
    println!(
        "acceptance: {} lines, {} failed, {} known failures {:?}, {:.0} s",
        verdicts.len(),
        failed.len(),
        known.len(),
        known,
        start.elapsed().as_secs_f64()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
