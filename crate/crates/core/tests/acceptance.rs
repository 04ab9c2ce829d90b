//! Acceptance suite: one line per criterion, each sub-check reported with
//! its measured value and pinned tolerance. Exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use momentumian_core::classical::{self, ClassicalSetup};
use momentumian_core::output::Format;
use momentumian_core::pide::{self, DiracMatrices, Mat2, PidePair, SeparationConstants};
use momentumian_core::scenarios::{
    band_after, fig2_series, hydrogen_metrics, ladder_overlaps, run_scenario,
    superposition_metrics, superposition_traces, write_outcome, ScenarioConfig, ScenarioId,
};
use momentumian_core::specfun::{
    self, caputo_half, erfc_complex, gamma, ml_series, CaputoGrid, MlEvalPolicy,
};
use momentumian_core::tide::{
    self, decoupled_solution, hydrogen_eigenstate, overlap_modulus, HoRun, HydrogenRun, Parity,
    RunStatus,
};
use momentumian_core::{Branch, Complex64, PhysicalScales, Potential};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Sub {
    label: String,
    measured: f64,
    bound: String,
    ok: bool,
}

fn le(label: &str, measured: f64, tol: f64) -> Sub {
    Sub {
        label: label.into(),
        measured,
        bound: format!("<= {tol:e}"),
        ok: measured <= tol,
    }
}

fn ge(label: &str, measured: f64, tol: f64) -> Sub {
    Sub {
        label: label.into(),
        measured,
        bound: format!(">= {tol}"),
        ok: measured >= tol,
    }
}

fn lt(label: &str, measured: f64, tol: f64) -> Sub {
    Sub {
        label: label.into(),
        measured,
        bound: format!("< {tol}"),
        ok: measured < tol,
    }
}

fn flag(label: &str, ok: bool) -> Sub {
    Sub {
        label: label.into(),
        measured: if ok { 1.0 } else { 0.0 },
        bound: "== 1".into(),
        ok,
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sup(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

// 1
fn classical_closed_forms() -> Vec<Sub> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut plain, mut turning) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let h0 = rng.gen_range(0.1..3.0);
        let branch = if rng.gen_bool(0.5) {
            Branch::Plus
        } else {
            Branch::Minus
        };
        let with_tp = i % 3 != 0 && rng.gen_bool(0.4);
        let (pot, a, b, tp) = match i % 3 {
            0 => (
                Potential::Free,
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                0.0,
            ),
            1 => {
                let f0 = -rng.gen_range(0.2..3.0);
                let qt = h0 / -f0;
                let a = rng.gen_range(-2.0..0.95 * qt);
                let b = rng.gen_range(-2.0..0.99 * qt);
                (Potential::constant_force(f0, 0.0).unwrap(), a, b, 1.0)
            }
            _ => {
                let omega = rng.gen_range(0.3..3.0);
                let amp = (2.0 * h0).sqrt() / omega;
                let a = rng.gen_range(-0.99 * amp..0.99 * amp);
                let b = rng.gen_range(-0.99 * amp..0.99 * amp);
                (
                    Potential::harmonic(omega).unwrap(),
                    a,
                    b,
                    if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
                )
            }
        };
        let s = ClassicalSetup::new(pot, h0, branch).unwrap();
        let b = if with_tp {
            match pot {
                Potential::Harmonic { .. } => tp * s.amplitude().unwrap(),
                _ => *classical::turning_points(&s, -10.0, 10.0).last().unwrap(),
            }
        } else {
            b
        };
        let quad = classical::time_of_flight(&s, a, b).unwrap();
        let exact =
            classical::analytic_time(&s, b).unwrap() - classical::analytic_time(&s, a).unwrap();
        let rel = (quad - exact).norm() / exact.norm();
        if with_tp {
            turning = turning.max(rel);
        } else {
            plain = plain.max(rel);
        }
    }
    let ho = ClassicalSetup::new(Potential::harmonic(2.0).unwrap(), 0.5, Branch::Minus).unwrap();
    let amp = ho.amplitude().unwrap();
    let quarter = classical::time_of_flight(&ho, 0.0, amp).unwrap();
    vec![
        le("rel err, interior endpoints", plain, 1e-8),
        le("rel err, turning endpoint", turning, 1e-6),
        le(
            "HO quarter period vs pi/(2w)",
            (quarter.re - PI / 4.0).abs(),
            1e-6,
        ),
    ]
}

// 2
fn newton_residual() -> Vec<Sub> {
    let ho = ClassicalSetup::new(Potential::harmonic(1.0).unwrap(), 0.5, Branch::Minus).unwrap();
    let t = classical::trajectory(&ho, -0.5, 0.5, 1001).unwrap();
    let r1 = sup(classical::newton_residual(&t, &ho).unwrap());
    let g = ClassicalSetup::new(
        Potential::constant_force(-1.0, 0.0).unwrap(),
        0.5,
        Branch::Minus,
    )
    .unwrap();
    let t = classical::trajectory(&g, 0.0, 0.4, 1001).unwrap();
    let r2 = sup(classical::newton_residual(&t, &g).unwrap());
    vec![le("harmonic", r1, 1e-4), le("constant force", r2, 1e-4)]
}

// 3
fn forbidden_region() -> Vec<Sub> {
    let mut worst = 0.0f64;
    for (pot, h0, a, b) in [
        (Potential::harmonic(1.0).unwrap(), 0.5, 1.5, 4.0),
        (Potential::Free, -0.5, -1.0, 2.0),
        (Potential::constant_force(-1.0, 0.0).unwrap(), 0.5, 0.7, 3.0),
    ] {
        for br in [Branch::Plus, Branch::Minus] {
            let s = ClassicalSetup::new(pot, h0, br).unwrap();
            worst = worst.max(classical::time_of_flight(&s, a, b).unwrap().re.abs());
        }
    }
    vec![le("|Re dt| on forbidden paths", worst, 1e-12)]
}

fn caputo_error(n: usize, f: impl Fn(f64) -> f64, exact: impl Fn(f64) -> f64) -> f64 {
    let g = CaputoGrid::sample(1.0, n, |t| c(f(t), 0.0)).unwrap();
    let d = caputo_half(&g);
    sup(g
        .t_grid()
        .iter()
        .zip(&d)
        .map(|(&t, v)| (v - exact(t)).norm()))
}

// 4
fn special_functions() -> Vec<Sub> {
    let p = MlEvalPolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut e1 = 0.0f64;
    for _ in 0..100 {
        let z = Complex64::from_polar(5.0 * rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI));
        let v = specfun::mittag_leffler(1.0, z, &p).unwrap();
        e1 = e1.max((v - z.exp()).norm() / z.exp().norm());
    }
    let mut half = 0.0f64;
    for _ in 0..50 {
        let z = Complex64::from_polar(4.0 * rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI));
        let w = z.sqrt();
        let series = ml_series(0.5, w, &p, gamma).unwrap();
        half = half.max((series - z.exp() * erfc_complex(-w)).norm());
    }
    let g = CaputoGrid::sample(1.0, 4001, |_| c(2.5, -1.0)).unwrap();
    let konst = sup(caputo_half(&g).iter().map(|v| v.norm()));
    let lin = caputo_error(4001, |t| t, |t| 2.0 * (t / PI).sqrt());
    let t2 = |t: f64| 8.0 / 3.0 * t.powf(1.5) / PI.sqrt();
    let order = (caputo_error(2001, |t| t * t, t2) / caputo_error(4001, |t| t * t, t2)).log2();
    vec![
        le("E_1 vs exp (relative)", e1, 1e-12),
        le("E_1/2 series vs erfc identity", half, 1e-10),
        le("Caputo of constant", konst, 1e-12),
        le("Caputo of t vs 2 sqrt(t/pi), 4001 pts", lin, 2e-3),
        ge("observed L1 order (t^2, 2001 -> 4001)", order, 1.4),
    ]
}

// 5
fn pide_checks() -> Vec<Sub> {
    let zero = SeparationConstants::new(c(0.0, 0.0), c(0.0, 0.0), 1.0).unwrap();
    let p = PidePair::from_initial(zero, c(0.8, 0.1), c(-0.4, 1.0), 1.0).unwrap();
    let constant = (0..200).all(|i| p.psi(i as f64 * 0.37).unwrap() == (c(0.8, 0.1), c(-0.4, 1.0)));

    let t = specfun::linspace(0.0, 1000.0, 200_001);
    let v = fig2_series(1.0, &t).unwrap();
    let (lo, hi) = band_after(1.0, &t, &v, 50.0).unwrap();
    let band_dev = (hi - 4.0).max(4.0 - lo);

    let pair = PidePair::unit_initial(SeparationConstants::from_k0(1.0, 1.0).unwrap()).unwrap();
    let grid = specfun::linspace(0.0, 2.0, 8001);
    let r = pide::pide_residual(&pair, &grid, 0.1).unwrap();

    let mut rescale = 0.0f64;
    for cc in [0.5, 2.0, 3.0] {
        for &s in &[0.05, 0.7, 3.0, 25.0] {
            let a = fig2_series(cc, &[s]).unwrap()[0];
            let b = fig2_series(1.0, &[cc * s]).unwrap()[0];
            rescale = rescale.max((a - b).abs());
        }
    }
    vec![
        flag("K0 = 0 gives constant psi", constant),
        le(
            "max | |psi+|^2 - 4 | for K0 t >= 50 (band 0.25)",
            band_dev,
            0.25,
        ),
        le(
            "relative residual, 8001 pts, t >= 0.1",
            r.rel_plus.max(r.rel_minus),
            5e-2,
        ),
        le("time-rescaling identity", rescale, 1e-12),
    ]
}

// 6
fn dirac() -> Vec<Sub> {
    let d = DiracMatrices::default();
    let exact = d.alpha * d.alpha == Mat2::identity()
        && d.beta * d.beta == -Mat2::identity()
        && d.alpha * d.beta + d.beta * d.alpha == Mat2::zero();
    vec![
        flag("alpha^2 = I, beta^2 = -I, {alpha, beta} = 0", exact),
        le(
            "factorization, 20 random pairs",
            pide::dirac_factorization_deviation(6, 20),
            1e-12,
        ),
    ]
}

fn phi(n: usize, q: &[f64]) -> Vec<Complex64> {
    q.iter()
        .map(|&x| c(tide::ho_eigenstate(n, x), 0.0))
        .collect()
}

// 7
fn ho_ladder() -> Vec<Sub> {
    let mut out = Vec::new();
    let run = HoRun::new(0.0, 4.0, 4001);
    let sol = run.solve().unwrap();
    let g = decoupled_solution(
        &Potential::harmonic(1.0).unwrap(),
        &PhysicalScales::default(),
        Branch::Minus,
        &sol.q_grid,
        None,
    )
    .unwrap();
    out.push(le(
        "K0 = 0 sup |chi- - Gaussian|",
        sup(sol.chi_minus.iter().zip(&g).map(|(a, b)| (a - b).norm())),
        1e-6,
    ));
    out.push(ge(
        "K0 = 0 overlap with phi_0",
        overlap_modulus(&sol.chi_minus, &phi(0, &sol.q_grid), &sol.q_grid).unwrap(),
        0.999,
    ));
    for k in [1.0, 2.0, 5.0] {
        let run = HoRun::new(k, 2.0 + 0.42 * k, 4001);
        let sol = run.solve().unwrap();
        let ov = ladder_overlaps(&run, &sol).unwrap();
        out.push(ge(
            &format!("k = {k}: chi- vs phi_{k}"),
            ov.overlap_minus.unwrap(),
            0.99,
        ));
        out.push(ge(
            &format!("k = {k}: chi+ vs phi_{}", k - 1.0),
            ov.overlap_plus.unwrap(),
            0.99,
        ));
    }
    let sol = HoRun::new(1.5, 8.0, 3201).solve().unwrap();
    let at = match sol.status {
        RunStatus::DivergedAtQ { q } => q.abs(),
        RunStatus::Converged => f64::INFINITY,
    };
    out.push(lt("K0 = 1.5 hw guard trip |q|", at, 8.0));
    out
}

// 8
fn ho_rotation() -> Vec<Sub> {
    let run = HoRun::new(-1.0, 4.0, 4001).rotated();
    let sol = run.solve().unwrap();
    let q = &sol.q_grid;
    vec![
        flag(
            "bounded (guard not tripped)",
            sol.status == RunStatus::Converged,
        ),
        ge(
            "chi~- vs phi_0",
            overlap_modulus(&sol.chi_minus, &phi(0, q), q).unwrap(),
            0.99,
        ),
        ge(
            "chi~+ vs phi_1",
            overlap_modulus(&sol.chi_plus, &phi(1, q), q).unwrap(),
            0.99,
        ),
    ]
}

// 9
fn hydrogen_decoupled() -> Vec<Sub> {
    let pot = Potential::coulomb(1.0, 1e-3).unwrap();
    let q = specfun::linspace(-1e-3, -130.0, 400_001);
    let s = PhysicalScales::default();
    let mut modulus = 0.0f64;
    let mut increasing = true;
    let mut gap_count = usize::MAX;
    for b in [Branch::Plus, Branch::Minus] {
        let v = decoupled_solution(&pot, &s, b, &q, None).unwrap();
        modulus = modulus.max(sup(v.iter().map(|z| (z.norm() - 1.0).abs())));
        let mut zeros = Vec::new();
        for i in 0..q.len() - 1 {
            let (a, bb) = (v[i].re, v[i + 1].re);
            if a == 0.0 || a.signum() != bb.signum() {
                zeros.push((q[i] - a * (q[i + 1] - q[i]) / (bb - a)).abs());
            }
        }
        let gaps: Vec<f64> = zeros.windows(2).map(|w| w[1] - w[0]).collect();
        gap_count = gap_count.min(gaps.len());
        increasing &= gaps.len() >= 5 && gaps.windows(2).all(|w| w[1] > w[0]);
    }
    vec![
        le("| |chi| - 1 |", modulus, 1e-10),
        flag(
            &format!("zero spacings of Re chi strictly increase with |q| ({gap_count} gaps)"),
            increasing,
        ),
    ]
}

// 10
fn hydrogen_sweep() -> Vec<Sub> {
    let mut out = Vec::new();
    let runs: Vec<(f64, _)> = [-1.28, -0.5, -0.18, -0.02, 0.02, 0.18, 0.5, 1.28]
        .iter()
        .map(|&k| (k, HydrogenRun::new(k).solve().unwrap()))
        .collect();
    let m = |k: f64| {
        let (_, s) = runs.iter().find(|(kk, _)| *kk == k).unwrap();
        hydrogen_metrics(s, -126.0)
    };
    out.push(lt(
        "K0 = -0.02: |chi|^2(q=-126)/peak",
        m(-0.02).tail_ratio,
        1e-4,
    ));
    let exact_peak = {
        let q = specfun::linspace(-130.0, -1e-3, 20001);
        let i = (0..q.len())
            .max_by(|&a, &b| {
                hydrogen_eigenstate(1, Parity::Odd, q[a])
                    .powi(2)
                    .total_cmp(&hydrogen_eigenstate(1, Parity::Odd, q[b]).powi(2))
            })
            .unwrap();
        q[i].abs()
    };
    out.push(lt(
        "K0 = -1.28: |peak q| / exact n=1 |peak q|",
        m(-1.28).peak_q.abs() / exact_peak,
        1.0,
    ));
    let env = runs
        .iter()
        .filter(|(k, _)| *k > 0.0)
        .map(|(k, _)| m(*k).envelope_ratio)
        .fold(f64::INFINITY, f64::min);
    out.push(ge("K0 > 0: far/near envelope of |chi-|^2 (min)", env, 0.5));
    out.push(lt(
        "K0 = +0.02: int|chi+|^2 / int|chi-|^2",
        m(0.02).norm_ratio,
        0.05,
    ));
    let sym = runs
        .iter()
        .filter(|(k, s)| *k < 0.0 && s.status == RunStatus::Converged)
        .count()
        == 4;
    let dev = sup(runs
        .iter()
        .filter(|(k, _)| *k < 0.0)
        .map(|(k, _)| m(*k).symmetry_deviation));
    out.push(flag("K0 < 0 runs converged", sym));
    out.push(le("K0 < 0: Re/Im cross symmetry", dev, 1e-6));
    out
}

// 11
fn superposition() -> Vec<Sub> {
    let t = specfun::linspace(0.0, 6.0 * PI, 60001);
    let (u, ml) = superposition_traces(1.0, 0.5, &t).unwrap();
    let m = superposition_metrics(&t, &u, &ml, 1.0);
    vec![
        le("usual trace period error", m.period_error_usual, 1e-3),
        ge("ML trace 1 - rho(2pi/w)", m.ml_deviation_at_period, 0.05),
    ]
}

// 12
fn determinism() -> Vec<Sub> {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut identical = true;
    let mut files = 0usize;
    for id in ScenarioId::ALL {
        let mut cfg = ScenarioConfig::new(id);
        if id == ScenarioId::HydrogenFig6 {
            cfg.jobs = 4;
        }
        for dir in [a.path(), b.path()] {
            let o = run_scenario(&cfg).unwrap();
            write_outcome(&o, dir, Format::Csv).unwrap();
        }
        let sub = |d: &std::path::Path| {
            let mut v: Vec<_> = std::fs::read_dir(d.join(id.as_str()))
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            v.sort();
            v
        };
        let (fa, fb) = (sub(a.path()), sub(b.path()));
        identical &= fa.len() == fb.len();
        for (x, y) in fa.iter().zip(&fb) {
            files += 1;
            identical &= x.file_name() == y.file_name()
                && std::fs::read(x).unwrap() == std::fs::read(y).unwrap();
        }
    }
    vec![flag(
        &format!("all scenarios byte-identical on re-run ({files} files)"),
        identical,
    )]
}

type Criterion = (&'static str, fn() -> Vec<Sub>);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        (
            "1 classical closed-form equivalence",
            classical_closed_forms,
        ),
        ("2 Newton residual", newton_residual),
        ("3 forbidden region", forbidden_region),
        ("4 special functions", special_functions),
        ("5 PIDE", pide_checks),
        ("6 Dirac factorization", dirac),
        ("7 HO TIDE ladder", ho_ladder),
        ("8 HO backward rotation", ho_rotation),
        ("9 hydrogen decoupled", hydrogen_decoupled),
        ("10 hydrogen sweep", hydrogen_sweep),
        ("11 superposition traces", superposition),
        ("12 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let subs = f();
        let ok = subs.iter().all(|s| s.ok);
        println!(
            "[{}] criterion {name} ({:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        for s in &subs {
            println!(
                "    {} {}: {:.6e} (want {})",
                if s.ok { "ok  " } else { "FAIL" },
                s.label,
                s.measured,
                s.bound
            );
        }
        if !ok {
            failed += 1;
        }
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failed);
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
