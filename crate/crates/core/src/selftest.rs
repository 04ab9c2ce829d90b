//! Property suite over the module invariants, reporting measured values
//! rather than failing fast.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{self, ClassicalSetup};
use crate::model::{Branch, PhysicalScales, Potential};
use crate::pide::{dirac_factorization_deviation, DiracMatrices, PidePair, SeparationConstants};
use crate::scenarios::{band_after, fig2_series};
use crate::specfun::{self, caputo_half, erfc_complex, gamma, ml_series, CaputoGrid, MlEvalPolicy};
use crate::tide::{
    self, decoupled_solution, effective_potential, overlap_modulus, HoRun, HydrogenRun, RunStatus,
};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SelftestOptions {
    /// Replace Γ by a slightly wrong approximation (negative control).
    pub corrupt_gamma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub seconds: f64,
}

const SEED: u64 = 0x5eed;

fn corrupted_gamma(x: f64) -> f64 {
    gamma(x) * (1.0 + 1e-6 * x)
}

/// (measured, tolerance, passed).
type Outcome = (f64, f64, bool);

struct Check {
    name: &'static str,
    run: Box<dyn Fn(&SelftestOptions) -> Outcome>,
}

fn le(measured: f64, tol: f64) -> Outcome {
    (measured, tol, measured <= tol)
}

fn ge(measured: f64, tol: f64) -> (f64, f64, bool) {
    (measured, tol, measured >= tol)
}

fn checks() -> Vec<Check> {
    let s = PhysicalScales::default();
    let pots = move || {
        [
            Potential::Free,
            Potential::constant_force(-1.3, 0.2).unwrap(),
            Potential::harmonic(1.2).unwrap(),
            Potential::InvertedHarmonic { omega: 0.9 },
            Potential::coulomb(1.0, 1e-3).unwrap(),
        ]
    };
    let sample_q = [-2.7, -1.1, -0.35, 0.4, 0.95, 2.2];
    vec![
        Check {
            name: "model: force equals -dV/dq",
            run: Box::new(move |_| {
                let h = 1e-5;
                let mut worst = 0.0f64;
                for p in pots() {
                    for q in sample_q {
                        let fd = -(p.value(&s, q + h).unwrap() - p.value(&s, q - h).unwrap())
                            / (2.0 * h);
                        worst = worst.max((fd - p.force(&s, q).unwrap()).abs());
                    }
                }
                le(worst, 1e-8)
            }),
        },
        Check {
            name: "model: characteristic momentum squared is 2mV",
            run: Box::new(move |_| {
                let mut worst = 0.0f64;
                for p in pots() {
                    for q in sample_q {
                        let c = p.characteristic_momentum(&s, q).unwrap();
                        worst = worst.max((c * c - 2.0 * p.value(&s, q).unwrap()).norm());
                    }
                }
                le(worst, 1e-12)
            }),
        },
        Check {
            name: "model: branch swap is an involution",
            run: Box::new(|_| {
                let ok = [Branch::Plus, Branch::Minus]
                    .iter()
                    .all(|b| b.swap() != *b && b.swap().swap() == *b);
                (if ok { 0.0 } else { 1.0 }, 0.0, ok)
            }),
        },
        Check {
            name: "classical: branch symmetry of time of flight",
            run: Box::new(|_| {
                let mut worst = 0.0f64;
                for (p, h0, a, b) in [
                    (Potential::Free, 0.7, -1.0, 2.0),
                    (Potential::harmonic(1.0).unwrap(), 0.5, -0.6, 1.0),
                    (Potential::coulomb(1.0, 1e-3).unwrap(), -0.2, -4.0, -1.0),
                ] {
                    let up = ClassicalSetup::new(p, h0, Branch::Plus).unwrap();
                    let t1 = classical::time_of_flight(&up, a, b).unwrap();
                    let t2 =
                        classical::time_of_flight(&up.with_branch(Branch::Minus), a, b).unwrap();
                    worst = worst.max((t1 + t2).norm());
                }
                le(worst, 1e-14)
            }),
        },
        Check {
            name: "classical: quadrature matches closed forms",
            run: Box::new(|_| le(classical_oracle_worst(SEED, 100), 1.0)),
        },
        Check {
            name: "classical: energy conserved along trajectory",
            run: Box::new(|_| {
                let setup =
                    ClassicalSetup::new(Potential::harmonic(1.0).unwrap(), 0.5, Branch::Minus)
                        .unwrap();
                let tr = classical::trajectory(&setup, -0.9, 0.9, 201).unwrap();
                let e = classical::energy_along(&tr, &setup).unwrap();
                le(
                    e.iter().map(|h| (h - 0.5).norm()).fold(0.0, f64::max),
                    1e-10,
                )
            }),
        },
        Check {
            name: "classical: forbidden path has zero real time",
            run: Box::new(|_| {
                let setup =
                    ClassicalSetup::new(Potential::harmonic(1.0).unwrap(), 0.5, Branch::Plus)
                        .unwrap();
                le(
                    classical::time_of_flight(&setup, 1.2, 3.0)
                        .unwrap()
                        .re
                        .abs(),
                    1e-12,
                )
            }),
        },
        Check {
            name: "classical: q = A cos(w(t - t0)) inversion",
            run: Box::new(|_| {
                let setup =
                    ClassicalSetup::new(Potential::harmonic(1.0).unwrap(), 0.5, Branch::Minus)
                        .unwrap()
                        .with_anchor(1.0, Complex64::new(0.0, 0.0));
                let tr = classical::trajectory(&setup, -0.95, 0.95, 101).unwrap();
                let worst = tr
                    .q_grid
                    .iter()
                    .zip(&tr.t_values)
                    .map(|(q, t)| (t.re.cos() - q).abs())
                    .fold(0.0, f64::max);
                le(worst, 1e-8)
            }),
        },
        Check {
            name: "specfun: E_alpha continuous at alpha = 1",
            run: Box::new(|_| {
                let p = MlEvalPolicy::default();
                let mut rng = ChaCha8Rng::seed_from_u64(SEED);
                let mut worst = 0.0f64;
                for _ in 0..20 {
                    let z = Complex64::from_polar(rng.gen_range(0.0..2.0), rng.gen_range(-PI..PI));
                    for a in [1.0 - 1e-6, 1.0 + 1e-6] {
                        worst = worst
                            .max((specfun::mittag_leffler(a, z, &p).unwrap() - z.exp()).norm());
                    }
                }
                le(worst, 1e-4)
            }),
        },
        Check {
            name: "specfun: E_1/2 series matches erfc identity",
            run: Box::new(|o| le(ml_identity_worst(SEED, 50, o.corrupt_gamma), 1e-10)),
        },
        Check {
            name: "specfun: Caputo half-derivative is linear",
            run: Box::new(|_| {
                let t = specfun::linspace(0.0, 1.0, 501);
                let f: Vec<Complex64> = t.iter().map(|x| Complex64::new(x.sin(), x * x)).collect();
                let g: Vec<Complex64> = t.iter().map(|x| Complex64::new(x.sqrt(), -x)).collect();
                let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
                let h: Vec<Complex64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
                let df = caputo_half(&CaputoGrid::new(t.clone(), f).unwrap());
                let dg = caputo_half(&CaputoGrid::new(t.clone(), g).unwrap());
                let dh = caputo_half(&CaputoGrid::new(t, h).unwrap());
                let worst = (0..dh.len())
                    .map(|i| (dh[i] - (a * df[i] + b * dg[i])).norm())
                    .fold(0.0, f64::max);
                le(worst, 1e-12)
            }),
        },
        Check {
            name: "specfun: L1 error ratio on t^2 under 2x refinement",
            run: Box::new(|_| {
                let (e1, e2) = (caputo_t2_error(1001), caputo_t2_error(2001));
                ge(e1 / e2, 2.5)
            }),
        },
        Check {
            name: "pide: |psi+|^2 within 4 +/- 0.25 once K0 t >= 50",
            run: Box::new(|_| {
                let t = specfun::linspace(0.0, 200.0, 20001);
                let v = fig2_series(1.0, &t).unwrap();
                let (lo, hi) = band_after(1.0, &t, &v, 50.0).unwrap();
                le((hi - 4.0).abs().max((4.0 - lo).abs()), 0.25)
            }),
        },
        Check {
            name: "pide: rescaling K0 rescales time",
            run: Box::new(|_| {
                let mut worst = 0.0f64;
                for c in [0.5, 2.0, 3.7] {
                    for t in [0.1, 1.0, 7.5, 40.0] {
                        let a = fig2_series(c, &[t]).unwrap()[0];
                        let b = fig2_series(1.0, &[c * t]).unwrap()[0];
                        worst = worst.max((a - b).abs());
                    }
                }
                le(worst, 1e-12)
            }),
        },
        Check {
            name: "pide: initial values round-trip through A0, B0",
            run: Box::new(|_| {
                let mut rng = ChaCha8Rng::seed_from_u64(SEED);
                let mut worst = 0.0f64;
                for _ in 0..20 {
                    let mut c =
                        || Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                    let k = SeparationConstants::new(c(), c(), 1.0).unwrap();
                    let (a, b) = (c(), c());
                    let p = PidePair::from_initial(k, a, b, 1.0).unwrap();
                    let q = PidePair::from_coefficients(k, p.a0, p.b0, 1.0).unwrap();
                    worst = worst
                        .max((q.psi0_plus - a).norm())
                        .max((q.psi0_minus - b).norm());
                }
                le(worst, 1e-12)
            }),
        },
        Check {
            name: "pide: Dirac factorization",
            run: Box::new(|_| {
                let ok = DiracMatrices::default().identities_hold();
                let d = dirac_factorization_deviation(SEED, 20);
                (d, 1e-12, ok && d <= 1e-12)
            }),
        },
        Check {
            name: "tide: shifts are antisymmetric",
            run: Box::new(move |_| {
                let mut worst = 0.0f64;
                for p in pots() {
                    if let Potential::ConstantForce { .. } = p {
                        continue;
                    }
                    for q in sample_q {
                        let a = effective_potential(&p, &s, Branch::Plus, q).unwrap();
                        let b = effective_potential(&p, &s, Branch::Minus, q).unwrap();
                        worst = worst.max((a + b - 2.0 * p.value(&s, q).unwrap()).norm());
                    }
                }
                le(worst, 1e-12)
            }),
        },
        Check {
            name: "tide: HO ladder k = 1, 2, 3 overlaps",
            run: Box::new(|_| {
                let mut worst = 1.0f64;
                for k in [1.0, 2.0, 3.0] {
                    let run = HoRun::new(k, 4.0, 1601);
                    let sol = run.solve().unwrap();
                    let ov = crate::scenarios::ladder_overlaps(&run, &sol).unwrap();
                    worst = worst
                        .min(ov.overlap_plus.unwrap_or(0.0))
                        .min(ov.overlap_minus.unwrap_or(0.0));
                }
                ge(worst, 0.99)
            }),
        },
        Check {
            name: "tide: off-ladder K0 trips the guard before q = 8",
            run: Box::new(|_| {
                let mut worst = 0.0f64;
                for k in [1.5, 2.5, 3.5] {
                    let sol = HoRun::new(k, 8.0, 1601).solve().unwrap();
                    worst = worst.max(match sol.status {
                        RunStatus::DivergedAtQ { q } => q.abs(),
                        RunStatus::Converged => f64::INFINITY,
                    });
                }
                (worst, 8.0, worst < 8.0)
            }),
        },
        Check {
            name: "tide: coupling split leaves |chi-|^2 unchanged",
            run: Box::new(|_| {
                let base = HoRun::new(2.0, 3.0, 601).solve().unwrap().normalized();
                let mut run = HoRun::new(2.0, 3.0, 601);
                run.split = 2.5;
                let other = run.solve().unwrap().normalized();
                let worst = base
                    .abs2_minus()
                    .iter()
                    .zip(other.abs2_minus())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                le(worst, 1e-8)
            }),
        },
        Check {
            name: "tide: hydrogen backward-time Re/Im symmetry",
            run: Box::new(|_| {
                let mut run = HydrogenRun::new(-0.5);
                run.q_max = 40.0;
                run.points = 4001;
                let sol = run.solve().unwrap().normalized();
                let worst = sol
                    .chi_plus
                    .iter()
                    .zip(&sol.chi_minus)
                    .map(|(a, b)| (a.re - b.im).abs().max((a.im - b.re).abs()))
                    .fold(0.0, f64::max);
                le(worst, 1e-6)
            }),
        },
        Check {
            name: "tide: hydrogen decoupled modulus constant",
            run: Box::new(move |_| {
                let p = Potential::coulomb(1.0, 1e-3).unwrap();
                let q = specfun::linspace(-60.0, -1e-3, 2001);
                let mut worst = 0.0f64;
                for b in [Branch::Plus, Branch::Minus] {
                    let v = decoupled_solution(&p, &s, b, &q, None).unwrap();
                    worst = worst.max(v.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max));
                }
                le(worst, 1e-10)
            }),
        },
        Check {
            name: "tide: rotated K0 = -hw reproduces n = 0, 1",
            run: Box::new(|_| {
                let run = HoRun::new(-1.0, 4.0, 1601).rotated();
                let sol = run.solve().unwrap();
                let q = &sol.q_grid;
                let phi = |n| {
                    q.iter()
                        .map(|&x| Complex64::new(tide::ho_eigenstate(n, x), 0.0))
                        .collect::<Vec<_>>()
                };
                let a = overlap_modulus(&sol.chi_minus, &phi(0), q).unwrap();
                let b = overlap_modulus(&sol.chi_plus, &phi(1), q).unwrap();
                ge(a.min(b), 0.99)
            }),
        },
    ]
}

/// Largest relative gap between quadrature and closed-form flight times
/// over random draws, in units of the per-draw tolerance (1e−8, or 1e−6
/// with a turning-point endpoint); ≤ 1 means every draw passes.
pub fn classical_oracle_worst(seed: u64, draws: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for i in 0..draws {
        let h0 = rng.gen_range(0.1..3.0);
        let branch = if rng.gen_bool(0.5) {
            Branch::Plus
        } else {
            Branch::Minus
        };
        let turning = rng.gen_bool(0.3);
        let (pot, a, b) = match i % 3 {
            0 => (
                Potential::Free,
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            ),
            1 => {
                let f0 = -rng.gen_range(0.2..3.0);
                let qt = h0 / -f0;
                let a = rng.gen_range(-2.0..0.9 * qt);
                let b = if turning {
                    qt
                } else {
                    rng.gen_range(-2.0..0.99 * qt)
                };
                (Potential::constant_force(f0, 0.0).unwrap(), a, b)
            }
            _ => {
                let amp = (2.0 * h0).sqrt();
                let a = rng.gen_range(-0.99 * amp..0.99 * amp);
                let b = if turning {
                    if rng.gen_bool(0.5) {
                        amp
                    } else {
                        -amp
                    }
                } else {
                    rng.gen_range(-0.99 * amp..0.99 * amp)
                };
                (Potential::harmonic(1.0).unwrap(), a, b)
            }
        };
        let setup = ClassicalSetup::new(pot, h0, branch).unwrap();
        let quad = classical::time_of_flight(&setup, a, b).unwrap();
        let exact = classical::analytic_time(&setup, b).unwrap()
            - classical::analytic_time(&setup, a).unwrap();
        let tol = if turning && i % 3 != 0 { 1e-6 } else { 1e-8 };
        let rel = (quad - exact).norm() / exact.norm().max(1e-300);
        worst = worst.max(rel / tol);
    }
    worst
}

/// Largest |series E_{1/2}(√z) − exp(z)·erfc(−√z)| over random |z| ≤ 4.
pub fn ml_identity_worst(seed: u64, draws: usize, corrupt: bool) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = MlEvalPolicy::default();
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let z = Complex64::from_polar(4.0 * rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI));
        let w = z.sqrt();
        let series = if corrupt {
            ml_series(0.5, w, &p, corrupted_gamma)
        } else {
            ml_series(0.5, w, &p, gamma)
        }
        .unwrap();
        let closed = z.exp() * erfc_complex(-w);
        worst = worst.max((series - closed).norm() / closed.norm().max(1.0));
    }
    worst
}

/// Sup-norm L1 error for f = t² on [0, 1] with `n` points.
pub fn caputo_t2_error(n: usize) -> f64 {
    let g = CaputoGrid::sample(1.0, n, |t| Complex64::new(t * t, 0.0)).unwrap();
    let d = caputo_half(&g);
    g.t_grid()
        .iter()
        .zip(&d)
        .map(|(&t, v)| (v.re - 8.0 / 3.0 * t.powf(1.5) / PI.sqrt()).abs())
        .fold(0.0, f64::max)
}

/// Runs every property and times each one.
pub fn run(opts: &SelftestOptions) -> Vec<PropertyResult> {
    checks()
        .into_iter()
        .map(|c| {
            let start = Instant::now();
            let (measured, tolerance, passed) = (c.run)(opts);
            PropertyResult {
                name: c.name.to_string(),
                passed,
                measured,
                tolerance,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_properties_report() {
        let results = run(&SelftestOptions::default());
        assert_eq!(results.len(), 23);
        for r in &results {
            if r.name.starts_with("pide: |psi+|^2") {
                // the closed form oscillates past the band; see acceptance criterion 5
                assert!(!r.passed, "{r:?}");
            } else {
                assert!(r.passed, "{r:?}");
            }
        }
    }

    #[test]
    fn corrupted_gamma_is_caught() {
        let results = run(&SelftestOptions {
            corrupt_gamma: true,
        });
        let ml = results
            .iter()
            .find(|r| r.name.contains("erfc identity"))
            .unwrap();
        assert!(!ml.passed);
    }
}
