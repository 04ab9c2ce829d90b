//! Classical motion with position as the independent variable: the
//! Momentumian P±(q) = ±√(2m(H₀ − V)), the time velocity t′ = dt/dq and the
//! time of flight t(q).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{Branch, PhysicalScales, Potential};
use crate::quadrature::{integrate_sqrt_endpoints, QuadOptions};
use crate::specfun::{check_uniform, linspace};

/// Default number of cells scanned by [`turning_points`].
pub const TURNING_SCAN_CELLS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSetup {
    pub potential: Potential,
    #[serde(default)]
    pub scales: PhysicalScales,
    /// Conserved energy H₀.
    pub h0: f64,
    /// Time at the anchor position `q0`.
    #[serde(default)]
    pub t0: Complex64,
    /// Anchor position of the trajectory and of the free-particle closed form.
    #[serde(default)]
    pub q0: f64,
    pub branch: Branch,
}

impl ClassicalSetup {
    pub fn new(potential: Potential, h0: f64, branch: Branch) -> Result<Self> {
        if !h0.is_finite() {
            return Err(invalid("h0", "must be finite"));
        }
        Ok(Self {
            potential: potential.validated()?,
            scales: PhysicalScales::default(),
            h0,
            t0: Complex64::new(0.0, 0.0),
            q0: 0.0,
            branch,
        })
    }

    pub fn with_scales(mut self, scales: PhysicalScales) -> Self {
        self.scales = scales;
        self
    }

    pub fn with_anchor(mut self, q0: f64, t0: Complex64) -> Self {
        self.q0 = q0;
        self.t0 = t0;
        self
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    fn kinetic(&self, q: f64) -> Result<f64> {
        Ok(self.h0 - self.potential.value(&self.scales, q)?)
    }

    /// Harmonic amplitude A = √(2H₀/(mω²)).
    pub fn amplitude(&self) -> Option<f64> {
        match self.potential {
            Potential::Harmonic { omega } if self.h0 > 0.0 => {
                Some((2.0 * self.h0 / (self.scales.mass * omega * omega)).sqrt())
            }
            _ => None,
        }
    }
}

/// Sampled t(q) with its time velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeTrajectory {
    pub q_grid: Vec<f64>,
    pub t_values: Vec<Complex64>,
    pub t_prime: Vec<Complex64>,
}

/// ±√(2m(H₀ − V(q))), principal root; imaginary in the forbidden region.
pub fn momentumian(setup: &ClassicalSetup, q: f64) -> Result<Complex64> {
    let k = setup.kinetic(q)?;
    Ok(Complex64::new(2.0 * setup.scales.mass * k, 0.0).sqrt() * setup.branch.sign())
}

/// t′(q) = m / P^∓(q); negative on the Plus branch.
pub fn time_velocity(setup: &ClassicalSetup, q: f64) -> Result<Complex64> {
    let k = setup.kinetic(q)?;
    if k == 0.0 {
        return Err(Error::TurningPoint { q });
    }
    Ok(integrand(setup, k))
}

fn integrand(setup: &ClassicalSetup, kinetic: f64) -> Complex64 {
    let m = setup.scales.mass;
    let p = Complex64::new(2.0 * m * kinetic, 0.0).sqrt();
    Complex64::new(-setup.branch.sign() * m, 0.0) / p
}

/// t(q_end) − t(q_start) by quadrature of t′. Turning points are allowed at
/// the endpoints only.
pub fn time_of_flight(setup: &ClassicalSetup, q_start: f64, q_end: f64) -> Result<Complex64> {
    time_of_flight_with(setup, q_start, q_end, &QuadOptions::default())
}

pub fn time_of_flight_with(
    setup: &ClassicalSetup,
    q_start: f64,
    q_end: f64,
    opts: &QuadOptions,
) -> Result<Complex64> {
    setup.potential.check_domain(q_start)?;
    setup.potential.check_domain(q_end)?;
    if q_start == q_end {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (lo, hi) = (q_start.min(q_end), q_start.max(q_end));
    if let Potential::Coulomb1D { epsilon, .. } = setup.potential {
        if lo < epsilon && hi > -epsilon {
            return Err(Error::Domain {
                q: 0.0,
                reason: "path crosses the excluded core around the nucleus".into(),
            });
        }
    }
    let width = hi - lo;
    for tp in turning_points(setup, lo, hi) {
        if tp - lo > 1e-10 * width && hi - tp > 1e-10 * width {
            return Err(Error::InteriorTurningPoint {
                start: q_start,
                end: q_end,
                at: tp,
            });
        }
    }
    let value = integrate_sqrt_endpoints(
        |q| {
            integrand(
                setup,
                setup.h0 - setup.potential.value_unchecked(&setup.scales, q),
            )
        },
        q_start,
        q_end,
        opts,
    )?;
    Ok(value)
}

/// Closed-form t(q) for free, constant-force and harmonic motion.
///
/// * free: t₀ ∓ √(m/2H₀)(q − q₀)
/// * constant force: t₀ ∓ √(2m(H₀ + F₀(q − q₀)))/F₀
/// * harmonic: t₀ ± (1/ω)·arccos(q/A), so that t = t₀ at q = A
///
/// Upper signs belong to the Plus branch.
pub fn analytic_time(setup: &ClassicalSetup, q: f64) -> Result<Complex64> {
    let m = setup.scales.mass;
    let sign = setup.branch.sign();
    match setup.potential {
        Potential::Free => {
            let c = Complex64::new(m / (2.0 * setup.h0), 0.0).sqrt();
            Ok(setup.t0 - c * (sign * (q - setup.q0)))
        }
        Potential::ConstantForce { f0, q0 } => {
            if f0 == 0.0 {
                let free = ClassicalSetup {
                    potential: Potential::Free,
                    q0,
                    ..*setup
                };
                return analytic_time(&free, q);
            }
            let root = Complex64::new(2.0 * m * (setup.h0 + f0 * (q - q0)), 0.0).sqrt();
            Ok(setup.t0 - root * (sign / f0))
        }
        Potential::Harmonic { omega } => {
            let a = setup
                .amplitude()
                .ok_or_else(|| invalid("h0", "harmonic closed form needs H0 > 0"))?;
            if q.abs() > a {
                return Err(Error::Domain {
                    q,
                    reason: format!("beyond the amplitude A = {a}"),
                });
            }
            Ok(setup.t0 + sign * (q / a).acos() / omega)
        }
        _ => Err(Error::Unsupported("closed-form time for this potential")),
    }
}

/// Samples t(q_i) = t₀ + Δt(q0 → q_i) on `n` uniform points of [q_min, q_max].
pub fn trajectory(
    setup: &ClassicalSetup,
    q_min: f64,
    q_max: f64,
    n: usize,
) -> Result<TimeTrajectory> {
    if n < 2 {
        return Err(invalid("n", "need at least 2 points"));
    }
    let q_grid = linspace(q_min, q_max, n);
    let mut t_values = Vec::with_capacity(n);
    let mut t_prime = Vec::with_capacity(n);
    for &q in &q_grid {
        t_values.push(setup.t0 + time_of_flight(setup, setup.q0, q)?);
        t_prime.push(match time_velocity(setup, q) {
            Ok(v) => v,
            Err(Error::TurningPoint { .. }) => Complex64::new(f64::INFINITY, 0.0),
            Err(e) => return Err(e),
        });
    }
    Ok(TimeTrajectory {
        q_grid,
        t_values,
        t_prime,
    })
}

/// |−m·t″/t′³ − F| at interior points; t″ by centered differences, t′ exact.
pub fn newton_residual(traj: &TimeTrajectory, setup: &ClassicalSetup) -> Result<Vec<f64>> {
    let h = check_uniform(&traj.q_grid, 5)?;
    let m = setup.scales.mass;
    let t = &traj.t_values;
    let mut out = Vec::with_capacity(t.len() - 2);
    for i in 1..t.len() - 1 {
        let q = traj.q_grid[i];
        let tpp = (t[i + 1] - t[i] * 2.0 + t[i - 1]) / (h * h);
        let tp = time_velocity(setup, q)?;
        let f = setup.potential.force(&setup.scales, q)?;
        out.push((-(tpp * m) / (tp * tp * tp) - f).norm());
    }
    Ok(out)
}

/// H(q) = m/(2t′²) + V(q) along a trajectory.
pub fn energy_along(traj: &TimeTrajectory, setup: &ClassicalSetup) -> Result<Vec<Complex64>> {
    traj.q_grid
        .iter()
        .zip(&traj.t_prime)
        .map(|(&q, tp)| {
            let v = setup.potential.value(&setup.scales, q)?;
            Ok(Complex64::new(setup.scales.mass, 0.0) / (tp * tp * 2.0) + v)
        })
        .collect()
}

/// Roots of H₀ − V(q) in [lo, hi] found by a uniform sign-change scan and
/// bisection to 1e−12.
pub fn turning_points(setup: &ClassicalSetup, lo: f64, hi: f64) -> Vec<f64> {
    turning_points_with(setup, lo, hi, TURNING_SCAN_CELLS)
}

pub fn turning_points_with(setup: &ClassicalSetup, lo: f64, hi: f64, cells: usize) -> Vec<f64> {
    let g = |q: f64| setup.h0 - setup.potential.value_unchecked(&setup.scales, q);
    let nodes = linspace(lo, hi, cells.max(1) + 1);
    let mut roots: Vec<f64> = Vec::new();
    for (i, &q) in nodes.iter().enumerate() {
        if setup.potential.admits(q) && g(q) == 0.0 {
            roots.push(q);
            continue;
        }
        if i + 1 == nodes.len() {
            break;
        }
        let (mut a, mut b) = (q, nodes[i + 1]);
        if !(setup.potential.admits(a) && setup.potential.admits(b)) {
            continue;
        }
        if let Potential::Coulomb1D { .. } = setup.potential {
            if a < 0.0 && b > 0.0 {
                continue;
            }
        }
        let (ga, gb) = (g(a), g(b));
        if ga == 0.0 || gb == 0.0 || ga.signum() == gb.signum() {
            continue;
        }
        loop {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if g(m) == 0.0 {
                a = m;
                b = m;
                break;
            }
            if g(m).signum() == ga.signum() {
                a = m;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn free(h0: f64, b: Branch) -> ClassicalSetup {
        ClassicalSetup::new(Potential::Free, h0, b).unwrap()
    }

    fn ho(h0: f64, b: Branch) -> ClassicalSetup {
        ClassicalSetup::new(Potential::harmonic(1.0).unwrap(), h0, b).unwrap()
    }

    #[test]
    fn momentumian_examples() {
        assert_eq!(
            momentumian(&free(0.5, Branch::Plus), 3.0).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(
            momentumian(&ho(0.5, Branch::Plus), 1.0).unwrap().norm(),
            0.0
        );
        let f = momentumian(&free(-0.5, Branch::Plus), 0.0).unwrap();
        assert!((f - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn time_velocity_examples() {
        assert_eq!(
            time_velocity(&free(0.5, Branch::Plus), 0.0).unwrap(),
            Complex64::new(-1.0, 0.0)
        );
        assert_eq!(
            time_velocity(&ho(0.5, Branch::Minus), 0.0).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        assert!(matches!(
            time_velocity(&ho(0.5, Branch::Minus), 1.0),
            Err(Error::TurningPoint { .. })
        ));
        let near = time_velocity(&ho(0.5, Branch::Minus), 1.0 - 1e-10).unwrap();
        assert!(near.norm() > 1e4);
    }

    #[test]
    fn time_velocity_times_opposite_momentumian_is_mass() {
        for b in [Branch::Plus, Branch::Minus] {
            let s = ho(0.8, b);
            for q in [-1.5, -0.3, 0.2, 1.1] {
                let tp = time_velocity(&s, q).unwrap();
                let p = momentumian(&s.with_branch(b.swap()), q).unwrap();
                assert!((tp * p - 1.0).norm() < 1e-14, "q={q}");
            }
        }
    }

    #[test]
    fn tof_examples() {
        let f = time_of_flight(&free(0.5, Branch::Minus), 0.0, 1.0).unwrap();
        assert!((f.re - 1.0).abs() < 1e-13 && f.im == 0.0);
        let h = time_of_flight(&ho(0.5, Branch::Minus), 0.0, 1.0).unwrap();
        assert!((h.re - PI / 2.0).abs() < 1e-10, "{h}");
        let g = ClassicalSetup::new(
            Potential::constant_force(-1.0, 0.0).unwrap(),
            0.5,
            Branch::Minus,
        )
        .unwrap();
        let c = time_of_flight(&g, 0.0, 0.5).unwrap();
        assert!((c.re - 1.0).abs() < 1e-10, "{c}");
    }

    #[test]
    fn interior_turning_point_rejected() {
        assert!(matches!(
            time_of_flight(&ho(0.5, Branch::Minus), 0.0, 2.0),
            Err(Error::InteriorTurningPoint { .. })
        ));
    }

    #[test]
    fn analytic_examples() {
        assert_eq!(
            analytic_time(&ho(0.5, Branch::Minus), 1.0).unwrap().norm(),
            0.0
        );
        let q0 = analytic_time(&ho(0.5, Branch::Minus), 0.0).unwrap();
        assert!((q0.re + PI / 2.0).abs() < 1e-15);
        let s = free(0.5, Branch::Plus).with_anchor(1.0, Complex64::new(0.0, 0.0));
        assert_eq!(analytic_time(&s, 3.0).unwrap(), Complex64::new(-2.0, 0.0));
        let c = ClassicalSetup::new(Potential::coulomb(1.0, 1e-3).unwrap(), -0.5, Branch::Plus)
            .unwrap();
        assert!(matches!(
            analytic_time(&c, -1.0),
            Err(Error::Unsupported(_))
        ));
        assert!(analytic_time(&ho(0.5, Branch::Plus), 1.5).is_err());
    }

    #[test]
    fn turning_point_examples() {
        let r = turning_points(&ho(0.5, Branch::Plus), -2.0, 2.0);
        assert_eq!(r.len(), 2);
        assert!((r[0] + 1.0).abs() < 1e-12 && (r[1] - 1.0).abs() < 1e-12);
        assert!(turning_points(&free(1.0, Branch::Plus), -5.0, 5.0).is_empty());
        let g = ClassicalSetup::new(
            Potential::constant_force(-1.0, 0.0).unwrap(),
            0.5,
            Branch::Plus,
        )
        .unwrap();
        let r = turning_points(&g, 0.0, 2.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.5).abs() < 1e-12);
        let c = ClassicalSetup::new(Potential::coulomb(1.0, 1e-3).unwrap(), -0.5, Branch::Plus)
            .unwrap();
        let r = turning_points(&c, -5.0, 5.0);
        assert_eq!(r.len(), 2, "{r:?}");
        assert!((r[0] + 2.0).abs() < 1e-12 && (r[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn free_newton_residual_is_zero() {
        let s = free(0.5, Branch::Minus);
        let tr = trajectory(&s, -1.0, 1.0, 101).unwrap();
        let r = newton_residual(&tr, &s).unwrap();
        assert!(r.iter().all(|&x| x <= 1e-10));
    }

    #[test]
    fn newton_residual_rejects_nonuniform_grid() {
        let s = free(0.5, Branch::Minus);
        let mut tr = trajectory(&s, -1.0, 1.0, 11).unwrap();
        tr.q_grid[3] += 0.01;
        assert!(matches!(newton_residual(&tr, &s), Err(Error::Grid(_))));
    }

    #[test]
    fn forbidden_path_is_purely_imaginary() {
        let s = ho(0.5, Branch::Plus);
        let dt = time_of_flight(&s, 1.5, 3.0).unwrap();
        assert!(dt.re.abs() <= 1e-12 && dt.im.abs() > 0.1, "{dt}");
    }
}
