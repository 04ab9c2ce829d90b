//! Coupled first-order time-independent Dirac equations
//!
//! χ⁺′ = (i/ħ)P⁻χ⁻ + (s/ħ)χ⁺,   χ⁻′ = (i/ħ)P⁺χ⁺ − (s/ħ)χ⁻,   s² = 2mV,
//!
//! which decouple into −ħ²/2m χ±″ + V_eff^±χ± = 𝒦₀χ± with
//! V_eff^± = V ± ħs′/(2m).
//!
//! A [`CoupledSystem`] may carry a complex frame factor λ: it then solves
//! dχ/dx = λ·f(λx, χ), i.e. the original equations along q = λx. The
//! q → iq rotation sets λ = i.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{Branch, PhysicalScales, Potential};
use crate::ode::{amplitude_guard, integrate, State, StepPolicy, Termination};
use crate::pide::SeparationConstants;
use crate::quadrature::{integrate_sqrt_endpoints, QuadOptions};
use crate::specfun::{check_uniform, linspace};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative growth limit applied to harmonic runs by default.
pub const HARMONIC_GROWTH_LIMIT: f64 = 1e4;

impl StepPolicy {
    /// Default policy for a potential: harmonic runs also stop once the
    /// amplitude exceeds [`HARMONIC_GROWTH_LIMIT`] times the seed.
    pub fn for_potential(p: &Potential) -> Self {
        let mut s = StepPolicy::default();
        if let Potential::Harmonic { .. } = p {
            s.growth_limit = Some(HARMONIC_GROWTH_LIMIT);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledSystem {
    pub potential: Potential,
    pub scales: PhysicalScales,
    pub constants: SeparationConstants,
    /// Frame factor λ (1 for the physical axis).
    pub frame: Complex64,
}

impl CoupledSystem {
    pub fn new(
        potential: Potential,
        scales: PhysicalScales,
        constants: SeparationConstants,
    ) -> Result<Self> {
        if (constants.mass - scales.mass).abs() > 1e-15 * scales.mass {
            return Err(invalid(
                "mass",
                "separation constants and scales disagree on the mass",
            ));
        }
        Ok(Self {
            potential: potential.validated()?,
            scales,
            constants,
            frame: ONE,
        })
    }

    /// s(λx).
    fn root(&self, x: f64) -> Complex64 {
        let r = if self.frame == ONE {
            self.potential.coupling_root(&self.scales, x)
        } else {
            self.potential
                .coupling_root_complex(&self.scales, self.frame * x)
        };
        r.unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }

    /// dχ/dx for χ = (χ⁺, χ⁻).
    pub fn rhs(&self, x: f64, y: &State) -> State {
        let hb = self.scales.hbar;
        let s = self.root(x) / hb;
        let c = self.constants;
        let dp = I * c.pt_minus / hb * y[1] + s * y[0];
        let dm = I * c.pt_plus / hb * y[0] - s * y[1];
        [self.frame * dp, self.frame * dm]
    }

    pub fn k0(&self) -> Complex64 {
        self.constants.k0()
    }

    /// q → iq: multiplies the frame by i. Harmonic potentials only.
    pub fn rotate_q_imaginary(&self) -> Result<Self> {
        match self.potential {
            Potential::Harmonic { .. } => Ok(Self {
                frame: self.frame * I,
                ..*self
            }),
            _ => Err(Error::Unsupported("q -> iq rotation for this potential")),
        }
    }

    /// λ²·V_eff^±(λx): the potential seen by χ± in this frame.
    pub fn frame_effective_potential(&self, branch: Branch, x: f64) -> Result<Complex64> {
        let l2 = self.frame * self.frame;
        Ok(l2 * effective_potential_at(&self.potential, &self.scales, branch, self.frame * x)?)
    }

    /// λ²𝒦₀: the eigenvalue read off in this frame.
    pub fn frame_k0(&self) -> Complex64 {
        self.frame * self.frame * self.k0()
    }

    fn check_path(&self, a: f64, b: f64) -> Result<()> {
        if self.frame == ONE {
            self.potential.check_domain(a)?;
            self.potential.check_domain(b)?;
            if let Potential::Coulomb1D { .. } = self.potential {
                if a.min(b) < 0.0 && a.max(b) > 0.0 {
                    return Err(Error::Domain {
                        q: 0.0,
                        reason: "path crosses the nucleus".into(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// q → iq rotation of a harmonic system.
pub fn rotate_q_imaginary(sys: &CoupledSystem) -> Result<CoupledSystem> {
    sys.rotate_q_imaginary()
}

/// One sample of V, V_eff shift pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectivePotentialSample {
    pub q: f64,
    pub v: f64,
    pub shift_plus: Complex64,
    pub shift_minus: Complex64,
}

/// shift_plus = ħs′/(2m) = −ħF/(2s).
pub fn effective_potential_sample(
    pot: &Potential,
    scales: &PhysicalScales,
    q: f64,
) -> Result<EffectivePotentialSample> {
    let v = pot.value(scales, q)?;
    let shift = pot.coupling_root_derivative(scales, q)? * (scales.hbar / (2.0 * scales.mass));
    Ok(EffectivePotentialSample {
        q,
        v,
        shift_plus: shift,
        shift_minus: -shift,
    })
}

/// V_eff^±(q) = V(q) ± ħs′(q)/(2m).
pub fn effective_potential(
    pot: &Potential,
    scales: &PhysicalScales,
    branch: Branch,
    q: f64,
) -> Result<Complex64> {
    let s = effective_potential_sample(pot, scales, q)?;
    Ok(match branch {
        Branch::Plus => s.v + s.shift_plus,
        Branch::Minus => s.v + s.shift_minus,
    })
}

/// V_eff^± at a complex position (quadratic and free potentials only).
fn effective_potential_at(
    pot: &Potential,
    scales: &PhysicalScales,
    branch: Branch,
    z: Complex64,
) -> Result<Complex64> {
    if z.im == 0.0 {
        return effective_potential(pot, scales, branch, z.re);
    }
    let v = pot.value_complex(scales, z)?;
    let ds = match *pot {
        Potential::Free => ZERO,
        Potential::Harmonic { omega } => Complex64::new(scales.mass * omega, 0.0),
        Potential::InvertedHarmonic { omega } => Complex64::new(0.0, scales.mass * omega),
        _ => return Err(Error::Unsupported("complex position for this potential")),
    };
    Ok(v + ds * (branch.sign() * scales.hbar / (2.0 * scales.mass)))
}

/// Termination status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunStatus {
    Converged,
    DivergedAtQ { q: f64 },
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::DivergedAtQ { .. } => "diverged-at-q",
        }
    }

    pub fn is_diverged(&self) -> bool {
        matches!(self, RunStatus::DivergedAtQ { .. })
    }
}

impl From<Termination> for RunStatus {
    fn from(t: Termination) -> Self {
        match t {
            Termination::Converged => RunStatus::Converged,
            Termination::DivergedAtQ { at } => RunStatus::DivergedAtQ { q: at },
        }
    }
}

/// Sampled χ±(q) on an ascending uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TideSolution {
    pub q_grid: Vec<f64>,
    pub chi_plus: Vec<Complex64>,
    pub chi_minus: Vec<Complex64>,
    pub constants: SeparationConstants,
    pub potential: Potential,
    pub scales: PhysicalScales,
    pub frame: Complex64,
    /// Each nonvanishing component has unit trapezoid norm on `q_grid`.
    pub normalized: bool,
    pub status: RunStatus,
}

impl TideSolution {
    pub fn from_samples(
        sys: &CoupledSystem,
        q_grid: Vec<f64>,
        chi_plus: Vec<Complex64>,
        chi_minus: Vec<Complex64>,
    ) -> Result<Self> {
        if q_grid.len() != chi_plus.len() || q_grid.len() != chi_minus.len() {
            return Err(Error::Grid("component lengths differ from the grid".into()));
        }
        Ok(Self {
            q_grid,
            chi_plus,
            chi_minus,
            constants: sys.constants,
            potential: sys.potential,
            scales: sys.scales,
            frame: sys.frame,
            normalized: false,
            status: RunStatus::Converged,
        })
    }

    pub fn system(&self) -> CoupledSystem {
        CoupledSystem {
            potential: self.potential,
            scales: self.scales,
            constants: self.constants,
            frame: self.frame,
        }
    }

    pub fn abs2_plus(&self) -> Vec<f64> {
        self.chi_plus.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn abs2_minus(&self) -> Vec<f64> {
        self.chi_minus.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn norm2_plus(&self) -> f64 {
        trapezoid(&self.q_grid, &self.abs2_plus())
    }

    pub fn norm2_minus(&self) -> f64 {
        trapezoid(&self.q_grid, &self.abs2_minus())
    }

    /// Copy with each component scaled to unit trapezoid norm; identically
    /// vanishing components are left at zero.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        normalize_in_place(&self.q_grid, &mut out.chi_plus);
        normalize_in_place(&self.q_grid, &mut out.chi_minus);
        out.normalized = true;
        out
    }
}

fn normalize_in_place(q: &[f64], v: &mut [Complex64]) {
    let n = trapezoid(q, &v.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>());
    if n > 0.0 && n.is_finite() {
        let s = 1.0 / n.sqrt();
        v.iter_mut().for_each(|z| *z *= s);
    }
}

/// Trapezoid rule on an arbitrary ascending grid.
pub fn trapezoid(q: &[f64], f: &[f64]) -> f64 {
    q.windows(2)
        .zip(f.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Scales `v` to unit trapezoid norm on `q`.
pub fn normalize(v: &[Complex64], q: &[f64]) -> Result<Vec<Complex64>> {
    if v.len() != q.len() {
        return Err(Error::Grid("sample count differs from the grid".into()));
    }
    let mut out = v.to_vec();
    normalize_in_place(q, &mut out);
    Ok(out)
}

/// ∫ conj(a)·b dq by the trapezoid rule.
pub fn overlap(a: &[Complex64], b: &[Complex64], q: &[f64]) -> Result<Complex64> {
    if a.len() != q.len() || b.len() != q.len() {
        return Err(Error::Grid(format!(
            "overlap needs matching grids: {} / {} samples on {} points",
            a.len(),
            b.len(),
            q.len()
        )));
    }
    let f: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x.conj() * y).collect();
    Ok(q.windows(2)
        .zip(f.windows(2))
        .map(|(x, y)| (y[0] + y[1]) * (0.5 * (x[1] - x[0])))
        .sum())
}

/// |⟨a|b⟩| / (‖a‖‖b‖).
pub fn overlap_modulus(a: &[Complex64], b: &[Complex64], q: &[f64]) -> Result<f64> {
    let na = overlap(a, a, q)?.re;
    let nb = overlap(b, b, q)?.re;
    if na <= 0.0 || nb <= 0.0 {
        return Ok(0.0);
    }
    Ok(overlap(a, b, q)?.norm() / (na * nb).sqrt())
}

/// Integrates from `q_start` to `q_end` on `n` uniform points; samples are
/// returned in ascending q.
pub fn integrate_coupled(
    sys: &CoupledSystem,
    q_start: f64,
    q_end: f64,
    n: usize,
    chi0: (Complex64, Complex64),
    policy: &StepPolicy,
) -> Result<TideSolution> {
    if n < 2 || q_start == q_end {
        return Err(Error::Grid(
            "need a nonempty path with at least two points".into(),
        ));
    }
    sys.check_path(q_start, q_end)?;
    let nodes = linspace(q_start, q_end, n);
    let (xs, ys, status) = run_nodes(sys, &nodes, chi0, policy)?;
    let mut sol = assemble(sys, xs, ys, status);
    if q_end < q_start {
        sol.q_grid.reverse();
        sol.chi_plus.reverse();
        sol.chi_minus.reverse();
    }
    Ok(sol)
}

type Track = (Vec<f64>, Vec<State>, RunStatus);

fn run_nodes(
    sys: &CoupledSystem,
    nodes: &[f64],
    chi0: (Complex64, Complex64),
    policy: &StepPolicy,
) -> Result<Track> {
    let seed = [chi0.0, chi0.1];
    let guard = amplitude_guard(policy, &seed);
    let s = integrate(|x, y| sys.rhs(x, y), nodes, seed, policy, guard)?;
    Ok((s.xs, s.ys, s.termination.into()))
}

fn assemble(sys: &CoupledSystem, xs: Vec<f64>, ys: Vec<State>, status: RunStatus) -> TideSolution {
    TideSolution {
        q_grid: xs,
        chi_plus: ys.iter().map(|y| y[0]).collect(),
        chi_minus: ys.iter().map(|y| y[1]).collect(),
        constants: sys.constants,
        potential: sys.potential,
        scales: sys.scales,
        frame: sys.frame,
        normalized: false,
        status,
    }
}

/// Integrates outward from q = 0 to both ends of [−half_width, half_width]
/// (`n` odd, so 0 is a node) and merges the halves.
pub fn integrate_two_sided(
    sys: &CoupledSystem,
    half_width: f64,
    n: usize,
    chi0: (Complex64, Complex64),
    policy: &StepPolicy,
) -> Result<TideSolution> {
    if n < 5 || n.is_multiple_of(2) {
        return Err(invalid("points", "two-sided runs need an odd count >= 5"));
    }
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(invalid("half_width", "must be > 0"));
    }
    let half = n / 2 + 1;
    let (rx, ry, rs) = run_nodes(sys, &linspace(0.0, half_width, half), chi0, policy)?;
    let (lx, ly, ls) = run_nodes(sys, &linspace(0.0, -half_width, half), chi0, policy)?;
    let status = match (ls, rs) {
        (RunStatus::DivergedAtQ { q: a }, RunStatus::DivergedAtQ { q: b }) => {
            RunStatus::DivergedAtQ {
                q: if a.abs() <= b.abs() { a } else { b },
            }
        }
        (d @ RunStatus::DivergedAtQ { .. }, _) | (_, d @ RunStatus::DivergedAtQ { .. }) => d,
        _ => RunStatus::Converged,
    };
    let mut xs: Vec<f64> = lx.into_iter().skip(1).rev().collect();
    let mut ys: Vec<State> = ly.into_iter().skip(1).rev().collect();
    xs.extend(rx);
    ys.extend(ry);
    Ok(assemble(sys, xs, ys, status))
}

/// HO eigenfunction φ_n in scaled units (ħ = m = ω = 1), by the normalized
/// Hermite recurrence.
pub fn ho_eigenstate(n: usize, q: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25) * (-0.5 * q * q).exp();
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * q * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// φ_n for general ħ, m, ω.
pub fn ho_eigenstate_with(n: usize, q: f64, scales: &PhysicalScales, omega: f64) -> f64 {
    let b = (scales.mass * omega / scales.hbar).sqrt();
    b.sqrt() * ho_eigenstate(n, b * q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

/// Generalized Laguerre polynomial L_k^(α)(x) by its three-term recurrence.
pub fn laguerre(k: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - x) * cur - (jf + alpha) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// One-dimensional hydrogen eigenfunction (e² = a₀ = 1):
/// −√(2/n⁵)·e^{−|q|/n}·q·L_{n−1}^(1)(2|q|/n), with |q| replacing q for
/// even states. Normalized to one on the full line.
pub fn hydrogen_eigenstate(n: usize, parity: Parity, q: f64) -> f64 {
    assert!(n >= 1, "hydrogen levels start at n = 1");
    let nf = n as f64;
    let x = match parity {
        Parity::Odd => q,
        Parity::Even => q.abs(),
    };
    -(2.0 / nf.powi(5)).sqrt()
        * (-q.abs() / nf).exp()
        * x
        * laguerre(n - 1, 1.0, 2.0 * q.abs() / nf)
}

/// E_n = −1/(2n²) in the same units.
pub fn hydrogen_energy(n: usize) -> f64 {
    -0.5 / (n * n) as f64
}

/// Closed-form 𝒦₀ = 0 solution χ∅^±(q) = χ∅^±(0)·exp(±(1/ħ)∫₀^q s).
///
/// `chi0 = None` uses (mω/πħ)^{1/4} for the harmonic oscillator and 1
/// otherwise.
pub fn decoupled_solution(
    pot: &Potential,
    scales: &PhysicalScales,
    branch: Branch,
    q_grid: &[f64],
    chi0: Option<Complex64>,
) -> Result<Vec<Complex64>> {
    let m = scales.mass;
    let hb = scales.hbar;
    let chi0 = chi0.unwrap_or(match *pot {
        Potential::Harmonic { omega } => {
            Complex64::new((m * omega / (std::f64::consts::PI * hb)).powf(0.25), 0.0)
        }
        _ => ONE,
    });
    let sign = branch.sign();
    q_grid
        .iter()
        .map(|&q| {
            pot.check_domain(q)?;
            let integral: Complex64 = match *pot {
                Potential::Free => ZERO,
                Potential::Harmonic { omega } => Complex64::new(0.5 * m * omega * q * q, 0.0),
                Potential::InvertedHarmonic { omega } => {
                    Complex64::new(0.0, 0.5 * m * omega * q * q)
                }
                Potential::Coulomb1D { e2, .. } => {
                    Complex64::new(0.0, q.signum() * (8.0 * m * e2 * q.abs()).sqrt())
                }
                Potential::ConstantForce { .. } => integrate_sqrt_endpoints(
                    |x| pot.coupling_root(scales, x).unwrap_or(ZERO),
                    0.0,
                    q,
                    &QuadOptions::default(),
                )?,
            };
            Ok(chi0 * (integral * (sign / hb)).exp())
        })
        .collect()
}

/// How the eigenvalue is read in [`second_order_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualMode {
    /// −ħ²/2m χ″ + V_eff χ = 𝒦₀χ, relative to sup|𝒦₀χ|.
    Effective,
    /// −ħ²/2m χ″ + Vχ = (𝒦₀ ∓ shift)χ, relative to the right-hand side;
    /// the reading used for the decoupled oscillator.
    ShiftOnRhs,
}

/// Relative sup-norm residuals (r⁺, r⁻) of the second-order equations on
/// interior points, with χ″ by centered differences.
pub fn second_order_residual(sol: &TideSolution, mode: ResidualMode) -> Result<(f64, f64)> {
    let h = check_uniform(&sol.q_grid, 7)?;
    let sys = sol.system();
    let c = sol.scales.hbar * sol.scales.hbar / (2.0 * sol.scales.mass);
    let l2 = sys.frame * sys.frame;
    let k0 = sys.frame_k0();
    let mut res = [0.0f64; 2];
    for (bi, (branch, chi)) in [
        (Branch::Plus, &sol.chi_plus),
        (Branch::Minus, &sol.chi_minus),
    ]
    .into_iter()
    .enumerate()
    {
        let (mut num, mut scale, mut fallback) = (0.0f64, 0.0f64, 0.0f64);
        for i in 1..chi.len() - 1 {
            let x = sol.q_grid[i];
            let veff = sys.frame_effective_potential(branch, x)?;
            let v = l2 * sys.potential.value_complex(&sys.scales, sys.frame * x)?;
            let d2 = (chi[i + 1] - chi[i] * 2.0 + chi[i - 1]) / (h * h);
            let r = -d2 * c + (veff - k0) * chi[i];
            num = num.max(r.norm());
            let rhs = match mode {
                ResidualMode::Effective => k0 * chi[i],
                ResidualMode::ShiftOnRhs => (k0 - (veff - v)) * chi[i],
            };
            scale = scale.max(rhs.norm());
            fallback = fallback.max((veff * chi[i]).norm());
        }
        let s = if scale > 0.0 { scale } else { fallback };
        res[bi] = if s > 0.0 { num / s } else { num };
    }
    Ok((res[0], res[1]))
}

/// Eigen-levels (n⁺, n⁻) predicted for χ± of the oscillator when
/// 𝒦₀/ħω (or −𝒦₀/ħω after rotation) is a non-negative integer k:
/// (k−1, k) on the physical axis and (k, k−1) after q → iq.
pub fn predicted_ho_levels(
    k0: f64,
    hbar_omega: f64,
    rotated: bool,
) -> (Option<usize>, Option<usize>) {
    let k = if rotated {
        -k0 / hbar_omega
    } else {
        k0 / hbar_omega
    };
    let kr = k.round();
    if (k - kr).abs() > 1e-9 || kr < 0.0 {
        return (None, None);
    }
    let k = kr as usize;
    let lower = k.checked_sub(1);
    if rotated {
        (Some(k), lower)
    } else {
        (lower, Some(k))
    }
}

/// Oscillator run: 𝒦₀ with P⁺ = c·P, P⁻ = P/c of the default
/// factorization, integrated from q = 0 to both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoRun {
    pub omega: f64,
    pub k0: f64,
    pub half_width: f64,
    pub points: usize,
    #[serde(default)]
    pub rotated: bool,
    /// Unequal split c of the factorization (1 = symmetric).
    #[serde(default = "one")]
    pub split: f64,
    pub policy: StepPolicy,
    #[serde(default)]
    pub scales: PhysicalScales,
}

fn one() -> f64 {
    1.0
}

impl HoRun {
    pub fn new(k0: f64, half_width: f64, points: usize) -> Self {
        let pot = Potential::Harmonic { omega: 1.0 };
        Self {
            omega: 1.0,
            k0,
            half_width,
            points,
            rotated: false,
            split: 1.0,
            policy: StepPolicy::for_potential(&pot),
            scales: PhysicalScales::default(),
        }
    }

    pub fn rotated(mut self) -> Self {
        self.rotated = true;
        self
    }

    pub fn system(&self) -> Result<CoupledSystem> {
        let pot = Potential::harmonic(self.omega)?;
        let c = SeparationConstants::from_k0_split(self.k0, self.scales.mass, self.split)?;
        let sys = CoupledSystem::new(pot, self.scales, c)?;
        if self.rotated {
            sys.rotate_q_imaginary()
        } else {
            Ok(sys)
        }
    }

    /// Seed at q = 0: the component whose predicted level is even receives
    /// φ_n(0), the other zero. Off the ladder χ⁺ receives φ₀(0).
    pub fn seed(&self) -> (Complex64, Complex64) {
        let hw = self.scales.hbar * self.omega;
        let (np, nm) = predicted_ho_levels(self.k0, hw, self.rotated);
        let phi =
            |n: usize| Complex64::new(ho_eigenstate_with(n, 0.0, &self.scales, self.omega), 0.0);
        match (np, nm) {
            (Some(p), _) if p % 2 == 0 => (phi(p), ZERO),
            (_, Some(m)) if m % 2 == 0 => (ZERO, phi(m)),
            _ => (phi(0), ZERO),
        }
    }

    pub fn solve(&self) -> Result<TideSolution> {
        integrate_two_sided(
            &self.system()?,
            self.half_width,
            self.points,
            self.seed(),
            &self.policy,
        )
    }
}

/// One-dimensional hydrogen run on the left half-line [−q_max, −ε].
///
/// Bound-type (𝒦₀ < 0) runs use P⁺ = P⁻ = i√(2m|𝒦₀|), seed χ± = e^{iπ/4}
/// at q = −q_max and integrate toward the nucleus, so the decaying mode is
/// the one that survives. Forward (𝒦₀ ≥ 0) runs start next to the nucleus
/// with χ⁺ = 0, χ⁻ = 1 and integrate outward, with P⁺/P⁻ = `split_sq`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HydrogenRun {
    pub k0: f64,
    pub q_max: f64,
    pub points: usize,
    pub e2: f64,
    pub epsilon: f64,
    pub split_sq: f64,
    pub policy: StepPolicy,
}

impl HydrogenRun {
    pub fn new(k0: f64) -> Self {
        Self {
            k0,
            q_max: 130.0,
            points: 20001,
            e2: 1.0,
            epsilon: 1e-3,
            split_sq: 20.0,
            policy: StepPolicy::default(),
        }
    }

    pub fn system(&self) -> Result<CoupledSystem> {
        let pot = Potential::coulomb(self.e2, self.epsilon)?;
        let scales = PhysicalScales::default();
        let c = if self.k0 < 0.0 {
            SeparationConstants::from_k0(self.k0, scales.mass)?
        } else {
            if !(self.split_sq.is_finite() && self.split_sq > 0.0) {
                return Err(invalid("split_sq", "must be > 0"));
            }
            SeparationConstants::from_k0_split(self.k0, scales.mass, self.split_sq.sqrt())?
        };
        CoupledSystem::new(pot, scales, c)
    }

    /// Raw (unnormalized) solution on ascending q.
    pub fn solve(&self) -> Result<TideSolution> {
        if !(self.q_max > self.epsilon) {
            return Err(invalid("q_max", "must exceed epsilon"));
        }
        let sys = self.system()?;
        if self.k0 < 0.0 {
            let w = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
            integrate_coupled(
                &sys,
                -self.q_max,
                -self.epsilon,
                self.points,
                (w, w),
                &self.policy,
            )
        } else {
            integrate_coupled(
                &sys,
                -self.epsilon,
                -self.q_max,
                self.points,
                (ZERO, ONE),
                &self.policy,
            )
        }
    }
}
