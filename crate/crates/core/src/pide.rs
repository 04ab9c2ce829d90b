//! Half-order position-independent Dirac pair
//!
//! √(2miħ)·D_t^{1/2} ψ⁺ = P⁺ ψ⁻,   √(2miħ)·D_t^{1/2} ψ⁻ = P⁻ ψ⁺
//!
//! solved in closed form with E_{1/2}. With λ = √(𝒦₀/(iħ)) and the
//! component ratio r = √(2miħ)·λ / P⁺ (so r² = P⁻/P⁺):
//!
//! ψ⁺(t) = A₀ E(λ√t) + B₀ E(−λ√t),   ψ⁻(t) = r·(A₀ E(λ√t) − B₀ E(−λ√t)).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::specfun::{caputo_half, check_uniform, gamma, mittag_leffler, CaputoGrid, MlEvalPolicy};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// The pair (P⁺, P⁻) fixing 𝒦₀ = P⁺P⁻/(2m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationConstants {
    pub pt_plus: Complex64,
    pub pt_minus: Complex64,
    #[serde(default = "unit_mass")]
    pub mass: f64,
}

fn unit_mass() -> f64 {
    1.0
}

impl SeparationConstants {
    pub fn new(pt_plus: Complex64, pt_minus: Complex64, mass: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(invalid("mass", "must be > 0"));
        }
        if !(pt_plus.is_finite() && pt_minus.is_finite()) {
            return Err(invalid("pt", "separation constants must be finite"));
        }
        Ok(Self {
            pt_plus,
            pt_minus,
            mass,
        })
    }

    /// Default factorization of a real 𝒦₀: P⁺ = P⁻ = √(2m𝒦₀) for 𝒦₀ ≥ 0
    /// and P⁺ = P⁻ = i√(2m|𝒦₀|) for 𝒦₀ < 0.
    pub fn from_k0(k0: f64, mass: f64) -> Result<Self> {
        if !k0.is_finite() {
            return Err(invalid("k0", "must be finite"));
        }
        let p = (2.0 * mass * k0.abs()).sqrt();
        let p = if k0 < 0.0 {
            Complex64::new(0.0, p)
        } else {
            Complex64::new(p, 0.0)
        };
        Self::new(p, p, mass)
    }

    /// 𝒦₀ = P⁺P⁻/(2m) with an unequal split P⁺ = c·P, P⁻ = P/c.
    pub fn from_k0_split(k0: f64, mass: f64, c: f64) -> Result<Self> {
        if !(c.is_finite() && c != 0.0) {
            return Err(invalid("ratio", "split factor must be finite and nonzero"));
        }
        let base = Self::from_k0(k0, mass)?;
        Self::new(base.pt_plus * c, base.pt_minus / c, mass)
    }

    pub fn k0(&self) -> Complex64 {
        self.pt_plus * self.pt_minus / (2.0 * self.mass)
    }

    pub fn swapped(&self) -> Self {
        Self {
            pt_plus: self.pt_minus,
            pt_minus: self.pt_plus,
            mass: self.mass,
        }
    }

    /// (cP⁺, P⁻/c); leaves 𝒦₀ unchanged.
    pub fn rescaled(&self, c: f64) -> Self {
        Self {
            pt_plus: self.pt_plus * c,
            pt_minus: self.pt_minus / c,
            mass: self.mass,
        }
    }
}

/// Direction of time evolution selected by the sign of 𝒦₀.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeDirection {
    Forward,
    Absent,
    Backward,
}

impl fmt::Display for TimeDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeDirection::Forward => "F",
            TimeDirection::Absent => "∅",
            TimeDirection::Backward => "B",
        })
    }
}

/// Classification on Re 𝒦₀.
pub fn classify_time_direction(c: &SeparationConstants) -> TimeDirection {
    let k = c.k0().re;
    if k > 0.0 {
        TimeDirection::Forward
    } else if k == 0.0 {
        TimeDirection::Absent
    } else {
        TimeDirection::Backward
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum Regime {
    /// P⁺, P⁻ both nonzero.
    MittagLeffler { lambda: Complex64, ratio: Complex64 },
    /// P⁺ = P⁻ = 0.
    Constant,
    /// Exactly one of P⁺, P⁻ vanishes; the other channel grows like t^{1/2}.
    OneSided,
}

/// Closed-form solution pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidePair {
    pub a0: Complex64,
    pub b0: Complex64,
    pub constants: SeparationConstants,
    pub psi0_plus: Complex64,
    pub psi0_minus: Complex64,
    pub hbar: f64,
    regime: Regime,
}

fn regime(c: &SeparationConstants, hbar: f64) -> Regime {
    match (c.pt_plus == ZERO, c.pt_minus == ZERO) {
        (true, true) => Regime::Constant,
        (false, false) => {
            let lambda = (c.k0() * (-I / hbar)).sqrt();
            let mu = (I * (2.0 * c.mass * hbar)).sqrt() * lambda;
            Regime::MittagLeffler {
                lambda,
                ratio: mu / c.pt_plus,
            }
        }
        _ => Regime::OneSided,
    }
}

impl PidePair {
    /// Pair fixed by the initial values ψ±(0).
    pub fn from_initial(
        constants: SeparationConstants,
        psi0_plus: Complex64,
        psi0_minus: Complex64,
        hbar: f64,
    ) -> Result<Self> {
        check_hbar(hbar)?;
        let regime = regime(&constants, hbar);
        let (a0, b0) = match regime {
            Regime::MittagLeffler { ratio, .. } => {
                let m = psi0_minus / ratio;
                ((psi0_plus + m) * 0.5, (psi0_plus - m) * 0.5)
            }
            _ => (psi0_plus, psi0_minus),
        };
        Ok(Self {
            a0,
            b0,
            constants,
            psi0_plus,
            psi0_minus,
            hbar,
            regime,
        })
    }

    /// Pair fixed by its Mittag-Leffler coefficients (A₀, B₀).
    pub fn from_coefficients(
        constants: SeparationConstants,
        a0: Complex64,
        b0: Complex64,
        hbar: f64,
    ) -> Result<Self> {
        check_hbar(hbar)?;
        let regime = regime(&constants, hbar);
        let ratio = match regime {
            Regime::MittagLeffler { ratio, .. } => ratio,
            _ => {
                return Err(Error::Unsupported(
                    "Mittag-Leffler coefficients with a vanishing P",
                ))
            }
        };
        Ok(Self {
            a0,
            b0,
            constants,
            psi0_plus: a0 + b0,
            psi0_minus: ratio * (a0 - b0),
            hbar,
            regime,
        })
    }

    /// ψ⁺(0) = ψ⁻(0) = 1.
    pub fn unit_initial(constants: SeparationConstants) -> Result<Self> {
        Self::from_initial(constants, ONE, ONE, 1.0)
    }

    /// Component ratio r = ψ⁻/ψ⁺ of the A₀ mode; `None` when a P vanishes.
    pub fn ratio(&self) -> Option<Complex64> {
        match self.regime {
            Regime::MittagLeffler { ratio, .. } => Some(ratio),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.regime == Regime::Constant
    }

    /// (ψ⁺(t), ψ⁻(t)) for t ≥ 0.
    pub fn psi(&self, t: f64) -> Result<(Complex64, Complex64)> {
        self.psi_with(t, &MlEvalPolicy::default())
    }

    pub fn psi_with(&self, t: f64, policy: &MlEvalPolicy) -> Result<(Complex64, Complex64)> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(invalid("t", format!("must be finite and >= 0, got {t}")));
        }
        match self.regime {
            Regime::Constant => Ok((self.psi0_plus, self.psi0_minus)),
            Regime::OneSided => {
                let c = self.constants;
                let k = (I * (2.0 * c.mass * self.hbar)).sqrt();
                let g = t.sqrt() / gamma(1.5);
                let plus = self.psi0_plus + c.pt_plus * self.psi0_minus / k * g;
                let minus = self.psi0_minus + c.pt_minus * self.psi0_plus / k * g;
                Ok((plus, minus))
            }
            Regime::MittagLeffler { lambda, ratio } => {
                let x = lambda * t.sqrt();
                let ep = mittag_leffler(0.5, x, policy)?;
                let em = mittag_leffler(0.5, -x, policy)?;
                Ok((
                    self.a0 * ep + self.b0 * em,
                    ratio * (self.a0 * ep - self.b0 * em),
                ))
            }
        }
    }

    pub fn sample(&self, t_grid: &[f64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let mut plus = Vec::with_capacity(t_grid.len());
        let mut minus = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let (p, m) = self.psi(t)?;
            plus.push(p);
            minus.push(m);
        }
        Ok((plus, minus))
    }
}

fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(invalid("hbar", "must be > 0"));
    }
    Ok(())
}

/// (ψ⁺(t), ψ⁻(t)) of a pair.
pub fn psi_pair(pair: &PidePair, t: f64) -> Result<(Complex64, Complex64)> {
    pair.psi(t)
}

/// Sup-norm residuals of the two half-order equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PideResidual {
    /// sup |√(2miħ) D^{1/2}ψ⁺ − P⁺ψ⁻|.
    pub abs_plus: f64,
    pub abs_minus: f64,
    /// The same, divided by sup |P⁺ψ⁻| (absolute when that vanishes).
    pub rel_plus: f64,
    pub rel_minus: f64,
}

/// Residual of the sampled closed form against the half-order equations,
/// with D^{1/2} from the L1 scheme on `t_grid` (uniform, from 0) and the
/// sup taken over t ≥ `t_from`. The L1 scheme is least accurate in the
/// first few steps, where the solution has a √t cusp.
pub fn pide_residual(pair: &PidePair, t_grid: &[f64], t_from: f64) -> Result<PideResidual> {
    check_uniform(t_grid, 1000)?;
    let (plus, minus) = pair.sample(t_grid)?;
    let dp = caputo_half(&CaputoGrid::new(t_grid.to_vec(), plus.clone())?);
    let dm = caputo_half(&CaputoGrid::new(t_grid.to_vec(), minus.clone())?);
    let c = pair.constants;
    let k = (I * (2.0 * c.mass * pair.hbar)).sqrt();
    let (mut ap, mut am, mut sp, mut sm) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..t_grid.len() {
        if t_grid[i] < t_from {
            continue;
        }
        let rp = c.pt_plus * minus[i];
        let rm = c.pt_minus * plus[i];
        ap = ap.max((k * dp[i] - rp).norm());
        am = am.max((k * dm[i] - rm).norm());
        sp = sp.max(rp.norm());
        sm = sm.max(rm.norm());
    }
    let rel = |a: f64, s: f64| if s > 0.0 { a / s } else { a };
    Ok(PideResidual {
        abs_plus: ap,
        abs_minus: am,
        rel_plus: rel(ap, sp),
        rel_minus: rel(am, sm),
    })
}

/// 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn zero() -> Self {
        Mat2([[ZERO; 2]; 2])
    }

    pub fn scale(self, s: Complex64) -> Self {
        let m = self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        let mut r = [[ZERO; 2]; 2];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(r)
    }
}

/// α = [[0, 1], [1, 0]], β = [[−i, 0], [0, i]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracMatrices {
    pub alpha: Mat2,
    pub beta: Mat2,
}

impl Default for DiracMatrices {
    fn default() -> Self {
        Self {
            alpha: Mat2([[ZERO, ONE], [ONE, ZERO]]),
            beta: Mat2([[-I, ZERO], [ZERO, I]]),
        }
    }
}

impl DiracMatrices {
    /// α² = I, β² = −I and αβ + βα = 0, compared entry by entry.
    pub fn identities_hold(&self) -> bool {
        let (a, b) = (self.alpha, self.beta);
        a * a == Mat2::identity() && b * b == -Mat2::identity() && a * b + b * a == Mat2::zero()
    }

    /// max entry of |(aα − bβ)² − (a² − b²)I|.
    pub fn factorization_deviation(&self, a: Complex64, b: Complex64) -> f64 {
        let m = self.alpha.scale(a) - self.beta.scale(b);
        (m * m - Mat2::identity().scale(a * a - b * b)).max_abs()
    }
}

/// Largest factorization deviation over `pairs` seeded random complex
/// coefficients with components in [−2, 2].
pub fn dirac_factorization_deviation(seed: u64, pairs: usize) -> f64 {
    let d = DiracMatrices::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = || Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    (0..pairs)
        .map(|_| {
            let (a, b) = (c(), c());
            d.factorization_deviation(a, b)
        })
        .fold(0.0, f64::max)
}

/// True iff (aα − bβ)² = (a² − b²)I within 1e−12 for 20 random pairs.
pub fn dirac_factorization_check() -> bool {
    dirac_factorization_deviation(20, 20) <= 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::linspace;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classification_examples() {
        let f = SeparationConstants::new(ONE, ONE, 1.0).unwrap();
        assert_eq!(classify_time_direction(&f), TimeDirection::Forward);
        let z = SeparationConstants::new(ZERO, ONE, 1.0).unwrap();
        assert_eq!(classify_time_direction(&z), TimeDirection::Absent);
        let b = SeparationConstants::new(ONE, -ONE, 1.0).unwrap();
        assert_eq!(classify_time_direction(&b), TimeDirection::Backward);
        assert_eq!(
            classify_time_direction(&SeparationConstants::from_k0(-0.5, 1.0).unwrap()),
            TimeDirection::Backward
        );
    }

    #[test]
    fn initial_values_reproduced() {
        let k = SeparationConstants::new(c(2.0, 0.0), c(0.5, 0.3), 1.0).unwrap();
        let p = PidePair::from_initial(k, c(0.7, -0.2), c(-1.1, 0.4), 1.0).unwrap();
        let (a, b) = p.psi(0.0).unwrap();
        assert!((a - c(0.7, -0.2)).norm() < 1e-15 && (b - c(-1.1, 0.4)).norm() < 1e-15);
    }

    #[test]
    fn ratio_squares_to_momentum_ratio() {
        let k = SeparationConstants::new(c(2.0, 0.1), c(0.5, -0.3), 1.0).unwrap();
        let p = PidePair::unit_initial(k).unwrap();
        let r = p.ratio().unwrap();
        assert!((r * r - k.pt_minus / k.pt_plus).norm() < 1e-14);
    }

    #[test]
    fn constant_solution() {
        let k = SeparationConstants::new(ZERO, ZERO, 1.0).unwrap();
        let p = PidePair::from_initial(k, c(0.3, 0.1), c(2.0, 0.0), 1.0).unwrap();
        assert!(p.is_constant());
        for t in [0.0, 1.0, 100.0] {
            assert_eq!(p.psi(t).unwrap(), (c(0.3, 0.1), c(2.0, 0.0)));
        }
    }

    #[test]
    fn fig2_limit_is_four() {
        let k = SeparationConstants::from_k0(1.0, 1.0).unwrap();
        let p = PidePair::from_coefficients(k, ONE, ZERO, 1.0).unwrap();
        let v = p.psi(5000.0).unwrap().0.norm_sqr();
        assert!((v - 4.0).abs() < 0.05, "{v}");
    }

    #[test]
    fn one_sided_solution_satisfies_equations() {
        let k = SeparationConstants::new(c(1.0, 0.0), ZERO, 1.0).unwrap();
        let p = PidePair::unit_initial(k).unwrap();
        let t = linspace(0.0, 2.0, 2001);
        let r = pide_residual(&p, &t, 0.1).unwrap();
        assert!(r.rel_plus < 1e-3 && r.abs_minus < 1e-12, "{r:?}");
    }

    #[test]
    fn residual_small_for_closed_form() {
        let k = SeparationConstants::from_k0(1.0, 1.0).unwrap();
        let p = PidePair::unit_initial(k).unwrap();
        let t = linspace(0.0, 2.0, 2001);
        let r = pide_residual(&p, &t, 0.1).unwrap();
        assert!(r.rel_plus < 5e-3 && r.rel_minus < 5e-3, "{r:?}");
    }

    #[test]
    fn residual_rejects_coarse_grid() {
        let p = PidePair::unit_initial(SeparationConstants::from_k0(1.0, 1.0).unwrap()).unwrap();
        assert!(pide_residual(&p, &linspace(0.0, 1.0, 50), 0.0).is_err());
    }

    #[test]
    fn dirac_examples() {
        let d = DiracMatrices::default();
        assert!(d.identities_hold());
        assert_eq!(d.alpha * d.alpha, Mat2::identity());
        assert_eq!(d.beta * d.beta, -Mat2::identity());
        let m = d.alpha.scale(c(2.0, 0.0)) - d.beta;
        assert_eq!(m * m, Mat2::identity().scale(c(3.0, 0.0)));
        assert!(dirac_factorization_check());
    }
}
