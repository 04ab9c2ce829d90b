//! Complex special functions: Γ, Mittag-Leffler E_α, complex erfc and the
//! L1 discretization of the order-1/2 Caputo derivative.

use errorfunctions::ComplexErrorFunctions;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for real x (Lanczos, g = 7, reflection below 1/2).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        let s = (std::f64::consts::PI * x).sin();
        return std::f64::consts::PI / (s * gamma(1.0 - x));
    }
    if x == x.floor() && x <= 171.0 {
        // exact factorial for integer arguments
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        return acc;
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    // split the power to delay overflow
    let p = t.powf(0.5 * (x + 0.5));
    (2.0 * std::f64::consts::PI).sqrt() * p * (-t).exp() * p * a
}

/// Strategy knobs for [`mittag_leffler`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolicy")]
pub struct MlEvalPolicy {
    pub series_max_terms: usize,
    /// The series is used while |x|^(1/α) stays at or below this radius.
    pub series_radius: f64,
    pub tolerance: f64,
}

#[derive(Deserialize)]
struct RawPolicy {
    series_max_terms: usize,
    series_radius: f64,
    tolerance: f64,
}

impl TryFrom<RawPolicy> for MlEvalPolicy {
    type Error = Error;
    fn try_from(r: RawPolicy) -> Result<Self> {
        MlEvalPolicy::new(r.series_max_terms, r.series_radius, r.tolerance)
    }
}

impl Default for MlEvalPolicy {
    fn default() -> Self {
        Self {
            series_max_terms: 200,
            series_radius: 5.0,
            tolerance: 1e-13,
        }
    }
}

impl MlEvalPolicy {
    pub fn new(series_max_terms: usize, series_radius: f64, tolerance: f64) -> Result<Self> {
        if series_max_terms < 10 {
            return Err(invalid("series_max_terms", "must be >= 10"));
        }
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(invalid("tolerance", "must be > 0"));
        }
        if !(series_radius.is_finite() && series_radius > 0.0) {
            return Err(invalid("series_radius", "must be > 0"));
        }
        Ok(Self {
            series_max_terms,
            series_radius,
            tolerance,
        })
    }
}

/// E_α(x) = Σ_k x^k / Γ(αk + 1).
///
/// For α = 1/2 outside the series radius the closed form
/// E_{1/2}(x) = exp(x²)·erfc(−x) is used.
pub fn mittag_leffler(alpha: f64, x: Complex64, policy: &MlEvalPolicy) -> Result<Complex64> {
    mittag_leffler_with_gamma(alpha, x, policy, gamma)
}

/// [`mittag_leffler`] with an injectable Γ, used by the self-test negative
/// control.
pub fn mittag_leffler_with_gamma(
    alpha: f64,
    x: Complex64,
    policy: &MlEvalPolicy,
    gamma_fn: impl Fn(f64) -> f64,
) -> Result<Complex64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(invalid("alpha", format!("must be > 0, got {alpha}")));
    }
    let reach = x.norm().powf(1.0 / alpha);
    if reach <= policy.series_radius {
        return ml_series(alpha, x, policy, gamma_fn);
    }
    if alpha == 0.5 {
        return Ok(ml_half_closed_form(x));
    }
    Err(Error::Unsupported("Mittag-Leffler argument beyond the series radius (only alpha = 1/2 has a closed form there)"))
}

/// Plain power series of E_α, ignoring the radius in the policy.
pub fn ml_series(
    alpha: f64,
    x: Complex64,
    policy: &MlEvalPolicy,
    gamma_fn: impl Fn(f64) -> f64,
) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    // terms stop shrinking only after k passes the peak near |x|^(1/α)/α
    let peak = x.norm().powf(1.0 / alpha) / alpha;
    let mut small_run = 0;
    let mut last = f64::INFINITY;
    for k in 0..policy.series_max_terms {
        let g = gamma_fn(alpha * k as f64 + 1.0);
        let term = if g.is_finite() {
            power / g
        } else {
            Complex64::new(0.0, 0.0)
        };
        sum += term;
        last = term.norm();
        if last <= policy.tolerance * sum.norm().max(f64::MIN_POSITIVE) && k as f64 > peak {
            small_run += 1;
            if small_run >= 2 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
        power *= x;
    }
    Err(Error::NonConvergence {
        terms: policy.series_max_terms,
        last_term: last,
    })
}

/// E_{1/2}(x) = exp(x²)·erfc(−x), evaluated as the Faddeeva function
/// w(−i·x) to avoid overflow of the exponential.
pub fn ml_half_closed_form(x: Complex64) -> Complex64 {
    faddeeva(Complex64::new(x.im, -x.re))
}

/// Complementary error function of a complex argument.
pub fn erfc_complex(z: Complex64) -> Complex64 {
    z.erfc()
}

/// Faddeeva function w(z) = exp(−z²)·erfc(−iz).
pub fn faddeeva(z: Complex64) -> Complex64 {
    z.w()
}

/// Samples on a uniform grid starting at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CaputoGrid {
    t_grid: Vec<f64>,
    f_values: Vec<Complex64>,
}

impl CaputoGrid {
    pub fn new(t_grid: Vec<f64>, f_values: Vec<Complex64>) -> Result<Self> {
        if t_grid.len() != f_values.len() {
            return Err(Error::Grid(format!(
                "{} times but {} samples",
                t_grid.len(),
                f_values.len()
            )));
        }
        let h = check_uniform(&t_grid, 3)?;
        if t_grid[0] != 0.0 {
            return Err(Error::Grid(format!(
                "first time must be 0, got {}",
                t_grid[0]
            )));
        }
        if h <= 0.0 {
            return Err(Error::Grid("times must increase".into()));
        }
        Ok(Self { t_grid, f_values })
    }

    /// Samples f on `n` points of [0, t_max].
    pub fn sample(t_max: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let t = linspace(0.0, t_max, n);
        let v = t.iter().map(|&x| f(x)).collect();
        Self::new(t, v)
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn f_values(&self) -> &[Complex64] {
        &self.f_values
    }

    pub fn step(&self) -> f64 {
        self.t_grid[1] - self.t_grid[0]
    }
}

/// L1 scheme for the Caputo derivative of order 1/2; the first sample is 0.
pub fn caputo_half(grid: &CaputoGrid) -> Vec<Complex64> {
    let f = grid.f_values();
    let n = f.len();
    let h = grid.step();
    let b: Vec<f64> = (0..n)
        .map(|k| ((k + 1) as f64).sqrt() - (k as f64).sqrt())
        .collect();
    let diff: Vec<Complex64> = f.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = 1.0 / (gamma(1.5) * h.sqrt());
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (i, o) in out.iter_mut().enumerate().skip(1) {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..i {
            acc += diff[j] * b[i - 1 - j];
        }
        *o = acc * scale;
    }
    out
}

/// `n` evenly spaced points including both ends.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
                .collect()
        }
    }
}

/// Returns the spacing of a uniform grid with at least `min_len` points.
pub(crate) fn check_uniform(grid: &[f64], min_len: usize) -> Result<f64> {
    if grid.len() < min_len {
        return Err(Error::Grid(format!(
            "need at least {min_len} points, got {}",
            grid.len()
        )));
    }
    let h = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    let scale = grid[0].abs().max(grid[grid.len() - 1].abs()).max(h.abs());
    for w in grid.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * scale {
            return Err(Error::Grid("grid spacing is not uniform".into()));
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gamma_known_values() {
        assert_eq!(gamma(1.0), 1.0);
        assert_eq!(gamma(6.0), 120.0);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((gamma(0.5) / sqrt_pi - 1.0).abs() < 1e-14);
        assert!((gamma(1.5) / (0.5 * sqrt_pi) - 1.0).abs() < 1e-14);
        assert!((gamma(2.5) / (0.75 * sqrt_pi) - 1.0).abs() < 1e-14);
        // Γ(x+1) = xΓ(x) over non-integer arguments
        for i in 1..400 {
            let x = 0.137 + 0.25 * i as f64;
            let rel = gamma(x + 1.0) / (x * gamma(x)) - 1.0;
            assert!(rel.abs() < 1e-12, "x={x} rel={rel}");
        }
    }

    #[test]
    fn ml_examples() {
        let p = MlEvalPolicy::default();
        let e1 = mittag_leffler(1.0, c(1.0, 0.0), &p).unwrap();
        assert!((e1.re - std::f64::consts::E).abs() < 1e-13 && e1.im == 0.0);
        for a in [0.3, 0.5, 1.0, 2.0] {
            assert_eq!(mittag_leffler(a, c(0.0, 0.0), &p).unwrap(), c(1.0, 0.0));
        }
        let h = mittag_leffler(0.5, c(1.0, 0.0), &p).unwrap();
        assert!((h.re - 5.008_980_080_762_283).abs() < 1e-12, "{h}");
    }

    #[test]
    fn ml_half_large_argument_uses_identity() {
        let p = MlEvalPolicy::default();
        let x = c(3.0, 1.0);
        let via_policy = mittag_leffler(0.5, x, &p).unwrap();
        let direct = (x * x).exp() * erfc_complex(-x);
        assert!((via_policy - direct).norm() / direct.norm() < 1e-12);
        // deep in the left half plane the closed form decays like 1/(√π|x|)
        let far = mittag_leffler(0.5, c(-40.0, 0.0), &p).unwrap();
        assert!((far.re * 40.0 * std::f64::consts::PI.sqrt() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn ml_other_alpha_outside_radius_rejected() {
        let p = MlEvalPolicy::default();
        assert!(matches!(
            mittag_leffler(1.0, c(6.0, 0.0), &p),
            Err(Error::Unsupported(_))
        ));
        assert!(mittag_leffler(0.0, c(1.0, 0.0), &p).is_err());
    }

    #[test]
    fn ml_non_convergence_reports_terms() {
        let p = MlEvalPolicy::new(10, 5.0, 1e-13).unwrap();
        match ml_series(1.0, c(4.0, 0.0), &p, gamma) {
            Err(Error::NonConvergence { terms, .. }) => assert_eq!(terms, 10),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn erfc_examples() {
        assert_eq!(erfc_complex(c(0.0, 0.0)), c(1.0, 0.0));
        assert!((erfc_complex(c(-1.0, 0.0)).re - 1.842_700_792_949_715).abs() < 1e-13);
        let z = c(0.3, 0.7);
        assert!((erfc_complex(z.conj()) - erfc_complex(z).conj()).norm() < 1e-15);
    }

    #[test]
    fn caputo_of_constant_vanishes() {
        let g = CaputoGrid::sample(1.0, 101, |_| c(3.5, -1.0)).unwrap();
        assert!(caputo_half(&g).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn caputo_of_t_squared() {
        let g = CaputoGrid::sample(1.0, 4001, |t| c(t * t, 0.0)).unwrap();
        let d = caputo_half(&g);
        let err = g
            .t_grid()
            .iter()
            .zip(&d)
            .map(|(&t, v)| (v.re - 8.0 / 3.0 * t.powf(1.5) / std::f64::consts::PI.sqrt()).abs())
            .fold(0.0, f64::max);
        assert!(err < 2e-3, "{err}");
    }

    #[test]
    fn grid_validation() {
        assert!(CaputoGrid::new(vec![0.0, 1.0], vec![c(0.0, 0.0); 2]).is_err());
        assert!(CaputoGrid::new(vec![0.0, 1.0, 3.0], vec![c(0.0, 0.0); 3]).is_err());
        assert!(CaputoGrid::new(vec![0.5, 1.0, 1.5], vec![c(0.0, 0.0); 3]).is_err());
        assert!(CaputoGrid::new(vec![0.0, 1.0, 2.0], vec![c(0.0, 0.0); 2]).is_err());
    }
}
