//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-15,
            rel_tol: 1e-13,
            max_intervals: 4000,
        }
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let value = kron * h;
    let error = ((kron - gauss) * h).norm();
    (value, error)
}

/// ∫_a^b f(q) dq. The integrand is never evaluated at a or b.
pub fn integrate(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<Complex64> {
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (v, e) = gk15(&f, a, b);
    let min_width = 1e-9 * (b - a).abs();
    let small = 1e-4 * (b - a).abs();
    let mut frozen: Vec<Piece> = Vec::new();
    let mut heap = BinaryHeap::new();
    heap.push(Piece {
        a,
        b,
        value: v,
        error: e,
    });
    let mut total = v;
    let mut err = e;
    while err > opts.abs_tol.max(opts.rel_tol * total.norm()) {
        if heap.len() + frozen.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                tolerance: opts.rel_tol,
                estimate: err,
            });
        }
        let Some(worst) = heap.pop() else { break };
        let m = 0.5 * (worst.a + worst.b);
        if (worst.b - worst.a).abs() < min_width
            || m <= worst.a.min(worst.b)
            || m >= worst.a.max(worst.b)
        {
            err -= worst.error;
            frozen.push(worst);
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, m);
        let (v2, e2) = gk15(&f, m, worst.b);
        if e1 + e2 >= 0.99 * worst.error && (worst.b - worst.a).abs() < small {
            // splitting no longer helps: the integrand is at its noise floor here
            err -= worst.error;
            frozen.push(worst);
            continue;
        }
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: m,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: m,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // resum to shed the drift of the running total
    let total = heap
        .iter()
        .chain(&frozen)
        .fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.value);
    Ok(total)
}

/// ∫_a^b f for integrands with possible inverse-square-root singularities at
/// either end. The interval is split at its midpoint and each half mapped by
/// q = e + (c − e)s² towards its outer endpoint e.
pub fn integrate_sqrt_endpoints(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<Complex64> {
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let c = 0.5 * (a + b);
    let zero = Complex64::new(0.0, 0.0);
    // nodes that round onto the endpoint itself carry no weight
    let left = integrate(
        |s| {
            let q = a + (c - a) * s * s;
            if q == a {
                zero
            } else {
                f(q) * (2.0 * (c - a) * s)
            }
        },
        0.0,
        1.0,
        opts,
    )?;
    let right = integrate(
        |s| {
            let q = b - (b - c) * s * s;
            if q == b {
                zero
            } else {
                f(q) * (2.0 * (b - c) * s)
            }
        },
        0.0,
        1.0,
        opts,
    )?;
    Ok(left + right)
}
