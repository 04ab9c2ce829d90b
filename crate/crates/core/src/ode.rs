//! Dormand–Prince 5(4) for a complex two-component state, sampled on a
//! prescribed monotone output grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type State = [Complex64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPolicy {
    pub initial_step: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Absolute overflow guard on max |χ±|.
    pub overflow: f64,
    /// Optional guard on max |χ±| relative to the seed amplitude.
    pub growth_limit: Option<f64>,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self {
            initial_step: 1e-3,
            rtol: 1e-10,
            atol: 1e-14,
            max_steps: 5_000_000,
            overflow: 1e150,
            growth_limit: None,
        }
    }
}

impl StepPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_step.is_finite() && self.initial_step > 0.0) {
            return Err(invalid("initial_step", "must be > 0"));
        }
        if !(self.rtol > 0.0 && self.atol >= 0.0) {
            return Err(invalid("rtol", "tolerances must be positive"));
        }
        if !(self.overflow > 1.0) {
            return Err(invalid("overflow", "must exceed 1"));
        }
        if let Some(g) = self.growth_limit {
            if !(g > 1.0) {
                return Err(invalid("growth_limit", "must exceed 1"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    /// Guard tripped; `at` is the bisected position of the trip.
    DivergedAtQ {
        at: f64,
    },
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    /// Output nodes reached, in integration order.
    pub xs: Vec<f64>,
    pub ys: Vec<State>,
    pub termination: Termination,
    pub steps: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn comb(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..2 {
            out[i] += k[i] * (c * h);
        }
    }
    out
}

/// One step; returns (y_new, error estimate vector, f(x+h, y_new)).
fn dopri_step<F: Fn(f64, &State) -> State>(
    f: &F,
    x: f64,
    y: &State,
    k1: &State,
    h: f64,
) -> (State, State, State) {
    let k2 = f(x + C2 * h, &comb(y, &[(A21, k1)], h));
    let k3 = f(x + C3 * h, &comb(y, &[(A31, k1), (A32, &k2)], h));
    let k4 = f(
        x + C4 * h,
        &comb(y, &[(A41, k1), (A42, &k2), (A43, &k3)], h),
    );
    let k5 = f(
        x + C5 * h,
        &comb(y, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
    );
    let k6 = f(
        x + h,
        &comb(
            y,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            h,
        ),
    );
    let y5 = comb(
        y,
        &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        h,
    );
    let k7 = f(x + h, &y5);
    let zero = [Complex64::new(0.0, 0.0); 2];
    let err = comb(
        &zero,
        &[
            (E1, k1),
            (E3, &k3),
            (E4, &k4),
            (E5, &k5),
            (E6, &k6),
            (E7, &k7),
        ],
        h,
    );
    (y5, err, k7)
}

fn amplitude(y: &State) -> f64 {
    y[0].norm().max(y[1].norm())
}

/// Integrates y′ = f(x, y) from `nodes[0]` through the monotone `nodes`,
/// stopping early if `guard` trips.
pub fn integrate<F, G>(
    f: F,
    nodes: &[f64],
    y0: State,
    policy: &StepPolicy,
    guard: G,
) -> Result<OdeSolution>
where
    F: Fn(f64, &State) -> State,
    G: Fn(&State) -> bool,
{
    policy.validate()?;
    if nodes.len() < 2 {
        return Err(Error::Grid("need at least two output nodes".into()));
    }
    let dir = (nodes[nodes.len() - 1] - nodes[0]).signum();
    if dir == 0.0 || nodes.windows(2).any(|w| (w[1] - w[0]) * dir <= 0.0) {
        return Err(Error::Grid("output nodes must be strictly monotone".into()));
    }
    let span = (nodes[nodes.len() - 1] - nodes[0]).abs();
    let mut xs = vec![nodes[0]];
    let mut ys = vec![y0];
    let mut x = nodes[0];
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut h = policy.initial_step.min(span);
    let mut steps = 0usize;
    let mut next = 1usize;
    while next < nodes.len() {
        if steps >= policy.max_steps {
            return Err(Error::StepUnderflow { q: x });
        }
        let target = nodes[next];
        let remaining = (target - x).abs();
        let lands = h >= remaining;
        let step = if lands { remaining } else { h };
        let (y_new, err, k7) = dopri_step(&f, x, &y, &k1, step * dir);
        steps += 1;
        let mut e = 0.0f64;
        for i in 0..2 {
            let sc = policy.atol + policy.rtol * y[i].norm().max(y_new[i].norm());
            e = e.max(err[i].norm() / sc);
        }
        if !e.is_finite() {
            h = step * 0.2;
            if h < 1e-14 * span.max(1.0) {
                return Err(Error::StepUnderflow { q: x });
            }
            continue;
        }
        if e <= 1.0 {
            if guard(&y_new) {
                let at = bisect_trip(&f, x, &y, &k1, step, dir, &guard);
                return Ok(OdeSolution {
                    xs,
                    ys,
                    termination: Termination::DivergedAtQ { at },
                    steps,
                });
            }
            x = if lands { target } else { x + step * dir };
            y = y_new;
            k1 = k7;
            if lands {
                xs.push(x);
                ys.push(y);
                next += 1;
            }
            let fac = if e == 0.0 {
                5.0
            } else {
                (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
            };
            // a landing step may be artificially short; do not let it shrink h
            h = if lands { h.max(step * fac) } else { step * fac };
        } else {
            h = step * (0.9 * e.powf(-0.2)).clamp(0.2, 1.0);
            if h < 1e-14 * span.max(1.0) {
                return Err(Error::StepUnderflow { q: x });
            }
        }
    }
    Ok(OdeSolution {
        xs,
        ys,
        termination: Termination::Converged,
        steps,
    })
}

/// Smallest partial step from (x, y) that still trips the guard.
fn bisect_trip<F, G>(f: &F, x: f64, y: &State, k1: &State, h: f64, dir: f64, guard: &G) -> f64
where
    F: Fn(f64, &State) -> State,
    G: Fn(&State) -> bool,
{
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (ym, _, _) = dopri_step(f, x, y, k1, mid * dir);
        if guard(&ym) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    x + hi * dir
}

/// Guard tripping on max |y| above `overflow` or above `growth_limit` times
/// the amplitude of `seed`.
pub fn amplitude_guard(policy: &StepPolicy, seed: &State) -> impl Fn(&State) -> bool {
    let overflow = policy.overflow;
    let rel = policy.growth_limit.map(|g| g * amplitude(seed));
    move |y: &State| {
        let a = amplitude(y);
        !a.is_finite() || a > overflow || rel.is_some_and(|r| a > r)
    }
}
