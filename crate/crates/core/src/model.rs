//! Physical scales, potentials and branch conventions shared by every solver.
//!
//! All quantities are in scaled units by default: ħ = m = 1, harmonic ω = 1
//! and Coulomb e² = 1 (so the Bohr radius is 1).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScales")]
pub struct PhysicalScales {
    pub hbar: f64,
    pub mass: f64,
}

#[derive(Deserialize)]
struct RawScales {
    #[serde(default = "one")]
    hbar: f64,
    #[serde(default = "one")]
    mass: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawScales> for PhysicalScales {
    type Error = Error;
    fn try_from(raw: RawScales) -> Result<Self> {
        PhysicalScales::new(raw.hbar, raw.mass)
    }
}

impl Default for PhysicalScales {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

impl PhysicalScales {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(invalid(
                "hbar",
                format!("must be finite and > 0, got {hbar}"),
            ));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(invalid(
                "mass",
                format!("must be finite and > 0, got {mass}"),
            ));
        }
        Ok(Self { hbar, mass })
    }
}

/// Time-independent potential V(q).
///
/// Serialized as a JSON object tagged by `type`, e.g.
/// `{"type": "harmonic", "omega": 1.0}` or
/// `{"type": "coulomb1d", "e2": 1.0, "epsilon": 0.001}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", try_from = "RawPotential")]
pub enum Potential {
    Free,
    /// V(q) = −f0·(q − q0).
    ConstantForce {
        f0: f64,
        q0: f64,
    },
    /// V(q) = m ω² q² / 2.
    Harmonic {
        omega: f64,
    },
    /// V(q) = −m ω² q² / 2.
    InvertedHarmonic {
        omega: f64,
    },
    /// V(q) = −e2/|q|, admitted for |q| ≥ epsilon.
    Coulomb1D {
        e2: f64,
        epsilon: f64,
    },
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum RawPotential {
    Free,
    #[serde(alias = "constant_force")]
    ConstantForce {
        f0: f64,
        #[serde(default)]
        q0: f64,
    },
    Harmonic {
        #[serde(default = "one")]
        omega: f64,
    },
    #[serde(alias = "inverted_harmonic")]
    InvertedHarmonic {
        #[serde(default = "one")]
        omega: f64,
    },
    #[serde(alias = "coulomb", alias = "coulomb_1d")]
    Coulomb1D {
        #[serde(default = "one")]
        e2: f64,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
}

fn default_epsilon() -> f64 {
    1e-3
}

impl TryFrom<RawPotential> for Potential {
    type Error = Error;
    fn try_from(raw: RawPotential) -> Result<Self> {
        let pot = match raw {
            RawPotential::Free => Potential::Free,
            RawPotential::ConstantForce { f0, q0 } => Potential::ConstantForce { f0, q0 },
            RawPotential::Harmonic { omega } => Potential::Harmonic { omega },
            RawPotential::InvertedHarmonic { omega } => Potential::InvertedHarmonic { omega },
            RawPotential::Coulomb1D { e2, epsilon } => Potential::Coulomb1D { e2, epsilon },
        };
        pot.validated()
    }
}

impl Potential {
    pub fn harmonic(omega: f64) -> Result<Self> {
        Potential::Harmonic { omega }.validated()
    }

    pub fn coulomb(e2: f64, epsilon: f64) -> Result<Self> {
        Potential::Coulomb1D { e2, epsilon }.validated()
    }

    pub fn constant_force(f0: f64, q0: f64) -> Result<Self> {
        Potential::ConstantForce { f0, q0 }.validated()
    }

    /// Parse and validate a JSON potential description.
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            Potential::Free => {}
            Potential::ConstantForce { f0, q0 } => {
                if !f0.is_finite() || !q0.is_finite() {
                    return Err(invalid("f0", "force and origin must be finite"));
                }
            }
            Potential::Harmonic { omega } | Potential::InvertedHarmonic { omega } => {
                if !(omega.is_finite() && omega > 0.0) {
                    return Err(invalid("omega", format!("must be > 0, got {omega}")));
                }
            }
            Potential::Coulomb1D { e2, epsilon } => {
                if !(e2.is_finite() && e2 > 0.0) {
                    return Err(invalid("e2", format!("must be > 0, got {e2}")));
                }
                if !(epsilon.is_finite() && epsilon > 0.0) {
                    return Err(invalid("epsilon", format!("must be > 0, got {epsilon}")));
                }
            }
        }
        Ok(self)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Potential::Free => "free",
            Potential::ConstantForce { .. } => "constantforce",
            Potential::Harmonic { .. } => "harmonic",
            Potential::InvertedHarmonic { .. } => "invertedharmonic",
            Potential::Coulomb1D { .. } => "coulomb1d",
        }
    }

    pub fn check_domain(&self, q: f64) -> Result<()> {
        if !q.is_finite() {
            return Err(Error::Domain {
                q,
                reason: "position must be finite".into(),
            });
        }
        if let Potential::Coulomb1D { epsilon, .. } = *self {
            if q.abs() < epsilon {
                return Err(Error::Domain {
                    q,
                    reason: format!("Coulomb potential admits |q| >= {epsilon} only"),
                });
            }
        }
        Ok(())
    }

    pub fn admits(&self, q: f64) -> bool {
        self.check_domain(q).is_ok()
    }

    /// V(q).
    pub fn value(&self, scales: &PhysicalScales, q: f64) -> Result<f64> {
        self.check_domain(q)?;
        Ok(self.value_unchecked(scales, q))
    }

    pub(crate) fn value_unchecked(&self, scales: &PhysicalScales, q: f64) -> f64 {
        match *self {
            Potential::Free => 0.0,
            Potential::ConstantForce { f0, q0 } => -f0 * (q - q0),
            Potential::Harmonic { omega } => 0.5 * scales.mass * omega * omega * q * q,
            Potential::InvertedHarmonic { omega } => -0.5 * scales.mass * omega * omega * q * q,
            Potential::Coulomb1D { e2, .. } => -e2 / q.abs(),
        }
    }

    /// F(q) = −dV/dq, in closed form.
    pub fn force(&self, scales: &PhysicalScales, q: f64) -> Result<f64> {
        self.check_domain(q)?;
        Ok(match *self {
            Potential::Free => 0.0,
            Potential::ConstantForce { f0, .. } => f0,
            Potential::Harmonic { omega } => -scales.mass * omega * omega * q,
            Potential::InvertedHarmonic { omega } => scales.mass * omega * omega * q,
            Potential::Coulomb1D { e2, .. } => -e2 * q.signum() / (q * q),
        })
    }

    /// Principal-branch √(2mV(q)); purely imaginary where V < 0.
    pub fn characteristic_momentum(&self, scales: &PhysicalScales, q: f64) -> Result<Complex64> {
        let v = self.value(scales, q)?;
        Ok(Complex64::new(2.0 * scales.mass * v, 0.0).sqrt())
    }

    /// Root s(q) of s² = 2mV(q) used to couple the two Dirac channels.
    ///
    /// Quadratic potentials use the analytic (odd) root ±mωq so that the
    /// shift ħ s'/(2m) is the constant ±ħω/2 on both sides of the origin;
    /// every other potential uses the principal branch.
    pub fn coupling_root(&self, scales: &PhysicalScales, q: f64) -> Result<Complex64> {
        match *self {
            Potential::Harmonic { omega } => {
                self.check_domain(q)?;
                Ok(Complex64::new(scales.mass * omega * q, 0.0))
            }
            Potential::InvertedHarmonic { omega } => {
                self.check_domain(q)?;
                Ok(Complex64::new(0.0, scales.mass * omega * q))
            }
            _ => self.characteristic_momentum(scales, q),
        }
    }

    /// Coupling root continued to a complex position; only quadratic and
    /// free potentials are entire functions of q.
    pub fn coupling_root_complex(
        &self,
        scales: &PhysicalScales,
        z: Complex64,
    ) -> Result<Complex64> {
        match *self {
            Potential::Free => Ok(Complex64::new(0.0, 0.0)),
            Potential::Harmonic { omega } => Ok(z * (scales.mass * omega)),
            Potential::InvertedHarmonic { omega } => {
                Ok(z * Complex64::new(0.0, scales.mass * omega))
            }
            _ if z.im == 0.0 => self.coupling_root(scales, z.re),
            _ => Err(Error::Unsupported("complex position for this potential")),
        }
    }

    /// V continued to a complex position (see [`Potential::coupling_root_complex`]).
    pub fn value_complex(&self, scales: &PhysicalScales, z: Complex64) -> Result<Complex64> {
        match *self {
            Potential::Free => Ok(Complex64::new(0.0, 0.0)),
            Potential::Harmonic { omega } => Ok(z * z * (0.5 * scales.mass * omega * omega)),
            Potential::InvertedHarmonic { omega } => {
                Ok(z * z * (-0.5 * scales.mass * omega * omega))
            }
            _ if z.im == 0.0 => Ok(Complex64::new(self.value(scales, z.re)?, 0.0)),
            _ => Err(Error::Unsupported("complex position for this potential")),
        }
    }

    /// ds/dq for [`Potential::coupling_root`].
    pub fn coupling_root_derivative(&self, scales: &PhysicalScales, q: f64) -> Result<Complex64> {
        self.check_domain(q)?;
        let m = scales.mass;
        Ok(match *self {
            Potential::Free => Complex64::new(0.0, 0.0),
            Potential::Harmonic { omega } => Complex64::new(m * omega, 0.0),
            Potential::InvertedHarmonic { omega } => Complex64::new(0.0, m * omega),
            Potential::ConstantForce { f0, .. } => {
                // s s' = m V' = −m F
                let s = self.coupling_root(scales, q)?;
                if s.norm() == 0.0 {
                    if f0 == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        return Err(Error::SingularShift { q });
                    }
                } else {
                    Complex64::new(-m * f0, 0.0) / s
                }
            }
            Potential::Coulomb1D { e2, .. } => {
                // s = i·sqrt(2 m e2) |q|^{-1/2}
                let a = (2.0 * m * e2).sqrt();
                Complex64::new(0.0, -0.5 * a * q.signum() * q.abs().powf(-1.5))
            }
        })
    }

    pub fn omega(&self) -> Option<f64> {
        match *self {
            Potential::Harmonic { omega } | Potential::InvertedHarmonic { omega } => Some(omega),
            _ => None,
        }
    }
}

/// Sign of the Momentumian. `Plus` pairs with negative time velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn swap(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Branch::Plus),
            "minus" | "-" => Ok(Branch::Minus),
            other => Err(invalid(
                "branch",
                format!("expected plus|minus, got `{other}`"),
            )),
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        })
    }
}
