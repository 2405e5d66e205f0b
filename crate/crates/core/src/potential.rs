//! Closed-form nonnegative potentials.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::root_system::DunklSystem;

/// `c · x^{2ν}` with `powers = ν`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coefficient: f64,
    pub powers: Vec<u32>,
}

/// Potential families, each even in every coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `V ≡ value`.
    Constant { value: f64 },
    /// `coefficient · ‖x‖^exponent`.
    Power {
        #[serde(default = "one")]
        coefficient: f64,
        exponent: f64,
    },
    /// `Σ c_ν x^{2ν}`.
    Polynomial { terms: Vec<Monomial> },
    /// Pointwise sum.
    Sum { parts: Vec<PotentialSpec> },
    /// Pointwise maximum.
    Max { parts: Vec<PotentialSpec> },
}

fn one() -> f64 {
    1.0
}

impl PotentialSpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            PotentialSpec::Constant { value } => *value,
            PotentialSpec::Power { coefficient, exponent } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if *exponent == 2.0 {
                    coefficient * r2
                } else {
                    coefficient * r2.powf(0.5 * exponent)
                }
            }
            PotentialSpec::Polynomial { terms } => terms
                .iter()
                .map(|t| {
                    t.coefficient
                        * t.powers
                            .iter()
                            .zip(x)
                            .map(|(&p, v)| (v * v).powi(p as i32))
                            .product::<f64>()
                })
                .sum(),
            PotentialSpec::Sum { parts } => parts.iter().map(|p| p.eval(x)).sum(),
            PotentialSpec::Max { parts } => parts.iter().map(|p| p.eval(x)).fold(0.0, f64::max),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        match self {
            PotentialSpec::Constant { value } if !(*value >= 0.0) || !value.is_finite() => {
                bad("constant potential must be finite and >= 0")
            }
            PotentialSpec::Power { coefficient, exponent }
                if !(*coefficient >= 0.0) || !(*exponent >= 0.0) || !exponent.is_finite() =>
            {
                bad("power potential needs coefficient >= 0 and exponent >= 0")
            }
            PotentialSpec::Polynomial { terms } => {
                for t in terms {
                    if !(t.coefficient >= 0.0) || t.powers.len() != dim {
                        return bad("monomials need coefficient >= 0 and one power per axis");
                    }
                }
                Ok(())
            }
            PotentialSpec::Sum { parts } | PotentialSpec::Max { parts } => {
                if parts.is_empty() {
                    return bad("empty composite potential");
                }
                parts.iter().try_for_each(|p| p.validate(dim))
            }
            _ => Ok(()),
        }
    }

    /// `Some(c)` when the potential is identically `c`.
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            PotentialSpec::Constant { value } => Some(*value),
            PotentialSpec::Power { coefficient, exponent } => match (*coefficient, *exponent) {
                (c, e) if e == 0.0 => Some(c),
                (c, _) if c == 0.0 => Some(0.0),
                _ => None,
            },
            PotentialSpec::Polynomial { terms } => terms
                .iter()
                .try_fold(0.0, |acc, t| {
                    (t.coefficient == 0.0 || t.powers.iter().all(|&p| p == 0)).then_some(acc + t.coefficient)
                }),
            PotentialSpec::Sum { parts } => parts.iter().map(|p| p.constant_value()).sum(),
            PotentialSpec::Max { parts } => parts
                .iter()
                .map(|p| p.constant_value())
                .try_fold(0.0, |acc: f64, v| v.map(|v| acc.max(v))),
        }
    }

    /// Axes along which the potential grows without bound.
    fn growing_axes(&self, dim: usize) -> Vec<bool> {
        match self {
            PotentialSpec::Constant { .. } => vec![false; dim],
            PotentialSpec::Power { coefficient, exponent } => vec![*coefficient > 0.0 && *exponent > 0.0; dim],
            PotentialSpec::Polynomial { terms } => {
                let mut axes = vec![false; dim];
                for t in terms.iter().filter(|t| t.coefficient > 0.0) {
                    let nz: Vec<usize> = (0..dim).filter(|&j| t.powers[j] > 0).collect();
                    if nz.len() == 1 {
                        axes[nz[0]] = true;
                    }
                }
                axes
            }
            PotentialSpec::Sum { parts } | PotentialSpec::Max { parts } => {
                let mut axes = vec![false; dim];
                for p in parts {
                    for (a, b) in axes.iter_mut().zip(p.growing_axes(dim)) {
                        *a |= b;
                    }
                }
                axes
            }
        }
    }

    /// `V_s(y) = s² V(s y)`.
    pub fn scaled(&self, s: f64) -> PotentialSpec {
        match self {
            PotentialSpec::Constant { value } => PotentialSpec::Constant { value: s * s * value },
            PotentialSpec::Power { coefficient, exponent } => PotentialSpec::Power {
                coefficient: coefficient * s.powf(2.0 + exponent),
                exponent: *exponent,
            },
            PotentialSpec::Polynomial { terms } => PotentialSpec::Polynomial {
                terms: terms
                    .iter()
                    .map(|t| {
                        let deg: u32 = t.powers.iter().sum();
                        Monomial {
                            coefficient: t.coefficient * s.powi(2 + 2 * deg as i32),
                            powers: t.powers.clone(),
                        }
                    })
                    .collect(),
            },
            PotentialSpec::Sum { parts } => PotentialSpec::Sum {
                parts: parts.iter().map(|p| p.scaled(s)).collect(),
            },
            PotentialSpec::Max { parts } => PotentialSpec::Max {
                parts: parts.iter().map(|p| p.scaled(s)).collect(),
            },
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            PotentialSpec::Constant { value } => format!("const({value})"),
            PotentialSpec::Power { coefficient, exponent } => format!("{coefficient}|x|^{exponent}"),
            PotentialSpec::Polynomial { terms } => format!("poly({} terms)", terms.len()),
            PotentialSpec::Sum { parts } => {
                parts.iter().map(|p| p.label()).collect::<Vec<_>>().join("+")
            }
            PotentialSpec::Max { parts } => format!(
                "max({})",
                parts.iter().map(|p| p.label()).collect::<Vec<_>>().join(",")
            ),
        }
    }
}

/// A validated potential with its claimed reverse-Hölder exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    spec: PotentialSpec,
    q: f64,
    dim: usize,
    coercive: bool,
}

impl Potential {
    /// Checks `V ≥ 0` by family and `q > max(1, 𝐍/2)` for the given system.
    pub fn new(spec: PotentialSpec, q: f64, system: &DunklSystem) -> Result<Self> {
        let dim = system.dim();
        spec.validate(dim)?;
        let bound = 1f64.max(system.homogeneous_dimension() / 2.0);
        if !(q > bound) {
            return Err(Error::InvalidParameter(format!(
                "reverse-Holder exponent {q} must exceed {bound}"
            )));
        }
        let coercive = spec.growing_axes(dim).iter().all(|&b| b);
        Ok(Potential { spec, q, dim, coercive })
    }

    /// Picks a valid exponent automatically: `max(2, 𝐍/2 + 1)`.
    pub fn with_default_q(spec: PotentialSpec, system: &DunklSystem) -> Result<Self> {
        let q = 2f64.max(system.homogeneous_dimension() / 2.0 + 1.0);
        Self::new(spec, q, system)
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.spec.eval(x)
    }

    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_coercive(&self) -> bool {
        self.coercive
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.spec.constant_value()
    }

    /// The rescaled potential `V_s(y) = s² V(s y)` with the same `q`.
    pub fn scaled(&self, s: f64) -> Potential {
        Potential {
            spec: self.spec.scaled(s),
            ..self.clone()
        }
    }
}
