use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::Trajectory;

/// Pointwise semilinear term `f(u)`; every kind satisfies `f(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearityKind {
    Zero,
    Linear {
        c: f64,
    },
    Sine,
    /// `u / (1 + u²)`
    Rational,
    /// `L sign(u) min(|u|, B)^α`. The clamp at the caller-asserted bound `B`
    /// makes the term globally Lipschitz with constant `L α B^{α-1}`.
    Power {
        l: f64,
        alpha: f64,
        bound: f64,
    },
}

impl NonlinearityKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NonlinearityKind::Linear { c } if !c.is_finite() => Err(Error::InvalidParameter(
                format!("linear coefficient {c} is not finite"),
            )),
            NonlinearityKind::Power { l, alpha, bound } => {
                if !(l.is_finite() && l >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "power-law L = {l} must be >= 0"
                    )));
                }
                if !(alpha.is_finite() && alpha >= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "power-law alpha = {alpha} must be >= 1"
                    )));
                }
                if !(bound.is_finite() && bound > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "power-law bound B = {bound} must be > 0"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn apply(&self, u: f64) -> f64 {
        match *self {
            NonlinearityKind::Zero => 0.0,
            NonlinearityKind::Linear { c } => c * u,
            NonlinearityKind::Sine => u.sin(),
            NonlinearityKind::Rational => u / (1.0 + u * u),
            NonlinearityKind::Power { l, alpha, bound } => {
                l * u.signum() * u.abs().min(bound).powf(alpha)
            }
        }
    }

    /// Lipschitz constant `L` of the modulus `ω(t) = L t`. The sine and
    /// rational values are the ones quoted for those examples; the rational
    /// one is an upper bound (the sharp constant is 1).
    pub fn lipschitz(&self) -> f64 {
        match *self {
            NonlinearityKind::Zero => 0.0,
            NonlinearityKind::Linear { c } => c.abs(),
            NonlinearityKind::Sine => 1.0,
            NonlinearityKind::Rational => 25.0 / 16.0,
            NonlinearityKind::Power { l, alpha, bound } => l * alpha * bound.powf(alpha - 1.0),
        }
    }

    /// Modulus of continuity `ω(t)`.
    pub fn modulus(&self, t: f64) -> f64 {
        self.lipschitz() * t
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, NonlinearityKind::Zero)
            || matches!(self, NonlinearityKind::Linear { c } if *c == 0.0)
    }

    pub fn name(&self) -> &'static str {
        match self {
            NonlinearityKind::Zero => "zero",
            NonlinearityKind::Linear { .. } => "linear",
            NonlinearityKind::Sine => "sine",
            NonlinearityKind::Rational => "rational",
            NonlinearityKind::Power { .. } => "power",
        }
    }
}

/// Forcing `f(x, y, u) = f(u) + F(x, y)`; the source `F` is given by its
/// coefficient trajectory on the solver's x-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    pub kind: NonlinearityKind,
    pub source: Option<Trajectory>,
}

impl Nonlinearity {
    pub fn new(kind: NonlinearityKind) -> Self {
        Nonlinearity { kind, source: None }
    }

    pub fn zero() -> Self {
        Self::new(NonlinearityKind::Zero)
    }

    pub fn with_source(mut self, source: Trajectory) -> Self {
        self.source = Some(source);
        self
    }

    pub fn depends_on_u(&self) -> bool {
        !self.kind.is_zero()
    }

    pub fn is_identically_zero(&self) -> bool {
        self.kind.is_zero() && self.source.is_none()
    }
}

impl From<NonlinearityKind> for Nonlinearity {
    fn from(kind: NonlinearityKind) -> Self {
        Nonlinearity::new(kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shipped() -> Vec<NonlinearityKind> {
        vec![
            NonlinearityKind::Zero,
            NonlinearityKind::Linear { c: -2.5 },
            NonlinearityKind::Sine,
            NonlinearityKind::Rational,
            NonlinearityKind::Power {
                l: 0.5,
                alpha: 2.0,
                bound: 3.0,
            },
        ]
    }

    #[test]
    fn vanishes_at_zero() {
        for k in shipped() {
            assert_eq!(k.apply(0.0), 0.0, "{}", k.name());
        }
    }

    #[test]
    fn modulus_holds_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in shipped() {
            for _ in 0..10_000 {
                let u: f64 = rng.random_range(-10.0..10.0);
                let v: f64 = rng.random_range(-10.0..10.0);
                let lhs = (k.apply(u) - k.apply(v)).abs();
                assert!(
                    lhs <= k.modulus((u - v).abs()) + 1e-12,
                    "{} at ({u}, {v})",
                    k.name()
                );
            }
        }
    }

    #[test]
    fn quoted_constants() {
        assert_eq!(NonlinearityKind::Sine.lipschitz(), 1.0);
        assert_eq!(NonlinearityKind::Rational.lipschitz(), 25.0 / 16.0);
    }

    #[test]
    fn power_validation() {
        let bad = NonlinearityKind::Power {
            l: 1.0,
            alpha: 0.5,
            bound: 1.0,
        };
        assert!(bad.validate().is_err());
        assert!(NonlinearityKind::Power {
            l: 1.0,
            alpha: 1.5,
            bound: 0.0
        }
        .validate()
        .is_err());
    }
}
