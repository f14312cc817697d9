//! Exponent bookkeeping for quantities like `e^{2 sqrt(lambda) a}` that leave
//! the double range long before the quantities built from them do.
//!
//! A [`LogScalar`] stores a sign and the natural log of the magnitude. Zero is
//! represented with sign `0` and `ln_abs = -inf`.

use std::cmp::Ordering;
use std::ops::{Mul, Neg};

use serde::{Deserialize, Serialize};

/// Exponents above this are never materialised with `f64::exp` directly.
pub const DIRECT_EXP_LIMIT: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogScalar {
    sign: i8,
    ln_abs: f64,
}

impl LogScalar {
    pub const ZERO: LogScalar = LogScalar {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };
    pub const ONE: LogScalar = LogScalar {
        sign: 1,
        ln_abs: 0.0,
    };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            LogScalar {
                sign: if v > 0.0 { 1 } else { -1 },
                ln_abs: v.abs().ln(),
            }
        }
    }

    /// `e^{exponent}` without evaluating it.
    pub fn exp(exponent: f64) -> Self {
        if exponent == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogScalar {
                sign: 1,
                ln_abs: exponent,
            }
        }
    }

    pub fn from_parts(sign: i8, ln_abs: f64) -> Self {
        if sign == 0 || ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogScalar {
                sign: sign.signum(),
                ln_abs,
            }
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn ln_abs(&self) -> f64 {
        self.ln_abs
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Materialise as a double; saturates to `±inf` out of range.
    pub fn to_f64(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_abs.exp(),
        }
    }

    pub fn abs(&self) -> Self {
        LogScalar {
            sign: self.sign.abs(),
            ln_abs: self.ln_abs,
        }
    }

    pub fn square(&self) -> Self {
        LogScalar {
            sign: self.sign.abs(),
            ln_abs: 2.0 * self.ln_abs,
        }
    }

    /// `|self|^p` for real `p > 0`.
    pub fn abs_powf(&self, p: f64) -> Self {
        if self.sign == 0 {
            Self::ZERO
        } else {
            LogScalar {
                sign: 1,
                ln_abs: p * self.ln_abs,
            }
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        *self * LogScalar::from_f64(factor)
    }

    pub fn add(&self, other: &LogScalar) -> Self {
        if self.sign == 0 {
            return *other;
        }
        if other.sign == 0 {
            return *self;
        }
        let (big, small) = if self.ln_abs >= other.ln_abs {
            (self, other)
        } else {
            (other, self)
        };
        if big.ln_abs == f64::INFINITY {
            return *big;
        }
        let ratio = (small.ln_abs - big.ln_abs).exp();
        if big.sign == small.sign {
            LogScalar {
                sign: big.sign,
                ln_abs: big.ln_abs + ratio.ln_1p(),
            }
        } else if ratio == 1.0 {
            Self::ZERO
        } else {
            LogScalar {
                sign: big.sign,
                ln_abs: big.ln_abs + (-ratio).ln_1p(),
            }
        }
    }

    pub fn sub(&self, other: &LogScalar) -> Self {
        self.add(&-*other)
    }

    /// Total order on the represented real numbers.
    pub fn cmp_value(&self, other: &LogScalar) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Ordering::Equal,
                1 => self.ln_abs.total_cmp(&other.ln_abs),
                _ => other.ln_abs.total_cmp(&self.ln_abs),
            },
            o => o,
        }
    }

    /// `self <= other * (1 + rel_slack)` for nonnegative values.
    pub fn le_with_slack(&self, other: &LogScalar, rel_slack: f64) -> bool {
        if self.sign <= 0 {
            return other.sign >= 0 || self.cmp_value(other) != Ordering::Greater;
        }
        if other.sign <= 0 {
            return false;
        }
        self.ln_abs <= other.ln_abs + rel_slack.ln_1p()
    }

    /// Relative difference `|self - other| / max(|self|, |other|)`.
    pub fn rel_diff(&self, other: &LogScalar) -> f64 {
        if self.is_zero() && other.is_zero() {
            return 0.0;
        }
        let diff = self.sub(other);
        let scale = if self.ln_abs >= other.ln_abs {
            self.ln_abs
        } else {
            other.ln_abs
        };
        if diff.is_zero() {
            0.0
        } else {
            (diff.ln_abs - scale).exp()
        }
    }
}

impl Mul for LogScalar {
    type Output = LogScalar;

    fn mul(self, rhs: LogScalar) -> LogScalar {
        if self.sign == 0 || rhs.sign == 0 {
            LogScalar::ZERO
        } else {
            LogScalar {
                sign: self.sign * rhs.sign,
                ln_abs: self.ln_abs + rhs.ln_abs,
            }
        }
    }
}

impl Neg for LogScalar {
    type Output = LogScalar;

    fn neg(self) -> LogScalar {
        LogScalar {
            sign: -self.sign,
            ln_abs: self.ln_abs,
        }
    }
}

/// Fixed-order accumulator for nonnegative terms given by their logs.
///
/// Terms are summed directly while every exponent stays below
/// [`DIRECT_EXP_LIMIT`]; once one exceeds it, the whole sum is redone in
/// log-sum-exp form. The order of terms is the order of `push` calls.
#[derive(Debug, Clone, Default)]
pub struct LogSum {
    terms: Vec<f64>,
}

impl LogSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_ln(&mut self, ln_term: f64) {
        self.terms.push(ln_term);
    }

    pub fn push(&mut self, term: LogScalar) {
        debug_assert!(term.sign() >= 0, "LogSum only accepts nonnegative terms");
        self.terms.push(term.ln_abs());
    }

    pub fn total(&self) -> LogScalar {
        let max = self.terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return LogScalar::ZERO;
        }
        if max.abs() <= DIRECT_EXP_LIMIT {
            let direct: f64 = self.terms.iter().map(|t| t.exp()).sum();
            if direct > 0.0 && direct.is_finite() {
                return LogScalar::from_f64(direct);
            }
        }
        let scaled: f64 = self.terms.iter().map(|t| (t - max).exp()).sum();
        LogScalar::exp(max + scaled.ln())
    }
}
