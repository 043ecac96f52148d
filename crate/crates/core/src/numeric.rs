//! Log-domain arithmetic shared by the operator and measure code.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg};

/// Streaming `log Σ exp(v)`; returns `-inf` for an empty input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut max = f64::NEG_INFINITY;
    let mut acc = 0.0;
    for v in values {
        if v == f64::NEG_INFINITY {
            continue;
        }
        if v > max {
            acc = acc * (max - v).exp() + 1.0;
            max = v;
        } else {
            acc += (v - max).exp();
        }
    }
    if max == f64::NEG_INFINITY {
        max
    } else {
        max + acc.ln()
    }
}

/// `log cosh x` without overflow.
pub fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Normalizes log weights in place to a probability vector and returns the normalizer.
pub fn normalize_log(weights: &mut [f64]) -> f64 {
    let z = log_sum_exp(weights.iter().copied());
    for w in weights.iter_mut() {
        *w -= z;
    }
    z
}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Sum with compensation.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// A real number stored as a sign and `log |v|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedLog {
    pub sign: i8,
    pub log_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        log_abs: f64::NEG_INFINITY,
    };
    pub const ONE: SignedLog = SignedLog {
        sign: 1,
        log_abs: 0.0,
    };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: if v > 0.0 { 1 } else { -1 },
                log_abs: v.abs().ln(),
            }
        }
    }

    /// A positive number `exp(l)`.
    pub fn from_log(l: f64) -> Self {
        if l == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLog {
                sign: 1,
                log_abs: l,
            }
        }
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.log_abs.exp()
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        if self.sign == 0 {
            self
        } else {
            SignedLog {
                sign: 1,
                log_abs: self.log_abs,
            }
        }
    }

    /// Multiplies by `exp(l)`.
    pub fn scale_log(self, l: f64) -> Self {
        if self.sign == 0 {
            self
        } else {
            SignedLog {
                sign: self.sign,
                log_abs: self.log_abs + l,
            }
        }
    }

    /// `|v|^p` for `p > 0`.
    pub fn abs_pow(self, p: f64) -> Self {
        if self.sign == 0 {
            self
        } else {
            SignedLog {
                sign: 1,
                log_abs: self.log_abs * p,
            }
        }
    }
}

impl Add for SignedLog {
    type Output = SignedLog;

    fn add(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        let (hi, lo) = if self.log_abs >= rhs.log_abs {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let d = lo.log_abs - hi.log_abs;
        if hi.sign == lo.sign {
            SignedLog {
                sign: hi.sign,
                log_abs: hi.log_abs + d.exp().ln_1p(),
            }
        } else if d == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: hi.sign,
                log_abs: hi.log_abs + (-d.exp()).ln_1p(),
            }
        }
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;

    fn mul(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 || rhs.sign == 0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: self.sign * rhs.sign,
                log_abs: self.log_abs + rhs.log_abs,
            }
        }
    }
}

impl Neg for SignedLog {
    type Output = SignedLog;

    fn neg(self) -> SignedLog {
        SignedLog {
            sign: -self.sign,
            log_abs: self.log_abs,
        }
    }
}

impl std::iter::Sum for SignedLog {
    fn sum<I: Iterator<Item = SignedLog>>(iter: I) -> SignedLog {
        iter.fold(SignedLog::ZERO, |a, b| a + b)
    }
}

/// A closed interval, possibly with infinite endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi || lo.is_nan() || hi.is_nan());
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn shift(self, v: f64) -> Self {
        Interval {
            lo: self.lo + v,
            hi: self.hi + v,
        }
    }

    pub fn scale(self, c: f64) -> Self {
        let (a, b) = (mul0(self.lo, c), mul0(self.hi, c));
        Interval {
            lo: a.min(b),
            hi: a.max(b),
        }
    }
}

impl std::ops::Add for Interval {
    type Output = Interval;

    fn add(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo + other.lo,
            hi: self.hi + other.hi,
        }
    }
}

/// Interval product with the convention `0 · ∞ = 0`.
impl std::ops::Mul for Interval {
    type Output = Interval;

    fn mul(self, other: Interval) -> Interval {
        let c = [
            mul0(self.lo, other.lo),
            mul0(self.lo, other.hi),
            mul0(self.hi, other.lo),
            mul0(self.hi, other.hi),
        ];
        Interval {
            lo: c.iter().copied().fold(f64::INFINITY, f64::min),
            hi: c.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

fn mul0(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}
