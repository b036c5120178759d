//! Outward-rounded `f64` intervals for inequalities that involve irrational
//! constants such as `2^(2/3)` or `K^(-1/6)`.
//!
//! Each operation widens its result by a few ulps, so the true real value is
//! always inside `[lo, hi]`.

use std::ops::{Add, Div, Mul, Sub};

use crate::rational::{to_f64, Rational};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Outcome of comparing two intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certainty {
    True,
    False,
    Indeterminate,
}

fn down(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |acc, _| acc.next_down())
}

fn up(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |acc, _| acc.next_up())
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// Encloses a rational; the conversion is widened by two ulps each side.
    pub fn from_rational(x: &Rational) -> Self {
        let v = to_f64(x);
        Interval::new(down(v, 2), up(v, 2))
    }

    /// Encloses a value computed by a libm routine accurate to a few ulps.
    fn around(v: f64, ulps: u32) -> Self {
        Interval::new(down(v, ulps), up(v, ulps))
    }

    pub fn sqrt(self) -> Self {
        assert!(self.lo >= 0.0);
        Interval::new(down(self.lo.sqrt(), 1), up(self.hi.sqrt(), 1))
    }

    /// `self^p` for a positive base; monotone in the base for either sign of `p`.
    pub fn powf(self, p: f64) -> Self {
        assert!(self.lo > 0.0, "powf needs a positive base");
        let a = Interval::around(self.lo.powf(p), 4);
        let b = Interval::around(self.hi.powf(p), 4);
        Interval::new(a.lo.min(b.lo), a.hi.max(b.hi))
    }

    pub fn exp(self) -> Self {
        Interval::new(down(self.lo.exp(), 4), up(self.hi.exp(), 4))
    }

    pub fn scale(self, k: f64) -> Self {
        self * Interval::point(k)
    }

    pub fn mid(self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// `self <= o` for every pair of enclosed reals, or for none of them.
    pub fn le(self, o: Interval) -> Certainty {
        if self.hi <= o.lo {
            Certainty::True
        } else if self.lo > o.hi {
            Certainty::False
        } else {
            Certainty::Indeterminate
        }
    }
}

impl Add for Interval {
    type Output = Interval;

    fn add(self, o: Interval) -> Interval {
        Interval::new(down(self.lo + o.lo, 1), up(self.hi + o.hi, 1))
    }
}

impl Sub for Interval {
    type Output = Interval;

    fn sub(self, o: Interval) -> Interval {
        Interval::new(down(self.lo - o.hi, 1), up(self.hi - o.lo, 1))
    }
}

impl Mul for Interval {
    type Output = Interval;

    fn mul(self, o: Interval) -> Interval {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(down(lo, 1), up(hi, 1))
    }
}

/// Division by an interval that does not contain zero.
impl Div for Interval {
    type Output = Interval;

    fn div(self, o: Interval) -> Interval {
        assert!(o.lo > 0.0 || o.hi < 0.0, "division by an interval containing 0");
        let c = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(down(lo, 1), up(hi, 1))
    }
}

/// `base^(num/den)` for a positive rational base.
pub fn rational_pow(base: &Rational, num: i32, den: i32) -> Interval {
    Interval::from_rational(base).powf(num as f64 / den as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn encloses_cube_root() {
        let iv = rational_pow(&q(2, 1), 2, 3);
        let exact = 2f64.powf(2.0 / 3.0);
        assert!(iv.lo < exact && exact < iv.hi);
        assert!(iv.hi - iv.lo < 1e-14);
    }

    #[test]
    fn comparisons() {
        let a = Interval::new(1.0, 2.0);
        let b = Interval::new(2.5, 3.0);
        assert_eq!(a.le(b), Certainty::True);
        assert_eq!(b.le(a), Certainty::False);
        assert_eq!(a.le(Interval::new(1.5, 1.6)), Certainty::Indeterminate);
    }

    #[test]
    fn third_is_enclosed() {
        let t = Interval::from_rational(&q(1, 3));
        assert!(t.lo < 1.0 / 3.0 + 1e-17 && t.hi > 1.0 / 3.0 - 1e-17);
        let s = t * Interval::point(3.0);
        assert!(s.lo <= 1.0 && s.hi >= 1.0);
    }
}
