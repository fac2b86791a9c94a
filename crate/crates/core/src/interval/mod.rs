//! Outward-rounded interval arithmetic.
//!
//! [`Interval`] is always non-empty; operations that may produce the empty set
//! return `Option<Interval>`. Bounds are rounded outward after every
//! operation (see [`round`]), so every function here is an interval
//! extension of its real counterpart.

mod elementary;
mod ivbox;
pub(crate) mod round;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

pub use ivbox::IntervalBox;
use round::{add_down, add_up, div_down, div_up, mul_down, mul_up, sub_down, sub_up};

/// A closed interval `[lo, hi]` of reals with `lo <= hi`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    /// Creates `[lo, hi]`.
    ///
    /// Panics if `lo > hi` or either bound is NaN.
    #[inline]
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "invalid interval bounds [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// Creates `[lo, hi]`, or `None` if the bounds are out of order or NaN.
    #[inline]
    pub fn try_new(lo: f64, hi: f64) -> Option<Self> {
        if lo <= hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }

    #[inline]
    pub fn point(x: f64) -> Self {
        Interval::new(x, x)
    }

    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    /// Tight enclosure of pi.
    pub const PI: Interval = Interval {
        lo: std::f64::consts::PI,
        hi: 3.141_592_653_589_793_6,
    };

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    #[inline]
    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// `self ⊆ other`.
    #[inline]
    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// `self` lies in the open interior of `other`.
    #[inline]
    pub fn interior_of(&self, other: &Interval) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }

    #[inline]
    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    #[inline]
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        Interval::try_new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    #[inline]
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Width `hi - lo`, rounded up.
    #[inline]
    pub fn width(&self) -> f64 {
        sub_up(self.hi, self.lo)
    }

    /// A floating-point number inside the interval, close to the midpoint.
    #[inline]
    pub fn mid(&self) -> f64 {
        if self.lo == f64::NEG_INFINITY || self.hi == f64::INFINITY {
            if self.lo.is_finite() {
                return self.lo;
            }
            if self.hi.is_finite() {
                return self.hi;
            }
            return 0.0;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Radius such that `[mid - rad, mid + rad]` covers the interval, rounded up.
    #[inline]
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        sub_up(m, self.lo).max(sub_up(self.hi, m))
    }

    /// Magnitude `max |x|`.
    #[inline]
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Mignitude `min |x|`.
    #[inline]
    pub fn mig(&self) -> f64 {
        if self.contains_zero() {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    #[inline]
    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            -*self
        } else {
            Interval::new(0.0, self.mag())
        }
    }

    /// `self * self`, tighter than `self * self` when the interval contains zero.
    pub fn sqr(&self) -> Interval {
        let a = self.abs();
        Interval::new(mul_down(a.lo, a.lo), mul_up(a.hi, a.hi))
    }

    /// Multiplies by a non-zero integer-valued scale without widening when exact.
    #[inline]
    pub fn scale(&self, k: f64) -> Interval {
        *self * Interval::point(k)
    }

    /// Division by a positive integer constant.
    #[inline]
    pub fn div_int(&self, k: u32) -> Interval {
        let k = k as f64;
        Interval::new(div_down(self.lo, k), div_up(self.hi, k))
    }

    /// Interval quotient. Returns `None` when the divisor contains zero.
    pub fn checked_div(&self, rhs: &Interval) -> Option<Interval> {
        if rhs.contains_zero() {
            return None;
        }
        let (a, b) = (self, rhs);
        let lo = div_down(a.lo, b.lo)
            .min(div_down(a.lo, b.hi))
            .min(div_down(a.hi, b.lo))
            .min(div_down(a.hi, b.hi));
        let hi = div_up(a.lo, b.lo)
            .max(div_up(a.lo, b.hi))
            .max(div_up(a.hi, b.lo))
            .max(div_up(a.hi, b.hi));
        Some(Interval::new(lo, hi))
    }

    /// Adds a real offset with outward rounding.
    #[inline]
    pub fn add_scalar(&self, x: f64) -> Interval {
        Interval::new(add_down(self.lo, x), add_up(self.hi, x))
    }

    /// Subtracts a real offset with outward rounding.
    #[inline]
    pub fn sub_scalar(&self, x: f64) -> Interval {
        Interval::new(sub_down(self.lo, x), sub_up(self.hi, x))
    }

    /// Midpoint-radius inflation: the radius is multiplied by `factor` and
    /// one extra ulp is added on each side so that point intervals grow too.
    pub fn inflate(&self, factor: f64) -> Interval {
        debug_assert!(factor >= 1.0);
        let m = self.mid();
        let r = mul_up(self.rad(), factor);
        let lo = sub_down(m, r).next_down();
        let hi = add_up(m, r).next_up();
        Interval::new(lo.min(self.lo), hi.max(self.hi))
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "[{}]", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, rhs: Interval) -> Interval {
        Interval::new(add_down(self.lo, rhs.lo), add_up(self.hi, rhs.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, rhs: Interval) -> Interval {
        Interval::new(sub_down(self.lo, rhs.hi), sub_up(self.hi, rhs.lo))
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let (a, b) = (self, rhs);
        if a.lo >= 0.0 {
            if b.lo >= 0.0 {
                return Interval::new(mul_down(a.lo, b.lo), mul_up(a.hi, b.hi));
            }
            if b.hi <= 0.0 {
                return Interval::new(mul_down(a.hi, b.lo), mul_up(a.lo, b.hi));
            }
            return Interval::new(mul_down(a.hi, b.lo), mul_up(a.hi, b.hi));
        }
        if a.hi <= 0.0 {
            if b.lo >= 0.0 {
                return Interval::new(mul_down(a.lo, b.hi), mul_up(a.hi, b.lo));
            }
            if b.hi <= 0.0 {
                return Interval::new(mul_down(a.hi, b.hi), mul_up(a.lo, b.lo));
            }
            return Interval::new(mul_down(a.lo, b.hi), mul_up(a.lo, b.lo));
        }
        if b.lo >= 0.0 {
            return Interval::new(mul_down(a.lo, b.hi), mul_up(a.hi, b.hi));
        }
        if b.hi <= 0.0 {
            return Interval::new(mul_down(a.hi, b.lo), mul_up(a.lo, b.lo));
        }
        let lo = mul_down(a.lo, b.hi).min(mul_down(a.hi, b.lo));
        let hi = mul_up(a.lo, b.lo).max(mul_up(a.hi, b.hi));
        Interval::new(lo, hi)
    }
}

impl Div for Interval {
    type Output = Interval;
    /// Panics when the divisor contains zero; use [`ext_div`] in that case.
    fn div(self, rhs: Interval) -> Interval {
        self.checked_div(&rhs)
            .expect("interval division by an interval containing zero")
    }
}

/// Hypermetric `max(|a.hi - b.hi|, |a.lo - b.lo|)`, rounded up.
pub fn hypermetric(a: &Interval, b: &Interval) -> f64 {
    abs_diff_up(a.hi, b.hi).max(abs_diff_up(a.lo, b.lo))
}

#[inline]
fn abs_diff_up(x: f64, y: f64) -> f64 {
    if x == y {
        0.0
    } else if x > y {
        sub_up(x, y)
    } else {
        sub_up(y, x)
    }
}

/// Extended division: an enclosure of `{δ ∈ d | ∃α∈a, β∈b: α = βδ}`.
///
/// When the feasible set splits in two pieces the hull of both is returned.
pub fn ext_div(a: &Interval, b: &Interval, d: &Interval) -> Option<Interval> {
    if !b.contains_zero() {
        return a.checked_div(b).and_then(|q| q.intersect(d));
    }
    if a.contains_zero() {
        return Some(*d);
    }
    // Open gap (gap_lo, gap_hi) of infeasible quotients; rounded inward.
    let (gap_lo, gap_hi) = if a.lo > 0.0 {
        let gl = if b.lo == 0.0 {
            f64::NEG_INFINITY
        } else {
            div_up(a.lo, b.lo)
        };
        let gh = if b.hi == 0.0 {
            f64::INFINITY
        } else {
            div_down(a.lo, b.hi)
        };
        (gl, gh)
    } else {
        let gl = if b.hi == 0.0 {
            f64::NEG_INFINITY
        } else {
            div_up(a.hi, b.hi)
        };
        let gh = if b.lo == 0.0 {
            f64::INFINITY
        } else {
            div_down(a.hi, b.lo)
        };
        (gl, gh)
    };
    let left = Interval::try_new(d.lo, d.hi.min(gap_lo));
    let right = Interval::try_new(d.lo.max(gap_hi), d.hi);
    match (left, right) {
        (Some(l), Some(r)) => Some(l.hull(&r)),
        (Some(l), None) => Some(l),
        (None, Some(r)) => Some(r),
        (None, None) => None,
    }
}

/// One interval Newton step `anchor + ext_div(-f(anchor), f'(domain), domain - anchor)`,
/// intersected with `domain`. `None` certifies that `domain` holds no root.
pub fn newton_step(
    f_at_anchor: &Interval,
    df_over_domain: &Interval,
    domain: &Interval,
    anchor: f64,
) -> Option<Interval> {
    debug_assert!(domain.contains(anchor));
    let shifted = domain.sub_scalar(anchor);
    let step = ext_div(&-*f_at_anchor, df_over_domain, &shifted)?;
    step.add_scalar(anchor).intersect(domain)
}
