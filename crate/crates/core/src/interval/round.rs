//! Directed rounding of the basic floating-point operations.
//!
//! Every function returns a bound on the exact real result in the requested
//! direction. Sums use an error-free transformation; products and quotients
//! recover the rounding error with a fused multiply-add. Results that are
//! too small for the fma residual to be exact are widened unconditionally.

const TINY: f64 = 1.0e-290;

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

#[inline]
fn widen_down(r: f64) -> f64 {
    if r == f64::NEG_INFINITY {
        r
    } else {
        r.next_down()
    }
}

#[inline]
fn widen_up(r: f64) -> f64 {
    if r == f64::INFINITY {
        r
    } else {
        r.next_up()
    }
}

#[inline]
pub(crate) fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s.is_nan() {
            f64::NEG_INFINITY
        } else {
            widen_down_overflow(s)
        };
    }
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
pub(crate) fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s.is_nan() {
            f64::INFINITY
        } else {
            widen_up_overflow(s)
        };
    }
    if two_sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
pub(crate) fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub(crate) fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

// Overflow to +inf when rounding down means the true value is the largest finite.
#[inline]
fn widen_down_overflow(s: f64) -> f64 {
    if s == f64::INFINITY {
        f64::MAX
    } else {
        s
    }
}

#[inline]
fn widen_up_overflow(s: f64) -> f64 {
    if s == f64::NEG_INFINITY {
        f64::MIN
    } else {
        s
    }
}

#[inline]
pub(crate) fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return if p.is_nan() {
            f64::NEG_INFINITY
        } else {
            widen_down_overflow(p)
        };
    }
    if p.abs() < TINY {
        return widen_down(p);
    }
    if a.mul_add(b, -p) < 0.0 {
        p.next_down()
    } else {
        p
    }
}

#[inline]
pub(crate) fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return if p.is_nan() {
            f64::INFINITY
        } else {
            widen_up_overflow(p)
        };
    }
    if p.abs() < TINY {
        return widen_up(p);
    }
    if a.mul_add(b, -p) > 0.0 {
        p.next_up()
    } else {
        p
    }
}

/// Sign of the residual `a - q*b` relative to the divisor, i.e. the sign of
/// `a/b - q`.
#[inline]
fn div_residual_sign(a: f64, b: f64, q: f64) -> f64 {
    let r = (-q).mul_add(b, a);
    if r == 0.0 {
        0.0
    } else if (r > 0.0) == (b > 0.0) {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub(crate) fn div_down(a: f64, b: f64) -> f64 {
    debug_assert!(b != 0.0);
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if !q.is_finite() {
        return if q.is_nan() {
            f64::NEG_INFINITY
        } else {
            widen_down_overflow(q)
        };
    }
    if q.abs() < TINY || a.abs() < TINY {
        return widen_down(q);
    }
    if div_residual_sign(a, b, q) < 0.0 {
        q.next_down()
    } else {
        q
    }
}

#[inline]
pub(crate) fn div_up(a: f64, b: f64) -> f64 {
    debug_assert!(b != 0.0);
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if !q.is_finite() {
        return if q.is_nan() {
            f64::INFINITY
        } else {
            widen_up_overflow(q)
        };
    }
    if q.abs() < TINY || a.abs() < TINY {
        return widen_up(q);
    }
    if div_residual_sign(a, b, q) > 0.0 {
        q.next_up()
    } else {
        q
    }
}

/// Widen a result of a libm call (faithful to within one ulp) by two ulps.
#[inline]
pub(crate) fn libm_down(r: f64) -> f64 {
    widen_down(widen_down(r))
}

#[inline]
pub(crate) fn libm_up(r: f64) -> f64 {
    widen_up(widen_up(r))
}
