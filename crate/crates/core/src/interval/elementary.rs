//! Elementary functions on intervals.

use super::round::{libm_down, libm_up, mul_down, mul_up};
use super::Interval;

impl Interval {
    pub fn exp(&self) -> Interval {
        let lo = if self.lo == 0.0 {
            1.0
        } else {
            libm_down(self.lo.exp()).max(0.0)
        };
        let hi = if self.hi == 0.0 { 1.0 } else { libm_up(self.hi.exp()) };
        Interval::new(lo, hi)
    }

    pub fn sin(&self) -> Interval {
        if self.lo == 0.0 && self.hi == 0.0 {
            return Interval::ZERO;
        }
        // sin attains +1 at pi/2 + 2k*pi and -1 at 3pi/2 + 2k*pi, i.e. at
        // (m + 1/2)*pi for even (max) or odd (min) m.
        trig_range(self, 0.5, |x| x.sin())
    }

    pub fn cos(&self) -> Interval {
        if self.lo == 0.0 && self.hi == 0.0 {
            return Interval::ONE;
        }
        // cos attains +1 at 2k*pi and -1 at (2k+1)*pi.
        trig_range(self, 0.0, |x| x.cos())
    }

    /// Integer power `self^n` for `n >= 0`.
    pub fn powi(&self, n: u32) -> Interval {
        match n {
            0 => Interval::ONE,
            1 => *self,
            2 => self.sqr(),
            _ => {
                let even = n.is_multiple_of(2);
                if self.lo >= 0.0 {
                    Interval::new(pow_down(self.lo, n), pow_up(self.hi, n))
                } else if self.hi <= 0.0 {
                    let a = -*self;
                    let p = Interval::new(pow_down(a.lo, n), pow_up(a.hi, n));
                    if even {
                        p
                    } else {
                        -p
                    }
                } else if even {
                    Interval::new(0.0, pow_up(self.mag(), n))
                } else {
                    Interval::new(-pow_up(-self.lo, n), pow_up(self.hi, n))
                }
            }
        }
    }
}

fn pow_down(x: f64, n: u32) -> f64 {
    debug_assert!(x >= 0.0);
    let mut r = 1.0;
    for _ in 0..n {
        r = mul_down(r, x);
    }
    r
}

fn pow_up(x: f64, n: u32) -> f64 {
    debug_assert!(x >= 0.0);
    let mut r = 1.0;
    for _ in 0..n {
        r = mul_up(r, x);
    }
    r
}

/// Range of a sine-like function whose extrema sit at `(m + offset) * pi`,
/// with a maximum for even `m` and a minimum for odd `m`.
fn trig_range(x: &Interval, offset: f64, f: impl Fn(f64) -> f64) -> Interval {
    if !x.is_finite() || x.width() >= 7.0 {
        return Interval::new(-1.0, 1.0);
    }
    let a = f(x.lo);
    let b = f(x.hi);
    let mut lo = libm_down(a.min(b)).max(-1.0);
    let mut hi = libm_up(a.max(b)).min(1.0);
    // Candidate extremum indices, padded by one on each side; each candidate
    // is tested against an enclosure of (m + offset) * pi.
    let m_lo = (x.lo / std::f64::consts::PI - offset).floor() as i64 - 1;
    let m_hi = (x.hi / std::f64::consts::PI - offset).ceil() as i64 + 1;
    for m in m_lo..=m_hi {
        let c = Interval::point(m as f64 + offset) * Interval::PI;
        if c.intersects(x) {
            if m.rem_euclid(2) == 0 {
                hi = 1.0;
            } else {
                lo = -1.0;
            }
        }
    }
    Interval::new(lo, hi)
}
