//! Decimal literals as tight machine-interval enclosures, and exact decimal
//! printing of binary64 values.

use std::cmp::Ordering;

use crate::interval::Interval;

/// Sign, significant digits (no leading or trailing zeros) and the decimal
/// exponent of the first digit: value = 0.d1d2... × 10^exp.
#[derive(Debug, PartialEq, Eq)]
struct Decimal {
    negative: bool,
    digits: Vec<u8>,
    exp: i64,
}

impl Decimal {
    fn parse(text: &str) -> Option<Decimal> {
        let (negative, body) = match text.as_bytes().first()? {
            b'-' => (true, &text[1..]),
            b'+' => (false, &text[1..]),
            _ => (false, text),
        };
        let (mantissa, exp10) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i64>().ok()?),
            None => (body, 0),
        };
        let (int_part, frac_part) = match mantissa.find('.') {
            Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return None;
        }
        let all: Vec<u8> = int_part.bytes().chain(frac_part.bytes()).map(|b| b - b'0').collect();
        let lead = all.iter().take_while(|&&d| d == 0).count();
        if lead == all.len() {
            return Some(Decimal {
                negative: false,
                digits: Vec::new(),
                exp: 0,
            });
        }
        let mut digits = all[lead..].to_vec();
        while digits.last() == Some(&0) {
            digits.pop();
        }
        let exp = int_part.len() as i64 - lead as i64 + exp10;
        Some(Decimal { negative, digits, exp })
    }

    fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Compares magnitudes.
    fn cmp_abs(&self, other: &Decimal) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        self.exp.cmp(&other.exp).then_with(|| self.digits.cmp(&other.digits))
    }
}

/// Exact decimal expansion of a finite binary64 value.
pub fn format_exact(x: f64) -> String {
    debug_assert!(x.is_finite());
    let shortest = format!("{x:?}");
    if shortest.parse::<f64>().ok() == Some(x) && is_exact(&shortest, x) {
        return shortest.strip_suffix(".0").map(str::to_owned).unwrap_or(shortest);
    }
    // 767 significant digits always suffice for a binary64 value.
    let long = format!("{x:.800e}");
    let (mant, exp) = long.split_once('e').expect("exponent marker");
    let mant = if mant.contains('.') {
        mant.trim_end_matches('0').trim_end_matches('.')
    } else {
        mant
    };
    format!("{mant}e{exp}")
}

fn exact_decimal_of(x: f64) -> Decimal {
    let long = format!("{x:.800e}");
    Decimal::parse(&long).expect("formatted float is a decimal")
}

fn is_exact(text: &str, x: f64) -> bool {
    match Decimal::parse(text) {
        Some(d) => {
            let e = exact_decimal_of(x);
            (d.is_zero() && e.is_zero()) || d == e
        }
        None => false,
    }
}

/// The tightest machine interval containing the real number written as
/// `text`. Exactly representable literals yield point intervals.
pub fn parse_decimal(text: &str) -> Option<Interval> {
    let dec = Decimal::parse(text)?;
    let nearest: f64 = text.parse().ok()?;
    if !nearest.is_finite() {
        return None;
    }
    let exact = exact_decimal_of(nearest);
    if dec.is_zero() {
        return Some(Interval::ZERO);
    }
    // Compare the literal with the nearest double.
    let ord = if dec.negative != (nearest < 0.0) && !exact.is_zero() {
        // Rounded across zero is impossible for finite literals.
        Ordering::Equal
    } else {
        let mag = dec.cmp_abs(&exact);
        if dec.negative {
            mag.reverse()
        } else {
            mag
        }
    };
    Some(match ord {
        Ordering::Equal => Interval::point(nearest),
        Ordering::Greater => Interval::new(nearest, nearest.next_up()),
        Ordering::Less => Interval::new(nearest.next_down(), nearest),
    })
}

/// A literal that [`parse_decimal`] maps back to `iv`, when one exists.
pub fn format_enclosed(iv: &Interval) -> String {
    if iv.is_point() {
        return format_exact(iv.lo());
    }
    for candidate in [iv.lo(), iv.hi()] {
        let s = format!("{candidate:?}");
        if parse_decimal(&s).as_ref() == Some(iv) {
            return s;
        }
    }
    format!("{:?}", iv.mid())
}

/// A short literal whose enclosure has lower bound exactly `x`.
pub fn format_lower(x: f64) -> String {
    format_bound(x, x.next_up(), Interval::lo)
}

/// A short literal whose enclosure has upper bound exactly `x`.
pub fn format_upper(x: f64) -> String {
    format_bound(x, x.next_down(), Interval::hi)
}

fn format_bound(x: f64, neighbour: f64, side: fn(&Interval) -> f64) -> String {
    for candidate in [x, neighbour] {
        if !candidate.is_finite() {
            continue;
        }
        let s = format!("{candidate:?}");
        let s = s.strip_suffix(".0").map(str::to_owned).unwrap_or(s);
        if parse_decimal(&s).map(|iv| side(&iv)) == Some(x) {
            return s;
        }
    }
    format_exact(x)
}
