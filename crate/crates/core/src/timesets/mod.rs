//! Approximated sets of consistent time intervals.
//!
//! A set of time intervals on which a formula holds is represented by
//! enclosures of its interval endpoints. Each [`Bound`] encloses one endpoint
//! and records whether it opens (`polarity == true`) or closes the interval.
//! In canonical form the bounds are sorted, pairwise disjoint, alternate in
//! polarity and start with an opening bound, so the sequence describes both
//! an inner approximation (from the upper end of each opening enclosure to
//! the lower end of the next closing one) and an outer approximation.

use std::fmt;

use serde::ser::{Serialize, SerializeStruct, Serializer};
use thiserror::Error;

use crate::interval::Interval;
use crate::stl::TimeBound;

/// Enclosure `s` of one endpoint of a consistent time interval.
#[derive(Clone, Copy, PartialEq)]
pub struct Bound {
    pub s: Interval,
    /// `true` for a lower (opening) endpoint, `false` for an upper one.
    pub polarity: bool,
}

impl Bound {
    pub fn lower(s: Interval) -> Bound {
        Bound { s, polarity: true }
    }

    pub fn upper(s: Interval) -> Bound {
        Bound { s, polarity: false }
    }
}

impl fmt::Debug for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {})", self.s, if self.polarity { "T" } else { "F" })
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Bound", 3)?;
        st.serialize_field("lo", &self.s.lo())?;
        st.serialize_field("hi", &self.s.hi())?;
        st.serialize_field("polarity", &self.polarity)?;
        st.end()
    }
}

/// A canonical approximated set.
#[derive(Clone, PartialEq)]
pub enum ApproxSet {
    /// Holds from time 0 on; stands for `{([0], true)}`.
    Universe,
    /// Holds nowhere.
    Empty,
    /// Canonical non-trivial sequence.
    Seq(Vec<Bound>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AmbiguityError {
    #[error("upper bound enclosure {0:?} straddles time 0")]
    UpperStraddlesZero(Interval),
    #[error("bound enclosures {0:?} and {1:?} of opposite polarity overlap")]
    Overlap(Bound, Bound),
    #[error("bounds do not describe a union of time intervals")]
    Malformed,
}

/// Canonicity conditions: sorted and disjoint, upper ends non-negative,
/// alternating polarity, starting with a lower bound.
pub fn is_canonical(bounds: &[Bound]) -> bool {
    bounds.first().is_none_or(|b| b.polarity)
        && bounds.iter().all(|b| b.s.hi() >= 0.0)
        && bounds
            .windows(2)
            .all(|w| w[0].s.hi() < w[1].s.lo() && w[0].polarity != w[1].polarity)
}

impl ApproxSet {
    /// Wraps an explicit bound list, returning `None` unless it is canonical.
    /// `[([0], true)]` becomes [`ApproxSet::Universe`] and `[]` becomes
    /// [`ApproxSet::Empty`].
    pub fn from_bounds(bounds: Vec<Bound>) -> Option<ApproxSet> {
        if !is_canonical(&bounds) {
            return None;
        }
        Some(Self::canonical(bounds))
    }

    fn canonical(bounds: Vec<Bound>) -> ApproxSet {
        match bounds.as_slice() {
            [] => ApproxSet::Empty,
            [b] if b.polarity && b.s == Interval::ZERO => ApproxSet::Universe,
            _ => ApproxSet::Seq(bounds),
        }
    }

    /// The bound list, with Universe written as `[([0], true)]`.
    pub fn bounds(&self) -> Vec<Bound> {
        match self {
            ApproxSet::Universe => vec![Bound::lower(Interval::ZERO)],
            ApproxSet::Empty => Vec::new(),
            ApproxSet::Seq(v) => v.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ApproxSet::Universe => 1,
            ApproxSet::Empty => 0,
            ApproxSet::Seq(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, ApproxSet::Empty)
    }

    /// Earliest bound of a non-trivial set; a lower bound by canonicity.
    ///
    /// Panics on Universe and Empty.
    pub fn first_element(&self) -> Bound {
        match self {
            ApproxSet::Seq(v) => v[0],
            _ => panic!("first_element needs a non-trivial set"),
        }
    }

    /// Complement within `[0, ∞)`.
    pub fn invert(&self) -> Result<ApproxSet, AmbiguityError> {
        match self {
            ApproxSet::Universe => Ok(ApproxSet::Empty),
            ApproxSet::Empty => Ok(ApproxSet::Universe),
            ApproxSet::Seq(v) => normalize(
                v.iter()
                    .map(|b| Bound {
                        s: b.s,
                        polarity: !b.polarity,
                    })
                    .collect(),
            ),
        }
    }

    /// Union.
    pub fn join(&self, other: &ApproxSet) -> Result<ApproxSet, AmbiguityError> {
        match (self, other) {
            (ApproxSet::Universe, _) | (_, ApproxSet::Universe) => Ok(ApproxSet::Universe),
            (ApproxSet::Empty, t) | (t, ApproxSet::Empty) => Ok(t.clone()),
            (ApproxSet::Seq(a), ApproxSet::Seq(b)) => normalize(a.iter().chain(b).copied().collect()),
        }
    }

    /// Intersection, computed as `!(!a | !b)`.
    pub fn intersect(&self, other: &ApproxSet) -> Result<ApproxSet, AmbiguityError> {
        self.invert()?.join(&other.invert()?)?.invert()
    }

    /// Consistent intervals of `a U_t b` given those of `a` (`self`) and `b`.
    ///
    /// For every pair of intervals the overlap with the interval of `a` is
    /// shifted back by `t`: opening enclosures by `t̄`, closing ones by `t̲`,
    /// and the result is restricted to the interval of `a`.
    pub fn shift_all(&self, t: &TimeBound, other: &ApproxSet) -> Result<ApproxSet, AmbiguityError> {
        if self.is_empty() || other.is_empty() {
            return Ok(ApproxSet::Empty);
        }
        let mut raw: Vec<Bound> = Vec::new();
        let mut push = |set: ApproxSet| -> bool {
            match set {
                ApproxSet::Universe => return true,
                ApproxSet::Empty => {}
                ApproxSet::Seq(v) => raw.extend(v),
            }
            false
        };
        match (self, other) {
            (ApproxSet::Universe, t2) => {
                for p2 in pairs(t2) {
                    if push(shift_elem(t, &p2)?) {
                        return Ok(ApproxSet::Universe);
                    }
                }
            }
            (t1, ApproxSet::Universe) => {
                for p1 in pairs(t1) {
                    let p1_set = p1.to_set()?;
                    if push(shift_elem(t, &p1)?.intersect(&p1_set)?) {
                        return Ok(ApproxSet::Universe);
                    }
                }
            }
            (t1, t2) => {
                let p2s = pairs(t2);
                for p1 in pairs(t1) {
                    let p1_set = p1.to_set()?;
                    for p2 in &p2s {
                        // Pairs whose outer approximations are disjoint meet nowhere.
                        if !p1.outer_meets(p2) {
                            continue;
                        }
                        let meet = p1_set.intersect(&p2.to_set()?)?;
                        let shifted = match meet {
                            ApproxSet::Empty => continue,
                            m => shift_set(t, &m)?,
                        };
                        if push(shifted.intersect(&p1_set)?) {
                            return Ok(ApproxSet::Universe);
                        }
                    }
                }
            }
        }
        normalize(raw)
    }
}

impl fmt::Debug for ApproxSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApproxSet::Universe => write!(f, "Universe"),
            ApproxSet::Empty => write!(f, "Empty"),
            ApproxSet::Seq(v) => f.debug_set().entries(v).finish(),
        }
    }
}

impl Serialize for ApproxSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.bounds().serialize(serializer)
    }
}

/// One consistent interval: an opening enclosure and, unless the interval
/// extends past every known bound, a closing one.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Pair {
    lower: Interval,
    upper: Option<Interval>,
}

impl Pair {
    fn to_set(self) -> Result<ApproxSet, AmbiguityError> {
        let mut v = vec![Bound::lower(self.lower)];
        if let Some(u) = self.upper {
            v.push(Bound::upper(u));
        }
        normalize(v)
    }

    fn outer_meets(&self, other: &Pair) -> bool {
        let end = |p: &Pair| p.upper.map_or(f64::INFINITY, |u| u.hi());
        self.lower.lo() <= end(other) && other.lower.lo() <= end(self)
    }
}

fn pairs(t: &ApproxSet) -> Vec<Pair> {
    match t {
        ApproxSet::Empty => Vec::new(),
        ApproxSet::Universe => vec![Pair {
            lower: Interval::ZERO,
            upper: None,
        }],
        ApproxSet::Seq(v) => v
            .chunks(2)
            .map(|c| Pair {
                lower: c[0].s,
                upper: c.get(1).map(|b| b.s),
            })
            .collect(),
    }
}

fn shift_bound(t: &TimeBound, b: &Bound) -> Bound {
    Bound {
        s: if b.polarity { b.s - t.hi() } else { b.s - t.lo() },
        polarity: b.polarity,
    }
}

fn shift_elem(t: &TimeBound, p: &Pair) -> Result<ApproxSet, AmbiguityError> {
    let mut v = vec![shift_bound(t, &Bound::lower(p.lower))];
    if let Some(u) = p.upper {
        v.push(shift_bound(t, &Bound::upper(u)));
    }
    normalize(v)
}

fn shift_set(t: &TimeBound, set: &ApproxSet) -> Result<ApproxSet, AmbiguityError> {
    match set {
        ApproxSet::Universe | ApproxSet::Empty => Ok(set.clone()),
        ApproxSet::Seq(v) => normalize(v.iter().map(|b| shift_bound(t, b)).collect()),
    }
}

/// Canonicalizes a raw multiset of bound enclosures describing a union of
/// time intervals.
///
/// Fails when a closing enclosure straddles 0 (other than `[0]` itself) or
/// when enclosures of opposite polarity overlap: the order of the two
/// endpoints is then undecidable. Otherwise
///
/// 1. bounds hidden inside the union are removed: a group of mutually
///    overlapping opening bounds is kept iff the coverage depth before it is
///    at most 0; a group of `k` closing bounds is kept iff the depth before it
///    minus `k` is at most 0;
/// 2. bounds entirely at or before time 0 are removed, or the result is the
///    universe when the last group opens at or before 0;
/// 3. each group is merged into the hull of its members;
/// 4. an opening `[0]` is prepended when the first bound closes.
pub fn normalize(mut raw: Vec<Bound>) -> Result<ApproxSet, AmbiguityError> {
    for b in &raw {
        if !b.polarity && b.s != Interval::ZERO && b.s.contains_zero() {
            return Err(AmbiguityError::UpperStraddlesZero(b.s));
        }
    }
    raw.sort_by(|a, b| a.s.lo().total_cmp(&b.s.lo()).then(a.s.hi().total_cmp(&b.s.hi())));
    // Opposite polarities must not overlap.
    let mut reach: [Option<Bound>; 2] = [None, None];
    for b in &raw {
        if let Some(o) = reach[usize::from(!b.polarity)] {
            if o.s.hi() >= b.s.lo() {
                return Err(AmbiguityError::Overlap(o, *b));
            }
        }
        let slot = &mut reach[usize::from(b.polarity)];
        if slot.is_none_or(|o| b.s.hi() > o.s.hi()) {
            *slot = Some(*b);
        }
    }

    // Groups of overlapping same-polarity bounds are contiguous once sorted.
    let mut groups: Vec<Vec<Bound>> = Vec::new();
    let mut group_hi = f64::NEG_INFINITY;
    for b in raw {
        match groups.last_mut() {
            Some(g) if g[0].polarity == b.polarity && b.s.lo() <= group_hi => {
                group_hi = group_hi.max(b.s.hi());
                g.push(b);
            }
            _ => {
                group_hi = b.s.hi();
                groups.push(vec![b]);
            }
        }
    }

    // Hidden bounds.
    let mut depth: i64 = 0;
    let mut kept: Vec<Vec<Bound>> = Vec::new();
    for g in groups {
        let k = g.len() as i64;
        let keep = if g[0].polarity { depth <= 0 } else { depth - k <= 0 };
        depth += if g[0].polarity { k } else { -k };
        if keep {
            kept.push(g);
        }
    }

    // Bounds at or before time 0.
    if let Some(last) = kept.last() {
        if last[0].polarity && last.iter().all(|b| b.s.hi() <= 0.0) {
            return Ok(ApproxSet::Universe);
        }
    }
    let merged: Vec<Bound> = kept
        .into_iter()
        .filter_map(|g| {
            let polarity = g[0].polarity;
            g.into_iter()
                .filter(|b| b.s.hi() > 0.0)
                .map(|b| b.s)
                .reduce(|a, b| a.hull(&b))
                .map(|s| Bound { s, polarity })
        })
        .collect();

    let mut out = Vec::with_capacity(merged.len() + 1);
    if merged.first().is_some_and(|b| !b.polarity) {
        out.push(Bound::lower(Interval::ZERO));
    }
    out.extend(merged);
    if !is_canonical(&out) {
        return Err(AmbiguityError::Malformed);
    }
    Ok(ApproxSet::canonical(out))
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    fn set(items: &[(f64, f64, bool)]) -> ApproxSet {
        ApproxSet::from_bounds(
            items
                .iter()
                .map(|&(lo, hi, p)| Bound {
                    s: iv(lo, hi),
                    polarity: p,
                })
                .collect(),
        )
        .expect("canonical test input")
    }

    fn raw(items: &[(f64, f64, bool)]) -> Vec<Bound> {
        items
            .iter()
            .map(|&(lo, hi, p)| Bound {
                s: iv(lo, hi),
                polarity: p,
            })
            .collect()
    }

    fn tb(lo: f64, hi: f64) -> TimeBound {
        TimeBound::from_f64(lo, hi).unwrap()
    }

    #[test]
    fn invert_cases() {
        assert_eq!(ApproxSet::Universe.invert().unwrap(), ApproxSet::Empty);
        assert_eq!(ApproxSet::Empty.invert().unwrap(), ApproxSet::Universe);
        let t = set(&[(1.57, 1.58, true), (4.71, 4.72, false)]);
        assert_eq!(
            t.invert().unwrap(),
            set(&[(0.0, 0.0, true), (1.57, 1.58, false), (4.71, 4.72, true)])
        );
        assert_eq!(t.invert().unwrap().invert().unwrap(), t);
    }

    #[test]
    fn join_cases() {
        let t = set(&[(1.0, 1.1, true), (3.0, 3.1, false)]);
        assert_eq!(t.join(&ApproxSet::Empty).unwrap(), t);
        assert_eq!(t.join(&ApproxSet::Universe).unwrap(), ApproxSet::Universe);
        assert_eq!(t.join(&t).unwrap(), t);
        // An opening bound inside an interval already covered is hidden.
        let a = set(&[(1.0, 1.1, true)]);
        let b = set(&[(2.0, 2.1, true), (3.0, 3.1, false)]);
        assert_eq!(a.join(&b).unwrap(), a);
        let a = set(&[(1.0, 1.1, true), (5.0, 5.1, false)]);
        assert_eq!(a.join(&b).unwrap(), a);
        let c = set(&[(4.0, 4.1, true), (6.0, 6.1, false)]);
        assert_eq!(a.join(&c).unwrap(), set(&[(1.0, 1.1, true), (6.0, 6.1, false)]));
        // Overlapping opposite bounds are ambiguous.
        let a = set(&[(0.0, 0.0, true), (0.95, 1.1, false)]);
        let b = set(&[(0.9, 1.05, true)]);
        assert!(matches!(a.join(&b), Err(AmbiguityError::Overlap(..))));
    }

    #[test]
    fn intersect_cases() {
        let cos = set(&[(1.57, 1.58, true), (4.71, 4.72, false)]);
        let sin = set(&[(3.14, 3.15, true), (6.28, 6.29, false)]);
        assert_eq!(
            cos.intersect(&sin).unwrap(),
            set(&[(3.14, 3.15, true), (4.71, 4.72, false)])
        );
        assert_eq!(cos.intersect(&ApproxSet::Universe).unwrap(), cos);
        assert_eq!(cos.intersect(&ApproxSet::Empty).unwrap(), ApproxSet::Empty);
    }

    #[test]
    fn shift_all_cases() {
        let b = set(&[(3.14, 3.15, true), (4.71, 4.72, false)]);
        let t = tb(0.0, 6.284);
        assert_eq!(
            ApproxSet::Universe.shift_all(&t, &b).unwrap(),
            set(&[(0.0, 0.0, true), (4.71, 4.72, false)])
        );
        assert_eq!(ApproxSet::Empty.shift_all(&t, &b).unwrap(), ApproxSet::Empty);
        assert_eq!(b.shift_all(&t, &ApproxSet::Empty).unwrap(), ApproxSet::Empty);
        let b = set(&[(5.0, 5.0, true), (6.0, 6.0, false)]);
        assert_eq!(
            ApproxSet::Universe.shift_all(&tb(2.0, 3.0), &b).unwrap(),
            set(&[(2.0, 2.0, true), (4.0, 4.0, false)])
        );
        // The left operand must hold up to the witness.
        let a = set(&[(0.0, 0.0, true), (3.0, 3.0, false)]);
        assert_eq!(a.shift_all(&tb(2.0, 3.0), &b).unwrap(), ApproxSet::Empty);
        let a = set(&[(0.0, 0.0, true), (5.5, 5.5, false)]);
        assert_eq!(
            a.shift_all(&tb(2.0, 3.0), &b).unwrap(),
            set(&[(2.0, 2.0, true), (3.5, 3.5, false)])
        );
        assert_eq!(
            a.shift_all(&tb(2.0, 3.0), &ApproxSet::Universe).unwrap(),
            set(&[(0.0, 0.0, true), (3.5, 3.5, false)])
        );
    }

    #[test]
    fn normalize_cases() {
        assert_eq!(
            normalize(raw(&[(1.57, 1.58, false), (4.71, 4.72, true)])).unwrap(),
            set(&[(0.0, 0.0, true), (1.57, 1.58, false), (4.71, 4.72, true)])
        );
        assert_eq!(
            normalize(raw(&[(-3.15, -3.13, true), (4.71, 4.72, false)])).unwrap(),
            set(&[(0.0, 0.0, true), (4.71, 4.72, false)])
        );
        assert!(normalize(raw(&[(0.0, 0.0, true), (0.95, 1.1, false), (0.9, 1.05, true)])).is_err());
        assert!(matches!(
            normalize(raw(&[(-0.1, 0.1, false)])),
            Err(AmbiguityError::UpperStraddlesZero(_))
        ));
        assert_eq!(normalize(raw(&[(-2.0, -1.0, true)])).unwrap(), ApproxSet::Universe);
        assert_eq!(
            normalize(raw(&[(-2.0, -1.0, true), (-0.5, -0.2, false)])).unwrap(),
            ApproxSet::Empty
        );
        assert_eq!(normalize(vec![]).unwrap(), ApproxSet::Empty);
        assert_eq!(
            normalize(raw(&[
                (1.0, 2.0, true),
                (1.5, 3.0, true),
                (4.0, 4.0, false),
                (5.0, 5.0, false)
            ]))
            .unwrap(),
            set(&[(1.0, 3.0, true), (5.0, 5.0, false)])
        );
        assert_eq!(
            normalize(raw(&[(1.0, 1.0, false), (2.0, 2.0, false)])),
            Err(AmbiguityError::Malformed)
        );
    }

    #[test]
    fn first_element_and_json() {
        let t = set(&[(0.0, 0.0, true), (4.71, 4.72, false)]);
        assert_eq!(t.first_element(), Bound::lower(Interval::ZERO));
        assert_eq!(set(&[(0.5, 1.0, true)]).first_element(), Bound::lower(iv(0.5, 1.0)));
        assert_eq!(
            ApproxSet::from_bounds(vec![Bound::lower(Interval::ZERO)]),
            Some(ApproxSet::Universe)
        );
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(
            json,
            r#"[{"lo":0.0,"hi":0.0,"polarity":true},{"lo":4.71,"hi":4.72,"polarity":false}]"#
        );
    }
}
