//! Signal temporal logic formulas over strict atoms `f(u, x) < 0`.

mod parser;

use std::fmt;

use crate::interval::Interval;
use crate::model::numeric::format_enclosed;
use crate::model::{Expr, Scope};

pub use parser::parse_formula;

/// Bound `[lo, hi]` of an until operator. Each endpoint is the tightest
/// machine enclosure of the rational literal it was written as.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBound {
    lo: Interval,
    hi: Interval,
}

impl TimeBound {
    /// Returns `None` unless `0 <= lo <= hi` is possible for the enclosed values.
    pub fn new(lo: Interval, hi: Interval) -> Option<Self> {
        if lo.lo() < 0.0 || lo.lo() > hi.hi() {
            return None;
        }
        Some(TimeBound { lo, hi })
    }

    /// Exact bound from machine numbers.
    pub fn from_f64(lo: f64, hi: f64) -> Option<Self> {
        TimeBound::new(Interval::point(lo), Interval::point(hi))
    }

    pub fn lo(&self) -> Interval {
        self.lo
    }

    pub fn hi(&self) -> Interval {
        self.hi
    }
}

impl fmt::Display for TimeBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", format_enclosed(&self.lo), format_enclosed(&self.hi))
    }
}

/// Core syntax after desugaring: `true`, atoms, disjunction, negation and
/// bounded until.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    /// Holds where `f < 0`.
    Atom(Expr),
    Or(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Until(TimeBound, Box<Formula>, Box<Formula>),
}

#[allow(clippy::should_implement_trait)]
impl Formula {
    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// `a & b` as `!(!a | !b)`.
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::or(Formula::not(a), Formula::not(b)))
    }

    /// `a -> b` as `!a | b`.
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::not(a), b)
    }

    pub fn until(t: TimeBound, a: Formula, b: Formula) -> Formula {
        Formula::Until(t, Box::new(a), Box::new(b))
    }

    /// `F_t a` as `true U_t a`.
    pub fn eventually(t: TimeBound, a: Formula) -> Formula {
        Formula::until(t, Formula::True, a)
    }

    /// `G_t a` as `!F_t !a`.
    pub fn always(t: TimeBound, a: Formula) -> Formula {
        Formula::not(Formula::eventually(t, Formula::not(a)))
    }

    /// Length of signal prefix that determines the truth value at time 0:
    /// zero for atoms, the maximum over operands, plus `t̄` for until.
    /// Rounded upward.
    pub fn necessary_length(&self) -> f64 {
        match self {
            Formula::True | Formula::Atom(_) => 0.0,
            Formula::Not(a) => a.necessary_length(),
            Formula::Or(a, b) => a.necessary_length().max(b.necessary_length()),
            Formula::Until(t, a, b) => {
                let m = a.necessary_length().max(b.necessary_length());
                (Interval::point(m) + t.hi).hi()
            }
        }
    }

    /// Distinct atom expressions in left-to-right order of first occurrence.
    pub fn atoms(&self) -> Vec<Expr> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut Vec<Expr>) {
        match self {
            Formula::True => {}
            Formula::Atom(e) => {
                if !out.contains(e) {
                    out.push(e.clone());
                }
            }
            Formula::Not(a) => a.collect_atoms(out),
            Formula::Or(a, b) | Formula::Until(_, a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Number of operators and atoms in the tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::Atom(_) => 1,
            Formula::Not(a) => 1 + a.size(),
            Formula::Or(a, b) | Formula::Until(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Fully parenthesized rendering that [`parse_formula`] reads back to
    /// the same tree.
    pub fn display<'a>(&'a self, scope: &'a Scope) -> DisplayFormula<'a> {
        DisplayFormula { formula: self, scope }
    }
}

pub struct DisplayFormula<'a> {
    formula: &'a Formula,
    scope: &'a Scope,
}

impl DisplayFormula<'_> {
    fn sub<'b>(&'b self, g: &'b Formula) -> DisplayFormula<'b> {
        DisplayFormula {
            formula: g,
            scope: self.scope,
        }
    }
}

impl fmt::Display for DisplayFormula<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |g| self.sub(g);
        match self.formula {
            Formula::True => write!(f, "true"),
            Formula::Atom(e) => write!(f, "({} < 0)", e.display(&self.scope.params, &self.scope.vars)),
            Formula::Not(a) => write!(f, "!{}", sub(a)),
            Formula::Or(a, b) => write!(f, "({} | {})", sub(a), sub(b)),
            Formula::Until(t, a, b) => write!(f, "({} U{} {})", sub(a), t, sub(b)),
        }
    }
}
