//! Expression trees over parameters and state variables.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::numeric::format_enclosed;
use crate::interval::{Interval, IntervalBox};

/// Closed operation set: constants, parameter and variable references,
/// `+ - * /`, integer powers, `sin`, `cos` and `exp`.
///
/// References are positional; names live in a [`Scope`](super::Scope).
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    /// A constant, stored as an enclosure of the literal it came from.
    Const(Interval),
    Param(usize),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("expression refers to {kind} #{index}, but only {available} are bound")]
    Unbound {
        kind: &'static str,
        index: usize,
        available: usize,
    },
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn constant(x: f64) -> Expr {
        Expr::Const(Interval::point(x))
    }

    fn as_point(&self) -> Option<f64> {
        match self {
            Expr::Const(c) if c.is_point() => Some(c.lo()),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        self.as_point() == Some(0.0)
    }

    fn is_one(&self) -> bool {
        self.as_point() == Some(1.0)
    }

    // Smart constructors performing only exact simplifications.

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            a => Expr::Neg(Box::new(a)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_point(), b.as_point()) {
            let s = Interval::point(x) + Interval::point(y);
            if s.is_point() {
                return Expr::Const(s);
            }
        }
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return Expr::neg(b);
        }
        if let (Some(x), Some(y)) = (a.as_point(), b.as_point()) {
            let s = Interval::point(x) - Interval::point(y);
            if s.is_point() {
                return Expr::Const(s);
            }
        }
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            return Expr::constant(0.0);
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        if a.as_point() == Some(-1.0) {
            return Expr::neg(b);
        }
        if b.as_point() == Some(-1.0) {
            return Expr::neg(a);
        }
        if let (Some(x), Some(y)) = (a.as_point(), b.as_point()) {
            let p = Interval::point(x) * Interval::point(y);
            if p.is_point() {
                return Expr::Const(p);
            }
        }
        // Keep constants on the left: 2 * (x - 10).
        if b.as_point().is_some() && a.as_point().is_none() {
            return Expr::Mul(Box::new(b), Box::new(a));
        }
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return Expr::constant(0.0);
        }
        if b.is_one() {
            return a;
        }
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, n: i32) -> Expr {
        match n {
            0 => Expr::constant(1.0),
            1 => a,
            _ => Expr::Pow(Box::new(a), n),
        }
    }

    pub fn sin(a: Expr) -> Expr {
        Expr::Sin(Box::new(a))
    }

    pub fn cos(a: Expr) -> Expr {
        Expr::Cos(Box::new(a))
    }

    pub fn exp(a: Expr) -> Expr {
        Expr::Exp(Box::new(a))
    }

    /// Symbolic partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> Expr {
        match self {
            Expr::Const(_) | Expr::Param(_) => Expr::constant(0.0),
            Expr::Var(j) => Expr::constant(if *j == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => Expr::neg(a.derivative(var)),
            Expr::Add(a, b) => Expr::add(a.derivative(var), b.derivative(var)),
            Expr::Sub(a, b) => Expr::sub(a.derivative(var), b.derivative(var)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.derivative(var), (**b).clone()),
                Expr::mul((**a).clone(), b.derivative(var)),
            ),
            Expr::Div(a, b) => {
                let da = a.derivative(var);
                let db = b.derivative(var);
                if db.is_zero() {
                    Expr::div(da, (**b).clone())
                } else {
                    Expr::div(
                        Expr::sub(Expr::mul(da, (**b).clone()), Expr::mul((**a).clone(), db)),
                        Expr::pow((**b).clone(), 2),
                    )
                }
            }
            Expr::Pow(a, n) => Expr::mul(
                Expr::mul(Expr::constant(*n as f64), Expr::pow((**a).clone(), n - 1)),
                a.derivative(var),
            ),
            Expr::Sin(a) => Expr::mul(Expr::cos((**a).clone()), a.derivative(var)),
            Expr::Cos(a) => Expr::mul(Expr::neg(Expr::sin((**a).clone())), a.derivative(var)),
            Expr::Exp(a) => Expr::mul(Expr::exp((**a).clone()), a.derivative(var)),
        }
    }

    /// Symbolic gradient with respect to the first `n_vars` state variables.
    pub fn gradient(&self, n_vars: usize) -> Vec<Expr> {
        (0..n_vars).map(|i| self.derivative(i)).collect()
    }

    /// Natural interval extension over parameter box `u` and state box `x`.
    pub fn eval_box(&self, u: &IntervalBox, x: &IntervalBox) -> Result<Interval, EvalError> {
        self.eval_slices(u.as_slice(), x.as_slice())
    }

    pub(crate) fn eval_slices(&self, u: &[Interval], x: &[Interval]) -> Result<Interval, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Param(i) => *u.get(*i).ok_or(EvalError::Unbound {
                kind: "parameter",
                index: *i,
                available: u.len(),
            })?,
            Expr::Var(i) => *x.get(*i).ok_or(EvalError::Unbound {
                kind: "variable",
                index: *i,
                available: x.len(),
            })?,
            Expr::Neg(a) => -a.eval_slices(u, x)?,
            Expr::Add(a, b) => a.eval_slices(u, x)? + b.eval_slices(u, x)?,
            Expr::Sub(a, b) => a.eval_slices(u, x)? - b.eval_slices(u, x)?,
            Expr::Mul(a, b) => a.eval_slices(u, x)? * b.eval_slices(u, x)?,
            Expr::Div(a, b) => a
                .eval_slices(u, x)?
                .checked_div(&b.eval_slices(u, x)?)
                .ok_or(EvalError::DivisionByZero)?,
            Expr::Pow(a, n) => {
                let base = a.eval_slices(u, x)?;
                if *n >= 0 {
                    base.powi(*n as u32)
                } else {
                    Interval::ONE
                        .checked_div(&base.powi(n.unsigned_abs()))
                        .ok_or(EvalError::DivisionByZero)?
                }
            }
            Expr::Sin(a) => a.eval_slices(u, x)?.sin(),
            Expr::Cos(a) => a.eval_slices(u, x)?.cos(),
            Expr::Exp(a) => a.eval_slices(u, x)?.exp(),
        })
    }

    /// Plain floating-point evaluation (no rounding control); constants use
    /// their midpoints.
    pub fn eval_f64(&self, u: &[f64], x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => c.mid(),
            Expr::Param(i) => u[*i],
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval_f64(u, x),
            Expr::Add(a, b) => a.eval_f64(u, x) + b.eval_f64(u, x),
            Expr::Sub(a, b) => a.eval_f64(u, x) - b.eval_f64(u, x),
            Expr::Mul(a, b) => a.eval_f64(u, x) * b.eval_f64(u, x),
            Expr::Div(a, b) => a.eval_f64(u, x) / b.eval_f64(u, x),
            Expr::Pow(a, n) => a.eval_f64(u, x).powi(*n),
            Expr::Sin(a) => a.eval_f64(u, x).sin(),
            Expr::Cos(a) => a.eval_f64(u, x).cos(),
            Expr::Exp(a) => a.eval_f64(u, x).exp(),
        }
    }

    /// Visits every sub-expression in pre-order.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Param(_) | Expr::Var(_) => {}
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => a.visit(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Largest parameter and variable index referenced, if any.
    pub fn max_refs(&self) -> (Option<usize>, Option<usize>) {
        let (mut p, mut v) = (None, None);
        self.visit(&mut |e| match e {
            Expr::Param(i) => p = p.max(Some(*i)),
            Expr::Var(i) => v = v.max(Some(*i)),
            _ => {}
        });
        (p, v)
    }

    /// Renders the expression with the given names.
    pub fn display<'a>(&'a self, params: &'a [String], vars: &'a [String]) -> DisplayExpr<'a> {
        DisplayExpr {
            expr: self,
            params,
            vars,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if c.lo() < 0.0 => 3,
            _ => 5,
        }
    }
}

pub struct DisplayExpr<'a> {
    expr: &'a Expr,
    params: &'a [String],
    vars: &'a [String],
}

impl DisplayExpr<'_> {
    fn child<'b>(&'b self, e: &'b Expr) -> DisplayExpr<'b> {
        DisplayExpr {
            expr: e,
            params: self.params,
            vars: self.vars,
        }
    }

    fn write_operand(&self, f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
        if e.precedence() < min_prec {
            write!(f, "({})", self.child(e))
        } else {
            write!(f, "{}", self.child(e))
        }
    }
}

fn name_or_index(names: &[String], prefix: &str, i: usize) -> String {
    names.get(i).cloned().unwrap_or_else(|| format!("{prefix}{}", i + 1))
}

impl fmt::Display for DisplayExpr<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr {
            Expr::Const(c) => write!(f, "{}", format_enclosed(c)),
            Expr::Param(i) => write!(f, "{}", name_or_index(self.params, "u", *i)),
            Expr::Var(i) => write!(f, "{}", name_or_index(self.vars, "x", *i)),
            // A bare `-2` would read back as a negative constant.
            Expr::Neg(a) if matches!(**a, Expr::Const(_)) => write!(f, "-({})", self.child(a)),
            Expr::Neg(a) => {
                write!(f, "-")?;
                self.write_operand(f, a, 4)
            }
            Expr::Add(a, b) => {
                self.write_operand(f, a, 1)?;
                write!(f, " + ")?;
                self.write_operand(f, b, 2)
            }
            Expr::Sub(a, b) => {
                self.write_operand(f, a, 1)?;
                write!(f, " - ")?;
                self.write_operand(f, b, 2)
            }
            Expr::Mul(a, b) => {
                self.write_operand(f, a, 2)?;
                write!(f, " * ")?;
                self.write_operand(f, b, 3)
            }
            Expr::Div(a, b) => {
                self.write_operand(f, a, 2)?;
                write!(f, " / ")?;
                self.write_operand(f, b, 3)
            }
            Expr::Pow(a, n) => {
                self.write_operand(f, a, 5)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            Expr::Sin(a) => write!(f, "sin({})", self.child(a)),
            Expr::Cos(a) => write!(f, "cos({})", self.child(a)),
            Expr::Exp(a) => write!(f, "exp({})", self.child(a)),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display(&[], &[]))
    }
}
