//! Concrete formula syntax.
//!
//! ```text
//! φ    ::= "true" | "false" | atom | "!" φ | φ "&" φ | φ "|" φ | φ "->" φ
//!        | φ "U" bound φ | "F" bound φ | "G" bound φ | "(" φ ")"
//! atom ::= expr ("<" | ">") expr
//! bound ::= "[" number "," number "]"
//! ```
//!
//! Prefix operators bind tightest, then `U` (right associative), `&`, `|`,
//! and `->` (right associative).

use super::{Formula, TimeBound};
use crate::model::{Expr, Scope};
use crate::syntax::{lex, Cursor, ParseError, Tok};

/// Parses and desugars a formula; names resolve through `scope`.
pub fn parse_formula(text: &str, scope: &Scope) -> Result<Formula, ParseError> {
    let toks = lex(text, 1)?;
    let end = match text.rfind('\n') {
        Some(i) => (text.matches('\n').count() + 1, text[i + 1..].chars().count() + 1),
        None => (1, text.chars().count() + 1),
    };
    let mut p = FormulaParser {
        c: Cursor::new(&toks, end),
        scope,
    };
    if p.c.at_end() {
        return Err(p.c.error("empty formula"));
    }
    let f = p.implication()?;
    if !p.c.at_end() {
        return Err(p.c.unexpected("end of formula"));
    }
    Ok(f)
}

struct FormulaParser<'a> {
    c: Cursor<'a>,
    scope: &'a Scope,
}

impl FormulaParser<'_> {
    fn keyword(&self, kw: &str) -> bool {
        matches!(self.c.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.c.eat(&Tok::Arrow) {
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.c.eat(&Tok::Pipe) {
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.until()?;
        while self.c.eat(&Tok::Amp) {
            lhs = Formula::and(lhs, self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.keyword("U") {
            self.c.bump();
            let t = self.bound()?;
            let rhs = self.until()?;
            return Ok(Formula::until(t, lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.c.eat(&Tok::Bang) {
            return Ok(Formula::not(self.unary()?));
        }
        if (self.keyword("F") || self.keyword("G")) && self.c.peek_at(1) == Some(&Tok::LBracket) {
            let always = self.keyword("G");
            self.c.bump();
            let t = self.bound()?;
            let body = self.unary()?;
            return Ok(if always {
                Formula::always(t, body)
            } else {
                Formula::eventually(t, body)
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        if self.keyword("true") {
            self.c.bump();
            return Ok(Formula::True);
        }
        if self.keyword("false") {
            self.c.bump();
            return Ok(Formula::not(Formula::True));
        }
        if self.c.peek() == Some(&Tok::LParen) {
            // Either a parenthesized formula or an atom whose left operand
            // starts with a parenthesis; try the atom first.
            let start = self.c.pos;
            if let Ok(atom) = self.atom() {
                return Ok(atom);
            }
            self.c.pos = start;
            self.c.bump();
            let inner = self.implication()?;
            self.c.expect(&Tok::RParen)?;
            return Ok(inner);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.c.expr(self.scope)?;
        let less = match self.c.peek() {
            Some(Tok::Lt) => true,
            Some(Tok::Gt) => false,
            Some(Tok::Le) | Some(Tok::Ge) => {
                return Err(self.c.error("only strict comparisons `<` and `>` are allowed"))
            }
            _ => return Err(self.c.unexpected("`<` or `>`")),
        };
        self.c.bump();
        let rhs = self.c.expr(self.scope)?;
        Ok(Formula::Atom(if less {
            Expr::sub(lhs, rhs)
        } else {
            Expr::sub(rhs, lhs)
        }))
    }

    fn bound(&mut self) -> Result<TimeBound, ParseError> {
        self.c.expect(&Tok::LBracket)?;
        let at = self.c.error("");
        let lo = self.c.signed_number()?;
        self.c.expect(&Tok::Comma)?;
        let hi = self.c.signed_number()?;
        self.c.expect(&Tok::RBracket)?;
        if lo.lo() < 0.0 || hi.lo() < 0.0 {
            return Err(ParseError::new(at.line, at.col, "time bounds must be non-negative"));
        }
        TimeBound::new(lo, hi)
            .ok_or_else(|| ParseError::new(at.line, at.col, "empty time bound: lower end exceeds upper end"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::numeric::parse_decimal;

    fn scope() -> Scope {
        Scope::new(vec![], vec!["x".into(), "x1".into(), "x2".into()])
    }

    fn b(lo: &str, hi: &str) -> TimeBound {
        TimeBound::new(parse_decimal(lo).unwrap(), parse_decimal(hi).unwrap()).unwrap()
    }

    fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    #[test]
    fn desugars_always_eventually() {
        let f = parse_formula("G[0,10] F[0,6.284] !(x2 - 1 < 0)", &scope()).unwrap();
        let atom = Formula::Atom(Expr::Sub(Box::new(var(2)), Box::new(Expr::constant(1.0))));
        let inner = Formula::until(b("0", "6.284"), Formula::True, Formula::not(atom));
        let expected = Formula::not(Formula::until(b("0", "10"), Formula::True, Formula::not(inner)));
        assert_eq!(f, expected);
    }

    #[test]
    fn desugars_conjunction() {
        let f = parse_formula("F[0,6.284] (cos(x) < 0 & sin(x) < 0)", &scope()).unwrap();
        let c = Formula::Atom(Expr::Cos(Box::new(var(0))));
        let s = Formula::Atom(Expr::Sin(Box::new(var(0))));
        let conj = Formula::not(Formula::or(Formula::not(c), Formula::not(s)));
        assert_eq!(f, Formula::until(b("0", "6.284"), Formula::True, conj));
        assert_eq!(parse_formula("true", &scope()).unwrap(), Formula::True);
    }

    #[test]
    fn comparisons_and_implication() {
        let s = scope();
        let f = parse_formula("x > 1 -> x < 2", &s).unwrap();
        let gt = Formula::Atom(Expr::Sub(Box::new(Expr::constant(1.0)), Box::new(var(0))));
        let lt = Formula::Atom(Expr::Sub(Box::new(var(0)), Box::new(Expr::constant(2.0))));
        assert_eq!(f, Formula::implies(gt, lt));
        // Parenthesized left operand of an atom.
        let f = parse_formula("(x - 1) * 2 < 0", &s).unwrap();
        assert!(matches!(f, Formula::Atom(Expr::Mul(..))));
    }

    #[test]
    fn precedence() {
        let s = scope();
        let p = || Formula::Atom(var(0));
        let q = || Formula::Atom(var(1));
        let r = || Formula::Atom(var(2));
        assert_eq!(
            parse_formula("x < 0 | x1 < 0 & x2 < 0", &s).unwrap(),
            Formula::or(p(), Formula::and(q(), r()))
        );
        assert_eq!(
            parse_formula("!x < 0 & x1 < 0", &s).unwrap(),
            Formula::and(Formula::not(p()), q())
        );
        assert_eq!(
            parse_formula("x < 0 U[0,1] x1 < 0 U[0,2] x2 < 0", &s).unwrap(),
            Formula::until(b("0", "1"), p(), Formula::until(b("0", "2"), q(), r()))
        );
    }

    #[test]
    fn rejects_bad_input() {
        let s = scope();
        assert!(parse_formula("x <= 0", &s).is_err());
        assert!(parse_formula("F[2,1] x < 0", &s).is_err());
        assert!(parse_formula("F[-1,1] x < 0", &s).is_err());
        assert!(parse_formula("F[0,1] y < 0", &s).is_err());
        assert!(parse_formula("", &s).is_err());
        assert!(parse_formula("(x < 0", &s).is_err());
        let err = parse_formula("x < 0 &", &s).unwrap_err();
        assert_eq!((err.line, err.col), (1, 8));
    }

    #[test]
    fn printing_round_trips() {
        let s = Scope::new(vec!["u1".into()], vec!["x1".into(), "x2".into(), "x3".into()]);
        for text in [
            "G[0,100] F[0,6.284] !(x2 - 1 < 0)",
            "G[0,10] F[0,6.284] (!(x2 - 1 < 0) & F[0,3.142] !(-x2 - 1 < 0))",
            "G[0,15] (!(-x1 - 15 < 0) -> F[0.5,5] G[0,1] ((x1 - 10)^2 + (x2 - 10)^2 - 150 < 0))",
            "false | (u1*x1 > -2 U[0.1,0.2] true)",
        ] {
            let f = parse_formula(text, &s).unwrap();
            let printed = f.display(&s).to_string();
            assert_eq!(parse_formula(&printed, &s).unwrap(), f, "{printed}");
        }
    }
}
