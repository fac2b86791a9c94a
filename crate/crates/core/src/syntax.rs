//! Tokens and the expression grammar shared by the model and formula parsers.

use std::fmt;

use thiserror::Error;

use crate::interval::Interval;
use crate::model::numeric::parse_decimal;
use crate::model::Expr;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Prime,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) | Tok::Number(s) => return write!(f, "`{s}`"),
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::Bang => "!",
            Tok::Amp => "&",
            Tok::Pipe => "|",
            Tok::Arrow => "->",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::Eq => "=",
            Tok::Prime => "'",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Splits one line (or a whole single-line formula) into tokens. `#` starts
/// a comment running to the end of the line.
pub fn lex(text: &str, line: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = line;
    let mut line_start = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i - line_start + 1;
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line, col });
        match c {
            '\n' => {
                line += 1;
                line_start = i + 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                push(&mut out, Tok::Number(chars[start..i].iter().collect()));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
            }
            _ => {
                let next = chars.get(i + 1).copied();
                let (tok, len) = match (c, next) {
                    ('-', Some('>')) => (Tok::Arrow, 2),
                    ('<', Some('=')) => (Tok::Le, 2),
                    ('>', Some('=')) => (Tok::Ge, 2),
                    ('(', _) => (Tok::LParen, 1),
                    (')', _) => (Tok::RParen, 1),
                    ('[', _) => (Tok::LBracket, 1),
                    (']', _) => (Tok::RBracket, 1),
                    (',', _) => (Tok::Comma, 1),
                    ('+', _) => (Tok::Plus, 1),
                    ('-', _) => (Tok::Minus, 1),
                    ('*', _) => (Tok::Star, 1),
                    ('/', _) => (Tok::Slash, 1),
                    ('^', _) => (Tok::Caret, 1),
                    ('!', _) => (Tok::Bang, 1),
                    ('&', _) => (Tok::Amp, 1),
                    ('|', _) => (Tok::Pipe, 1),
                    ('<', _) => (Tok::Lt, 1),
                    ('>', _) => (Tok::Gt, 1),
                    ('=', _) => (Tok::Eq, 1),
                    ('\'', _) => (Tok::Prime, 1),
                    _ => return Err(ParseError::new(line, col, format!("unexpected character `{c}`"))),
                };
                push(&mut out, tok);
                i += len;
            }
        }
    }
    Ok(out)
}

/// Resolves an identifier to a parameter or variable reference.
pub trait Resolver {
    fn resolve(&self, name: &str) -> Option<Expr>;
}

/// A cursor over a token slice with recursive-descent helpers.
pub struct Cursor<'a> {
    toks: &'a [Token],
    pub pos: usize,
    end: (usize, usize),
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Token], end: (usize, usize)) -> Self {
        Cursor { toks, pos: 0, end }
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|t| &t.tok);
        self.pos += 1;
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.toks.get(self.pos).map(|t| (t.line, t.col)).unwrap_or(self.end);
        ParseError::new(line, col, message)
    }

    pub fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {t}")),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    /// A possibly signed numeric literal as a tight enclosure.
    pub fn signed_number(&mut self) -> Result<Interval, ParseError> {
        let negative = self.eat(&Tok::Minus);
        if !negative {
            self.eat(&Tok::Plus);
        }
        match self.peek() {
            Some(Tok::Number(s)) => {
                let v = parse_decimal(s).ok_or_else(|| self.error(format!("malformed number `{s}`")))?;
                self.pos += 1;
                Ok(if negative { -v } else { v })
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    // expr := term (('+' | '-') term)*
    pub fn expr(&mut self, r: &dyn Resolver) -> Result<Expr, ParseError> {
        let mut lhs = self.term(r)?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term(r)?));
            } else if self.eat(&Tok::Minus) {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term(r)?));
            } else {
                return Ok(lhs);
            }
        }
    }

    // term := unary (('*' | '/') unary)*
    fn term(&mut self, r: &dyn Resolver) -> Result<Expr, ParseError> {
        let mut lhs = self.unary(r)?;
        loop {
            if self.eat(&Tok::Star) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary(r)?));
            } else if self.eat(&Tok::Slash) {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary(r)?));
            } else {
                return Ok(lhs);
            }
        }
    }

    // unary := '-' unary | power
    fn unary(&mut self, r: &dyn Resolver) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            if let Some(Tok::Number(_)) = self.peek() {
                if self.peek_at(1) != Some(&Tok::Caret) {
                    let start = self.pos;
                    let v = match self.bump() {
                        Some(Tok::Number(s)) => parse_decimal(s),
                        _ => None,
                    };
                    return match v {
                        Some(v) => Ok(Expr::Const(-v)),
                        None => {
                            self.pos = start;
                            Err(self.error("malformed number"))
                        }
                    };
                }
            }
            let inner = self.unary(r)?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power(r)
    }

    // power := primary ('^' integer | '^' '(' '-' integer ')')?
    fn power(&mut self, r: &dyn Resolver) -> Result<Expr, ParseError> {
        let base = self.primary(r)?;
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        let paren = self.eat(&Tok::LParen);
        let negative = self.eat(&Tok::Minus);
        let n = match self.peek() {
            Some(Tok::Number(s)) => s
                .parse::<i32>()
                .map_err(|_| self.error("exponent must be an integer"))?,
            _ => return Err(self.unexpected("an integer exponent")),
        };
        self.pos += 1;
        if paren {
            self.expect(&Tok::RParen)?;
        }
        Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }))
    }

    fn primary(&mut self, r: &dyn Resolver) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Number(s)) => {
                let v = parse_decimal(&s).ok_or_else(|| self.error(format!("malformed number `{s}`")))?;
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr(r)?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if self.peek_at(1) == Some(&Tok::LParen) {
                    let f = match name.as_str() {
                        "sin" => Expr::Sin as fn(Box<Expr>) -> Expr,
                        "cos" => Expr::Cos,
                        "exp" => Expr::Exp,
                        _ => return Err(self.error(format!("unknown function `{name}`"))),
                    };
                    self.pos += 2;
                    let arg = self.expr(r)?;
                    self.expect(&Tok::RParen)?;
                    return Ok(f(Box::new(arg)));
                }
                match r.resolve(&name) {
                    Some(e) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    None => Err(self.error(format!("undeclared identifier `{name}`"))),
                }
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}
