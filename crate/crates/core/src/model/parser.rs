//! The line-oriented model file format.
//!
//! ```text
//! [params] u1 in [-0.1, 0.1]
//! [vars]   x1 in [-10, 10]
//!          x2 in [-10, 10]
//! [init]   x1 = 1
//!          x2 = 0
//! [flow]   x1' = u1*x1 - x2
//!          x2' = x1 + u1*x2
//! ```

use std::fmt::Write;

use super::numeric::{format_lower, format_upper};
use super::{ContinuousSystem, Expr, ModelError, Scope};
use crate::interval::{Interval, IntervalBox};
use crate::syntax::{lex, Cursor, ParseError, Resolver, Tok, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Params,
    Vars,
    Init,
    Flow,
}

impl Section {
    fn from_name(name: &str) -> Option<Section> {
        match name {
            "params" => Some(Section::Params),
            "vars" => Some(Section::Vars),
            "init" => Some(Section::Init),
            "flow" => Some(Section::Flow),
            _ => None,
        }
    }
}

struct NoNames;

impl Resolver for NoNames {
    fn resolve(&self, _: &str) -> Option<Expr> {
        None
    }
}

fn constant(c: &mut Cursor<'_>) -> Result<Interval, ParseError> {
    let at = c.error("");
    let e = c.expr(&NoNames)?;
    e.eval_slices(&[], &[])
        .map_err(|err| ParseError::new(at.line, at.col, err.to_string()))
}

// `[lo, hi]` with constant-expression bounds, rounded outward.
fn domain(c: &mut Cursor<'_>) -> Result<Interval, ParseError> {
    c.expect(&Tok::LBracket)?;
    let lo = constant(c)?;
    c.expect(&Tok::Comma)?;
    let hi = constant(c)?;
    c.expect(&Tok::RBracket)?;
    Interval::try_new(lo.lo(), hi.hi()).ok_or_else(|| c.error("empty domain: lower bound exceeds upper bound"))
}

#[derive(Default)]
struct Draft {
    params: Vec<(String, Interval)>,
    vars: Vec<(String, Interval)>,
    init: Vec<Option<Interval>>,
    flow: Vec<Option<Expr>>,
}

impl Draft {
    fn scope(&self) -> Scope {
        Scope::new(
            self.params.iter().map(|p| p.0.clone()).collect(),
            self.vars.iter().map(|v| v.0.clone()).collect(),
        )
    }

    fn declared(&self, name: &str) -> bool {
        self.params.iter().chain(&self.vars).any(|(n, _)| n == name)
    }

    fn var_index(&self, c: &Cursor<'_>, name: &str) -> Result<usize, ParseError> {
        self.vars
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| c.error(format!("undeclared variable `{name}`")))
    }

    fn declaration(&mut self, section: Section, toks: &[Token], end: (usize, usize)) -> Result<(), ParseError> {
        let mut c = Cursor::new(toks, end);
        let name_at = c.error("");
        let name = c.ident()?;
        match section {
            Section::Params | Section::Vars => {
                if self.declared(&name) {
                    return Err(ParseError::new(
                        name_at.line,
                        name_at.col,
                        format!("`{name}` declared twice"),
                    ));
                }
                if matches!(
                    name.as_str(),
                    "sin" | "cos" | "exp" | "true" | "false" | "F" | "G" | "U"
                ) {
                    return Err(ParseError::new(
                        name_at.line,
                        name_at.col,
                        format!("`{name}` is reserved"),
                    ));
                }
                let dom = if c.eat(&Tok::Eq) {
                    constant(&mut c)?
                } else {
                    match c.peek() {
                        Some(Tok::Ident(kw)) if kw == "in" => c.bump(),
                        _ => return Err(c.unexpected("`in`")),
                    };
                    domain(&mut c)?
                };
                if section == Section::Params {
                    self.params.push((name, dom));
                } else {
                    self.vars.push((name, dom));
                    self.init.push(None);
                    self.flow.push(None);
                }
            }
            Section::Init => {
                let i = self
                    .var_index(&c, &name)
                    .map_err(|_| ParseError::new(name_at.line, name_at.col, format!("undeclared variable `{name}`")))?;
                if self.init[i].is_some() {
                    return Err(ParseError::new(
                        name_at.line,
                        name_at.col,
                        format!("initial value of `{name}` given twice"),
                    ));
                }
                let value = if c.eat(&Tok::Eq) {
                    constant(&mut c)?
                } else {
                    match c.peek() {
                        Some(Tok::Ident(kw)) if kw == "in" => c.bump(),
                        _ => return Err(c.unexpected("`=` or `in`")),
                    };
                    domain(&mut c)?
                };
                self.init[i] = Some(value);
            }
            Section::Flow => {
                let i = self
                    .var_index(&c, &name)
                    .map_err(|_| ParseError::new(name_at.line, name_at.col, format!("undeclared variable `{name}`")))?;
                c.expect(&Tok::Prime)?;
                c.expect(&Tok::Eq)?;
                if self.flow[i].is_some() {
                    return Err(ParseError::new(
                        name_at.line,
                        name_at.col,
                        format!("flow of `{name}` given twice"),
                    ));
                }
                let e = c.expr(&self.scope())?;
                self.flow[i] = Some(e);
            }
        }
        if !c.at_end() {
            return Err(c.unexpected("end of line"));
        }
        Ok(())
    }
}

/// Parses a model file into a validated [`ContinuousSystem`].
pub fn parse_model(text: &str) -> Result<ContinuousSystem, ModelError> {
    let mut draft = Draft::default();
    let mut section: Option<Section> = None;
    let mut last_line = 1;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let toks = lex(line, line_no)?;
        let end = (line_no, line.chars().count() + 1);
        let mut rest = &toks[..];
        if let [Token { tok: Tok::LBracket, .. }, Token {
            tok: Tok::Ident(name),
            line,
            col,
        }, Token { tok: Tok::RBracket, .. }, tail @ ..] = rest
        {
            if let Some(next) = Section::from_name(name) {
                if section.is_some_and(|s| s >= next) {
                    return Err(ParseError::new(
                        *line,
                        *col,
                        format!("section `[{name}]` is out of order or repeated"),
                    )
                    .into());
                }
                section = Some(next);
                rest = tail;
            } else {
                return Err(ParseError::new(*line, *col, format!("unknown section `[{name}]`")).into());
            }
        }
        if rest.is_empty() {
            continue;
        }
        let Some(current) = section else {
            return Err(ParseError::new(rest[0].line, rest[0].col, "declaration before any section header").into());
        };
        draft.declaration(current, rest, end)?;
    }
    if draft.vars.is_empty() {
        return Err(ParseError::new(last_line, 1, "no variables declared").into());
    }
    let mut init = Vec::new();
    let mut flow = Vec::new();
    for (i, (name, _)) in draft.vars.iter().enumerate() {
        init.push(draft.init[i].ok_or_else(|| ModelError::Malformed(format!("missing initial value for `{name}`")))?);
        flow.push(
            draft.flow[i]
                .clone()
                .ok_or_else(|| ModelError::Malformed(format!("missing flow for `{name}`")))?,
        );
    }
    ContinuousSystem::new(
        draft.params.iter().map(|p| p.0.clone()).collect(),
        draft.vars.iter().map(|v| v.0.clone()).collect(),
        draft.params.iter().map(|p| p.1).collect(),
        draft.vars.iter().map(|v| v.1).collect(),
        IntervalBox::new(init),
        flow,
    )
}

fn write_domain(out: &mut String, iv: &Interval) {
    let _ = write!(out, "[{}, {}]", format_lower(iv.lo()), format_upper(iv.hi()));
}

/// Renders a system in the model file format; [`parse_model`] reads it back
/// to a structurally identical system.
pub fn print_model(sys: &ContinuousSystem) -> String {
    let mut out = String::new();
    if !sys.params.is_empty() {
        out.push_str("[params]\n");
        for (name, dom) in sys.params.iter().zip(sys.param_domain.iter()) {
            let _ = write!(out, "{name} in ");
            write_domain(&mut out, dom);
            out.push('\n');
        }
    }
    out.push_str("[vars]\n");
    for (name, dom) in sys.vars.iter().zip(sys.state_domain.iter()) {
        let _ = write!(out, "{name} in ");
        write_domain(&mut out, dom);
        out.push('\n');
    }
    out.push_str("[init]\n");
    for (name, v) in sys.vars.iter().zip(sys.init.iter()) {
        if v.is_point() {
            let _ = writeln!(out, "{name} = {}", super::numeric::format_exact(v.lo()));
        } else {
            let _ = write!(out, "{name} in ");
            write_domain(&mut out, v);
            out.push('\n');
        }
    }
    out.push_str("[flow]\n");
    for (name, e) in sys.vars.iter().zip(&sys.flow) {
        let _ = writeln!(out, "{name}' = {}", e.display(&sys.params, &sys.vars));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROTATION: &str = "\
[params] u1 in [-0.1, 0.1]
[vars]   x1 in [-10, 10]
         x2 in [-10, 10]
[init]   x1 = 1
         x2 = 0
[flow]   x1' = u1*x1 - x2
         x2' = x1 + u1*x2
";

    #[test]
    fn parses_rotation() {
        let sys = parse_model(ROTATION).unwrap();
        assert_eq!(sys.params, vec!["u1"]);
        assert_eq!(sys.vars, vec!["x1", "x2"]);
        assert!(sys.param_domain[0].contains(-0.1) && sys.param_domain[0].contains(0.1));
        assert!(sys.param_domain[0].width() < 0.2 + 1e-15);
        assert_eq!(sys.init, IntervalBox::from_points(&[1.0, 0.0]));
        assert_eq!(
            sys.flow[0],
            Expr::Sub(
                Box::new(Expr::Mul(Box::new(Expr::Param(0)), Box::new(Expr::Var(0)))),
                Box::new(Expr::Var(1))
            )
        );
    }

    #[test]
    fn round_trips() {
        let sys = parse_model(ROTATION).unwrap();
        let text = print_model(&sys);
        assert_eq!(parse_model(&text).unwrap(), sys);
        assert!(text.contains("u1 in [-0.1, 0.1]"), "{text}");
    }

    #[test]
    fn comments_and_interval_init() {
        let text = "# timer\n[vars]\nx in [0, 10] # clock\n[init]\nx in [0, 0.5]\n[flow]\nx' = 1\n";
        let sys = parse_model(text).unwrap();
        assert_eq!(sys.init[0], Interval::new(0.0, 0.5));
        assert!(sys.params.is_empty());
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_model("[vars] x in [0, 1]\n[init] x = 0\n[flow] x' = y\n").unwrap_err();
        match err {
            ModelError::Syntax(e) => {
                assert_eq!((e.line, e.col), (3, 13));
                assert!(e.message.contains("undeclared identifier `y`"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_model("[vars] x in [0, 1]\n[init] x = 2\n[flow] x' = 1\n").unwrap_err();
        assert_eq!(err, ModelError::InitOutsideDomain { name: "x".into() });
        let err = parse_model("[vars] x in [0 1]\n").unwrap_err();
        assert!(
            matches!(err, ModelError::Syntax(ParseError { line: 1, col: 16, .. })),
            "{err:?}"
        );
        assert!(matches!(
            parse_model("[vars] x in [0, 1]\n[init] x = 0\n"),
            Err(ModelError::Malformed(_))
        ));
        assert!(matches!(parse_model("x in [0, 1]\n"), Err(ModelError::Syntax(_))));
    }

    #[test]
    fn rejects_unsafe_division() {
        let err = parse_model("[vars] x in [-1, 1]\n[init] x = 0\n[flow] x' = 1 / x\n").unwrap_err();
        assert_eq!(err, ModelError::UnsafeDivision { name: "x".into() });
        assert!(parse_model("[vars] x in [1, 2]\n[init] x = 1\n[flow] x' = 1 / x + x^(-2)\n").is_ok());
    }
}
