//! Expressions, continuous systems and the text model format.

mod builtin;
mod expr;
pub mod numeric;
mod parser;
mod system;

pub use builtin::{builtin, builtin_source, lorenz, rotation, timer, BUILTIN_NAMES};
pub use expr::{DisplayExpr, EvalError, Expr};
pub use parser::{parse_model, print_model};
pub use system::{ContinuousSystem, ModelError};

/// Names bound to parameter and variable positions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scope {
    pub params: Vec<String>,
    pub vars: Vec<String>,
}

impl Scope {
    pub fn new(params: Vec<String>, vars: Vec<String>) -> Self {
        Scope { params, vars }
    }

    pub fn lookup(&self, name: &str) -> Option<Expr> {
        if let Some(i) = self.vars.iter().position(|v| v == name) {
            return Some(Expr::Var(i));
        }
        self.params.iter().position(|p| p == name).map(Expr::Param)
    }
}

impl crate::syntax::Resolver for Scope {
    fn resolve(&self, name: &str) -> Option<Expr> {
        self.lookup(name)
    }
}
