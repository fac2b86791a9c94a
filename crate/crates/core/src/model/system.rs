use thiserror::Error;

use super::{Expr, Scope};
use crate::interval::IntervalBox;
use crate::syntax::ParseError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("syntax error at {0}")]
    Syntax(#[from] ParseError),
    #[error("initial value of `{name}` is not inside its state domain")]
    InitOutsideDomain { name: String },
    #[error("flow of `{name}` divides by an expression whose range over the domains contains zero")]
    UnsafeDivision { name: String },
    #[error("{0}")]
    Malformed(String),
}

/// A parameterized ODE system `x' = F(u, x)` with parameter domain `U`,
/// state domain `X` and initial box `X_init ⊆ X`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSystem {
    pub params: Vec<String>,
    pub vars: Vec<String>,
    pub param_domain: IntervalBox,
    pub state_domain: IntervalBox,
    pub init: IntervalBox,
    pub flow: Vec<Expr>,
}

impl ContinuousSystem {
    /// Builds a system and checks dimensions, `X_init ⊆ X`, and that every
    /// division in the flow has a denominator bounded away from zero over `U × X`.
    pub fn new(
        params: Vec<String>,
        vars: Vec<String>,
        param_domain: IntervalBox,
        state_domain: IntervalBox,
        init: IntervalBox,
        flow: Vec<Expr>,
    ) -> Result<Self, ModelError> {
        let n = vars.len();
        if param_domain.dim() != params.len() {
            return Err(ModelError::Malformed(format!(
                "{} parameters but {} parameter domains",
                params.len(),
                param_domain.dim()
            )));
        }
        if state_domain.dim() != n || init.dim() != n || flow.len() != n {
            return Err(ModelError::Malformed(format!(
                "{n} variables but {} domains, {} initial values and {} flow components",
                state_domain.dim(),
                init.dim(),
                flow.len()
            )));
        }
        for (i, e) in flow.iter().enumerate() {
            let (p, v) = e.max_refs();
            if p.is_some_and(|p| p >= params.len()) || v.is_some_and(|v| v >= n) {
                return Err(ModelError::Malformed(format!(
                    "flow of `{}` refers to an undeclared name",
                    vars[i]
                )));
            }
        }
        for i in 0..n {
            if !init[i].subset_of(&state_domain[i]) {
                return Err(ModelError::InitOutsideDomain { name: vars[i].clone() });
            }
        }
        let sys = ContinuousSystem {
            params,
            vars,
            param_domain,
            state_domain,
            init,
            flow,
        };
        for (i, e) in sys.flow.iter().enumerate() {
            if !sys.divisions_safe(e) {
                return Err(ModelError::UnsafeDivision {
                    name: sys.vars[i].clone(),
                });
            }
        }
        Ok(sys)
    }

    /// True when every denominator in `e` (including negative powers) has a
    /// range over `U × X` that excludes zero.
    pub fn divisions_safe(&self, e: &Expr) -> bool {
        let mut ok = true;
        e.visit(&mut |sub| {
            let den = match sub {
                Expr::Div(_, d) => Some(d.as_ref()),
                Expr::Pow(b, n) if *n < 0 => Some(b.as_ref()),
                _ => None,
            };
            if let Some(d) = den {
                match d.eval_box(&self.param_domain, &self.state_domain) {
                    Ok(r) if !r.contains_zero() => {}
                    _ => ok = false,
                }
            }
        });
        ok
    }

    pub fn scope(&self) -> Scope {
        Scope::new(self.params.clone(), self.vars.clone())
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Returns a copy with a different parameter box, which must lie in `U`
    /// for the division check to remain meaningful.
    pub fn with_param_domain(&self, u: IntervalBox) -> Result<Self, ModelError> {
        ContinuousSystem::new(
            self.params.clone(),
            self.vars.clone(),
            u,
            self.state_domain.clone(),
            self.init.clone(),
            self.flow.clone(),
        )
    }
}
