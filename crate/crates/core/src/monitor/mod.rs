//! Verification of STL formulas over all solutions of a parameterized system.
//!
//! Atoms are monitored on the signal enclosure by certified root finding,
//! their approximated sets are combined along the formula, and the verdict
//! is read off the combined set at time 0.

mod search;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::integrator::{IntegrationError, IntegratorConfig, SignalEnclosure};
use crate::interval::Interval;
use crate::model::{ContinuousSystem, EvalError, Expr};
use crate::stl::Formula;
use crate::timesets::{AmbiguityError, ApproxSet};

pub use search::{lie_derivative, monitor_ap, monitor_atom, search_zero, Boundary, SearchZeroError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorConfig {
    /// Progress threshold of the root filter.
    pub epsilon: f64,
    /// Inflation parameter of the uniqueness check, in `(0, 1)`.
    pub theta: f64,
    /// Smallest integration step.
    pub t_min: f64,
    /// Taylor order of the integrator.
    pub order: usize,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            epsilon: 1e-14,
            theta: 0.01,
            t_min: 1e-14,
            order: IntegratorConfig::default().order,
        }
    }
}

impl MonitorConfig {
    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            order: self.order,
            t_min: self.t_min,
            ..IntegratorConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    Valid,
    Unsat,
    Unknown,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum UnknownCause {
    SearchZeroError,
    PropagationError,
    IntegrationError,
    InitialSignError,
}

impl UnknownCause {
    pub const ALL: [UnknownCause; 4] = [
        UnknownCause::SearchZeroError,
        UnknownCause::PropagationError,
        UnknownCause::IntegrationError,
        UnknownCause::InitialSignError,
    ];
}

impl fmt::Display for UnknownCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub integration_steps: usize,
    pub search_zero_calls: usize,
    pub newton_iterations: usize,
}

/// Approximated set of one subformula.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetDump {
    pub formula: String,
    pub set: ApproxSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub unknown_cause: Option<UnknownCause>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub stats: Stats,
    /// Sets of every subformula in post-order, as far as they were computed.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<SetDump>,
}

impl Verdict {
    /// Set computed for the subformula printed as `formula`.
    pub fn set_of(&self, formula: &str) -> Option<&ApproxSet> {
        self.sets.iter().find(|d| d.formula == formula).map(|d| &d.set)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonitorError {
    #[error("sign of an atom at time 0 is undecidable: {0:?}")]
    InitialSign(Interval),
    #[error(transparent)]
    SearchZero(#[from] SearchZeroError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Propagation(#[from] AmbiguityError),
    #[error("first bound {0:?} of the formula's set contains time 0")]
    Inconclusive(Interval),
}

impl From<EvalError> for MonitorError {
    fn from(e: EvalError) -> Self {
        MonitorError::SearchZero(SearchZeroError::Evaluation(e))
    }
}

impl MonitorError {
    pub fn cause(&self) -> UnknownCause {
        match self {
            MonitorError::InitialSign(_) => UnknownCause::InitialSignError,
            MonitorError::SearchZero(_) => UnknownCause::SearchZeroError,
            MonitorError::Integration(_) => UnknownCause::IntegrationError,
            MonitorError::Propagation(_) | MonitorError::Inconclusive(_) => UnknownCause::PropagationError,
        }
    }
}

/// Combines atom sets along the formula. `atoms` and `sets` are parallel.
pub fn propagate(phi: &Formula, atoms: &[Expr], sets: &[ApproxSet]) -> Result<ApproxSet, AmbiguityError> {
    propagate_with(phi, atoms, sets, &mut |_, _| {})
}

/// [`propagate`], calling `visit` with the set of every subformula in
/// post-order.
pub fn propagate_with(
    phi: &Formula,
    atoms: &[Expr],
    sets: &[ApproxSet],
    visit: &mut dyn FnMut(&Formula, &ApproxSet),
) -> Result<ApproxSet, AmbiguityError> {
    let set = match phi {
        Formula::True => ApproxSet::Universe,
        Formula::Atom(e) => {
            let i = atoms
                .iter()
                .position(|a| a == e)
                .expect("atom sets cover every atom of the formula");
            sets[i].clone()
        }
        Formula::Not(a) => propagate_with(a, atoms, sets, visit)?.invert()?,
        Formula::Or(a, b) => {
            let ta = propagate_with(a, atoms, sets, visit)?;
            let tb = propagate_with(b, atoms, sets, visit)?;
            ta.join(&tb)?
        }
        Formula::Until(t, a, b) => {
            let ta = propagate_with(a, atoms, sets, visit)?;
            let tb = propagate_with(b, atoms, sets, visit)?;
            ta.shift_all(t, &tb)?
        }
    };
    visit(phi, &set);
    Ok(set)
}

/// Reads the verdict at time 0 off a canonical set. `Err` carries the first
/// bound when it may lie on either side of 0.
pub fn consistent_at_init(t: &ApproxSet) -> Result<Outcome, Interval> {
    match t {
        ApproxSet::Universe => Ok(Outcome::Valid),
        ApproxSet::Empty => Ok(Outcome::Unsat),
        ApproxSet::Seq(_) => {
            let s = t.first_element().s;
            if s.hi() <= 0.0 {
                Ok(Outcome::Valid)
            } else if s.lo() > 0.0 {
                Ok(Outcome::Unsat)
            } else {
                Err(s)
            }
        }
    }
}

/// Decides whether every solution of `sys` (all parameters in its parameter
/// domain, all initial states in its initial box) satisfies `phi` at time 0.
/// Failures of any stage give [`Outcome::Unknown`] with the failing stage as
/// cause.
pub fn monitor_stl(sys: &ContinuousSystem, phi: &Formula, cfg: &MonitorConfig) -> Verdict {
    monitor_stl_traced(sys, phi, cfg).0
}

/// [`monitor_stl`], also returning the signal enclosure it computed.
pub fn monitor_stl_traced(sys: &ContinuousSystem, phi: &Formula, cfg: &MonitorConfig) -> (Verdict, SignalEnclosure) {
    let mut stats = Stats::default();
    let mut sets = Vec::new();
    let mut enc = SignalEnclosure::new(sys, sys.param_domain.clone(), sys.init.clone(), cfg.integrator());
    let result = run(sys, phi, cfg, &mut enc, &mut stats, &mut sets);
    let (outcome, unknown_cause, message) = match result {
        Ok(outcome) => (outcome, None, None),
        Err(e) => (Outcome::Unknown, Some(e.cause()), Some(e.to_string())),
    };
    let verdict = Verdict {
        outcome,
        unknown_cause,
        message,
        stats,
        sets,
    };
    (verdict, enc)
}

fn run(
    sys: &ContinuousSystem,
    phi: &Formula,
    cfg: &MonitorConfig,
    enc: &mut SignalEnclosure,
    stats: &mut Stats,
    sets: &mut Vec<SetDump>,
) -> Result<Outcome, MonitorError> {
    let end = phi.necessary_length();
    let extended = enc.extend(end);
    stats.integration_steps = enc.steps().len();
    extended?;
    let atoms = phi.atoms();
    let atom_sets = monitor_ap(&atoms, sys, enc, end, cfg, stats)?;
    let scope = sys.scope();
    let t_phi = propagate_with(phi, &atoms, &atom_sets, &mut |f, set| {
        sets.push(SetDump {
            formula: f.display(&scope).to_string(),
            set: set.clone(),
        })
    })?;
    consistent_at_init(&t_phi).map_err(MonitorError::Inconclusive)
}
