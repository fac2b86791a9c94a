//! Certified enclosures of the times at which an atom changes truth value.

use thiserror::Error;

use crate::integrator::SignalEnclosure;
use crate::interval::{hypermetric, newton_step, Interval};
use crate::model::{ContinuousSystem, EvalError, Expr};
use crate::timesets::{normalize, ApproxSet, Bound};

use super::{MonitorConfig, MonitorError, Stats};

/// Phase-1 iterations after which the filter stops even without converging.
const MAX_FILTER_ITERATIONS: usize = 10_000;
/// Safety cap on phase-2 inflation rounds; the stall test normally ends
/// the loop much earlier.
const MAX_VERIFY_ITERATIONS: usize = 10_000;
/// Rounds of phase 2 allowed while the contraction amount is below ε.
const MAX_NOISE_ROUNDS: u32 = 40;
/// Highest time derivative tried when an atom is exactly zero at time 0.
const MAX_INITIAL_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchZeroError {
    #[error("time derivative of the boundary function contains 0 over {0:?}")]
    Tangency(Interval),
    #[error("interval Newton contraction stalled around {0:?}")]
    Stalled(Interval),
    #[error("no isolated restart point after the root in {0:?}")]
    Restart(Interval),
    #[error(transparent)]
    Evaluation(#[from] EvalError),
}

/// Derivative of `f` along the flow, `∇f · F`, as an expression.
pub fn lie_derivative(f: &Expr, sys: &ContinuousSystem) -> Expr {
    f.gradient(sys.n_vars())
        .into_iter()
        .zip(&sys.flow)
        .map(|(g, fl)| Expr::mul(g, fl.clone()))
        .reduce(Expr::add)
        .unwrap_or_else(|| Expr::constant(0.0))
}

/// Boundary function `f` of an atom `f < 0` together with its time derivative.
#[derive(Debug, Clone)]
pub struct Boundary {
    pub f: Expr,
    pub df: Expr,
}

impl Boundary {
    pub fn new(f: Expr, sys: &ContinuousSystem) -> Boundary {
        let df = lie_derivative(&f, sys);
        Boundary { f, df }
    }

    /// `f(X̃(t))`.
    pub fn value(&self, enc: &SignalEnclosure, t: Interval) -> Result<Interval, EvalError> {
        self.f.eval_box(enc.u_box(), &enc.eval(t))
    }

    /// Enclosure of `d/dt f(x(t))` over `t` by the chain rule.
    pub fn dt(&self, enc: &SignalEnclosure, t: Interval) -> Result<Interval, EvalError> {
        self.df.eval_box(enc.u_box(), &enc.eval(t))
    }
}

/// Encloses the earliest time in `t_init` at which `f` vanishes along every
/// enclosed solution, proving the root unique in the returned interval.
/// `Ok(None)` certifies that `f` has no root in `t_init`.
pub fn search_zero(
    b: &Boundary,
    enc: &SignalEnclosure,
    t_init: Interval,
    cfg: &MonitorConfig,
    stats: &mut Stats,
) -> Result<Option<Interval>, SearchZeroError> {
    stats.search_zero_calls += 1;

    // Lower bound reduction.
    let mut t = t_init;
    for _ in 0..MAX_FILTER_ITERATIONS {
        stats.newton_iterations += 1;
        let bak = t;
        let d = b.dt(enc, t)?;
        let f_lo = b.value(enc, Interval::point(t.lo()))?;
        match newton_step(&f_lo, &d, &t, t.lo()) {
            None => return Ok(None),
            Some(next) => t = next,
        }
        if hypermetric(&bak, &t) <= cfg.epsilon {
            break;
        }
    }
    let filtered_lo = t.lo();

    // Unique existence.
    let mut t = Interval::point(filtered_lo);
    let mut delta = f64::INFINITY;
    let mut noise_rounds = 0u32;
    for _ in 0..MAX_VERIFY_ITERATIONS {
        stats.newton_iterations += 1;
        let d = b.dt(enc, t)?;
        if d.contains_zero() {
            return Err(SearchZeroError::Tangency(t));
        }
        let f_lo = b.value(enc, Interval::point(t.lo()))?;
        let step = f_lo / d;
        let candidate = Interval::point(t.lo()) - step;
        if candidate.interior_of(&t) {
            // Newton removed every root of `t` outside `candidate`; roots
            // between the filtered bound and `t` need a separate check.
            if t.lo() > filtered_lo {
                let gap = Interval::new(filtered_lo, candidate.hi());
                if b.dt(enc, gap)?.contains_zero() {
                    return Err(SearchZeroError::Tangency(gap));
                }
            }
            return Ok(Some(candidate));
        }
        let delta_bak = delta;
        delta = hypermetric(&t, &candidate);
        // Contraction amounts at or below ε are rounding noise of the
        // enclosure and need not shrink. Those rounds skip the stall test
        // and widen by a doubling number of ulps so the candidate can fit.
        let mut next = candidate.inflate(1.0 + cfg.theta);
        if delta <= cfg.epsilon {
            noise_rounds += 1;
            if noise_rounds > MAX_NOISE_ROUNDS {
                return Err(SearchZeroError::Stalled(t));
            }
            let pad = (next.hi().next_up() - next.hi()) * (1u64 << noise_rounds) as f64;
            next = Interval::new(next.lo() - pad, next.hi() + pad).hull(&next);
        } else if delta >= (1.0 - cfg.theta) * delta_bak {
            return Err(SearchZeroError::Stalled(t));
        }
        t = match t_init.intersect(&next) {
            Some(next) => next,
            None => return Err(SearchZeroError::Stalled(candidate)),
        };
    }
    Err(SearchZeroError::Stalled(t))
}

/// Truth value of the atom just after time 0 and the time from which roots
/// are searched.
///
/// When `f(X̃(0))` is exactly zero the sign right after 0 comes from the
/// first time derivative that does not vanish at 0, provided it keeps its
/// sign on some `[0, δ]`.
fn initial_state(
    b: &Boundary,
    sys: &ContinuousSystem,
    enc: &SignalEnclosure,
    end: f64,
) -> Result<(bool, f64), MonitorError> {
    let v0 = b.value(enc, Interval::ZERO)?;
    if v0.hi() < 0.0 {
        return Ok((true, 0.0));
    }
    if v0.lo() > 0.0 {
        return Ok((false, 0.0));
    }
    let straddle = MonitorError::InitialSign(v0);
    if v0 != Interval::ZERO || end <= 0.0 {
        return Err(straddle);
    }
    let mut g = b.df.clone();
    for _ in 0..MAX_INITIAL_ORDER {
        let g0 = g.eval_box(enc.u_box(), &enc.eval(Interval::ZERO))?;
        if g0 == Interval::ZERO {
            g = lie_derivative(&g, sys);
            continue;
        }
        if g0.contains_zero() {
            return Err(straddle);
        }
        let negative = g0.hi() < 0.0;
        let same_sign = |v: Interval| if negative { v.hi() < 0.0 } else { v.lo() > 0.0 };
        // Largest δ = end / 2^j on which both conditions hold.
        let mut delta = end;
        for _ in 0..60 {
            let over = g.eval_box(enc.u_box(), &enc.eval(Interval::new(0.0, delta)))?;
            if same_sign(over) && same_sign(b.value(enc, Interval::point(delta))?) {
                return Ok((negative, delta));
            }
            delta /= 2.0;
        }
        return Err(straddle);
    }
    Err(straddle)
}

/// Time after a certified root from which the next search starts, or `None`
/// when no further root exists before `end`.
///
/// The boundary function must be monotone between the root and the restart
/// point, so no root is skipped. The point is pushed out as far as
/// monotonicity can be certified: right next to a root `f` is tiny and the
/// root filter would make no progress.
fn restart_point(
    b: &Boundary,
    enc: &SignalEnclosure,
    root: Interval,
    end: f64,
) -> Result<Option<f64>, SearchZeroError> {
    let w = root.width().max(4.0 * (root.hi().next_up() - root.hi()));
    let mut best = None;
    for k in 0..64 {
        let r = root.hi() + w * ((1u64 << k) - 1) as f64;
        let r = r.min(end);
        if b.dt(enc, Interval::new(root.lo(), r))?.contains_zero() {
            break;
        }
        if r >= end {
            return Ok(None);
        }
        best = Some(r);
    }
    match best {
        Some(r) if !b.value(enc, Interval::point(r))?.contains_zero() => Ok(Some(r)),
        _ => Err(SearchZeroError::Restart(root)),
    }
}

/// Approximated set of consistent time intervals of `f < 0` over `[0, end]`.
/// The enclosure must already cover `end`.
pub fn monitor_atom(
    b: &Boundary,
    sys: &ContinuousSystem,
    enc: &SignalEnclosure,
    end: f64,
    cfg: &MonitorConfig,
    stats: &mut Stats,
) -> Result<ApproxSet, MonitorError> {
    let (holds, start) = initial_state(b, sys, enc, end)?;
    let mut bounds = Vec::new();
    if holds {
        bounds.push(Bound::lower(Interval::ZERO));
    }
    let mut polarity = !holds;
    let mut from = start;
    while from < end {
        let Some(root) = search_zero(b, enc, Interval::new(from, end), cfg, stats)? else {
            break;
        };
        bounds.push(Bound { s: root, polarity });
        polarity = !polarity;
        match restart_point(b, enc, root, end)? {
            Some(r) => from = r,
            None => break,
        }
    }
    Ok(normalize(bounds)?)
}

/// Runs [`monitor_atom`] for every atom in order.
pub fn monitor_ap(
    atoms: &[Expr],
    sys: &ContinuousSystem,
    enc: &SignalEnclosure,
    end: f64,
    cfg: &MonitorConfig,
    stats: &mut Stats,
) -> Result<Vec<ApproxSet>, MonitorError> {
    atoms
        .iter()
        .map(|f| monitor_atom(&Boundary::new(f.clone(), sys), sys, enc, end, cfg, stats))
        .collect()
}
