//! Validated integration of parameterized ODEs.
//!
//! Parameters are appended to the state as constants (`u' = 0`), so the
//! integrator works on `z = (x, u)`. Each step
//!
//! 1. certifies an a-priori box `B` with the first-order Picard test
//!    `z_j + [0, h] F(B) ⊆ B`,
//! 2. expands the solution from the reference point `ẑ_j` to order `K - 1`
//!    with the Lagrange remainder `h^K z_K(B)`,
//! 3. propagates the set `ẑ_j + A_j r_j` through the mean-value form of the
//!    Taylor map, re-orthogonalizing the frame `A_j` by QR (Lohner's method).
//!
//! Every step keeps its coefficients so that enclosures at any time inside
//! the step can be evaluated without re-integrating.
#![allow(clippy::needless_range_loop)]

mod linalg;
pub(crate) mod taylor;

use std::io::{self, Write};

use thiserror::Error;

use crate::interval::{Interval, IntervalBox};
use crate::model::ContinuousSystem;
use linalg::{inverse_enclosure, mul_ii, mul_ip, mul_iv, mul_pv, orthonormal_frame, Mat};
use taylor::{Dual, Tape};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Taylor order `K`; the series has `K` terms plus the remainder.
    pub order: usize,
    /// Target magnitude of the last series term, relative to `max(1, |x|)`.
    pub tolerance: f64,
    /// Smallest step size tried before giving up.
    pub t_min: f64,
    /// Largest step size.
    pub h_max: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            order: 15,
            tolerance: 1e-17,
            t_min: 1e-14,
            h_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("no step could be certified at t = {t} with step size at least {t_min:e}")]
    StepTooSmall { t: f64, t_min: f64 },
    #[error("enclosure left the state domain after t = {t}")]
    BlowUp { t: f64 },
    #[error("flow could not be evaluated over the enclosure at t = {t}")]
    Evaluation { t: f64 },
}

impl IntegrationError {
    /// Time up to which the enclosure had been certified.
    pub fn reached(&self) -> f64 {
        match self {
            IntegrationError::StepTooSmall { t, .. }
            | IntegrationError::BlowUp { t }
            | IntegrationError::Evaluation { t } => *t,
        }
    }
}

/// One certified integration step over `[t0, t1]`.
#[derive(Debug, Clone)]
pub struct StepModel {
    t0: f64,
    t1: f64,
    h: Interval,
    // Series coefficients at the reference point, orders 0..K.
    coeffs: Vec<Vec<Interval>>,
    // Coefficient of order K over the a-priori box.
    remainder: Vec<Interval>,
    // Sensitivity coefficients times the frame, orders 0..K.
    sens: Vec<Mat<Interval>>,
    r: Vec<Interval>,
    apriori: Vec<Interval>,
    hull: Vec<Interval>,
    end: Vec<Interval>,
    n_vars: usize,
}

impl StepModel {
    pub fn span(&self) -> Interval {
        Interval::new(self.t0, self.t1)
    }

    /// Box certified to contain the solution over the whole step.
    pub fn apriori(&self) -> IntervalBox {
        IntervalBox::new(self.apriori[..self.n_vars].to_vec())
    }

    /// Order-`K` Taylor coefficient over the a-priori box.
    pub fn remainder(&self) -> IntervalBox {
        IntervalBox::new(self.remainder[..self.n_vars].to_vec())
    }

    /// Enclosure over the whole step.
    pub fn hull(&self) -> IntervalBox {
        IntervalBox::new(self.hull[..self.n_vars].to_vec())
    }

    /// Enclosure at `t1`.
    pub fn end(&self) -> IntervalBox {
        IntervalBox::new(self.end[..self.n_vars].to_vec())
    }

    // Enclosure at local times `tau ⊆ [0, h]`, extended state.
    fn eval_local(&self, tau: Interval) -> Vec<Interval> {
        let k = self.coeffs.len();
        let dim = self.apriori.len();
        let mut val = self.remainder.clone();
        for order in (0..k).rev() {
            for i in 0..dim {
                val[i] = val[i] * tau + self.coeffs[order][i];
            }
        }
        let mut m = self.sens[k - 1].clone();
        for order in (0..k - 1).rev() {
            m = Mat {
                n: dim,
                data: m
                    .data
                    .iter()
                    .zip(&self.sens[order].data)
                    .map(|(a, b)| *a * tau + *b)
                    .collect(),
            };
        }
        let spread = mul_iv(&m, &self.r);
        val.iter()
            .zip(&spread)
            .zip(&self.apriori)
            .map(|((v, s), b)| (*v + *s).intersect(b).unwrap_or(*b))
            .collect()
    }
}

// The set `x̂ + A r`, also bounded by the box `x`.
#[derive(Debug, Clone)]
struct Frame {
    x_hat: Vec<f64>,
    a: Mat<f64>,
    r: Vec<Interval>,
    x: Vec<Interval>,
}

enum Attempt {
    Accept(Box<StepModel>, Frame),
    Shrink(f64),
    Fail(IntegrationError),
}

/// Enclosure of all solutions for parameters in `u_box` and initial states in
/// `init_box`, extended step by step on demand.
#[derive(Debug, Clone)]
pub struct SignalEnclosure {
    system: ContinuousSystem,
    u_box: IntervalBox,
    init_box: IntervalBox,
    config: IntegratorConfig,
    tape: Tape,
    steps: Vec<StepModel>,
    frame: Frame,
    horizon: f64,
    last_h: Option<f64>,
    failure: Option<IntegrationError>,
}

impl SignalEnclosure {
    /// Starts an enclosure at time 0. Panics if the box dimensions do not
    /// match the system.
    pub fn new(system: &ContinuousSystem, u_box: IntervalBox, init_box: IntervalBox, config: IntegratorConfig) -> Self {
        assert_eq!(u_box.dim(), system.n_params(), "parameter box dimension");
        assert_eq!(init_box.dim(), system.n_vars(), "initial box dimension");
        let tape = Tape::compile(system);
        let x: Vec<Interval> = init_box.iter().chain(u_box.iter()).copied().collect();
        let x_hat: Vec<f64> = x.iter().map(Interval::mid).collect();
        let r = x.iter().zip(&x_hat).map(|(v, m)| v.sub_scalar(*m)).collect();
        let dim = x.len();
        SignalEnclosure {
            system: system.clone(),
            u_box,
            init_box,
            config,
            tape,
            steps: Vec::new(),
            frame: Frame {
                x_hat,
                a: Mat::<f64>::identity(dim),
                r,
                x,
            },
            horizon: 0.0,
            last_h: None,
            failure: None,
        }
    }

    pub fn system(&self) -> &ContinuousSystem {
        &self.system
    }

    pub fn u_box(&self) -> &IntervalBox {
        &self.u_box
    }

    pub fn init_box(&self) -> &IntervalBox {
        &self.init_box
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.config
    }

    /// Time up to which the enclosure is certified.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> &[StepModel] {
        &self.steps
    }

    /// The error that stopped integration, if any.
    pub fn failure(&self) -> Option<&IntegrationError> {
        self.failure.as_ref()
    }

    /// Appends steps until the horizon reaches `target`. After a failure the
    /// enclosure stays valid up to the reached horizon and every further call
    /// returns the same error.
    pub fn extend(&mut self, target: f64) -> Result<(), IntegrationError> {
        while self.horizon < target {
            if let Some(err) = &self.failure {
                return Err(err.clone());
            }
            if let Err(err) = self.step(target) {
                self.failure = Some(err.clone());
                return Err(err);
            }
        }
        Ok(())
    }

    fn state_dim(&self) -> usize {
        self.system.n_vars()
    }

    // Picard test `x + [0, h] F(B) ⊆ B`, returning the tightened box.
    fn apriori(&self, x: &[Interval], h: Interval) -> Option<Vec<Interval>> {
        let tau = Interval::new(0.0, h.hi());
        let picard = |b: &[Interval]| -> Option<Vec<Interval>> {
            let f = self.tape.eval(b)?;
            Some(x.iter().zip(&f).map(|(xi, fi)| *xi + tau * *fi).collect())
        };
        let mut b: Vec<Interval> = picard(x)?.iter().map(|v| v.inflate(1.5)).collect();
        for _ in 0..10 {
            let nb = picard(&b)?;
            if nb.iter().zip(&b).all(|(n, o)| n.subset_of(o)) {
                return Some(nb);
            }
            b = nb.iter().map(|n| n.inflate(1.2)).collect();
        }
        None
    }

    fn step(&mut self, target: f64) -> Result<(), IntegrationError> {
        let t0 = self.horizon;
        let k = self.config.order;
        let dim = self.tape.dim();
        let n = self.state_dim();
        let eval_err = IntegrationError::Evaluation { t: t0 };
        let frame = &self.frame;

        let point: Vec<Interval> = frame.x_hat.iter().map(|&v| Interval::point(v)).collect();
        let t_coeffs = self.tape.coefficients(point, k).ok_or(eval_err.clone())?;

        // Sensitivities over the hull of the set and its reference point.
        let around: Vec<Interval> = frame
            .x
            .iter()
            .zip(&frame.x_hat)
            .map(|(b, m)| b.hull(&Interval::point(*m)))
            .collect();
        let seeds = (0..dim).map(|i| Dual::variable(around[i], i, dim)).collect();
        let duals = self.tape.coefficients(seeds, k - 1).ok_or(eval_err.clone())?;
        let y: Vec<Mat<Interval>> = (0..k)
            .map(|order| {
                let mut m = Mat::filled(dim, Interval::ZERO);
                for i in 0..dim {
                    for j in 0..dim {
                        m.set(i, j, duals[i][order].d[j]);
                    }
                }
                m
            })
            .collect();

        // Step size from the decay of the last series terms.
        let scale = frame.x_hat[..n].iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let tol = self.config.tolerance * scale;
        let mut h = self.config.h_max;
        for order in [k - 1, k] {
            let norm = (0..n).map(|i| t_coeffs[i][order].mag()).fold(0.0, f64::max);
            if norm > 0.0 {
                h = h.min((tol / norm).powf(1.0 / order as f64));
            }
        }
        if let Some(last) = self.last_h {
            h = h.min(2.0 * last);
        }

        loop {
            if h < self.config.t_min {
                return Err(IntegrationError::StepTooSmall {
                    t: t0,
                    t_min: self.config.t_min,
                });
            }
            let mut t1 = t0 + h;
            if t1 >= target || target - t1 < self.config.t_min {
                t1 = target;
            }
            let hi = Interval::point(t1) - Interval::point(t0);
            match self.try_step(t0, t1, hi, tol, &t_coeffs, &y) {
                Attempt::Accept(step, next) => {
                    self.last_h = Some(t1 - t0);
                    self.frame = next;
                    self.horizon = t1;
                    self.steps.push(*step);
                    return Ok(());
                }
                Attempt::Shrink(factor) => h = (t1 - t0) * factor,
                Attempt::Fail(err) => return Err(err),
            }
        }
    }

    fn try_step(
        &self,
        t0: f64,
        t1: f64,
        h: Interval,
        tol: f64,
        t_coeffs: &[Vec<Interval>],
        y: &[Mat<Interval>],
    ) -> Attempt {
        let k = self.config.order;
        let dim = self.tape.dim();
        let n = self.state_dim();
        let frame = &self.frame;
        let Some(b) = self.apriori(&frame.x, h) else {
            return Attempt::Shrink(0.5);
        };
        let Some(rem_coeffs) = self.tape.coefficients(b.clone(), k) else {
            return Attempt::Shrink(0.5);
        };
        let remainder: Vec<Interval> = (0..dim).map(|i| rem_coeffs[i][k]).collect();
        // Keep the remainder term near the tolerance; over the wide a-priori
        // box it is usually far larger than the pointwise series suggests.
        let hk = h.powi(k as u32);
        let rem_width = remainder[..n].iter().map(|r| (*r * hk).width()).fold(0.0, f64::max);
        if rem_width > 4.0 * tol {
            let factor = (tol / rem_width).powf(1.0 / k as f64);
            return Attempt::Shrink(factor.clamp(0.1, 0.9));
        }

        // Series at the reference point and the mean-value matrix at `h`.
        let mut v = remainder.clone();
        for order in (0..k).rev() {
            for i in 0..dim {
                v[i] = v[i] * h + t_coeffs[i][order];
            }
        }
        let mut s = y[k - 1].clone();
        for order in (0..k - 1).rev() {
            s = Mat {
                n: dim,
                data: s.data.iter().zip(&y[order].data).map(|(a, c)| *a * h + *c).collect(),
            };
        }
        let sa = mul_ip(&s, &frame.a);
        let x_hat: Vec<f64> = v.iter().map(Interval::mid).collect();
        let weights: Vec<f64> = frame.r.iter().map(|r| r.width().max(f64::MIN_POSITIVE)).collect();
        let q = orthonormal_frame(&sa.mid(), &weights);
        let Some(q_inv) = inverse_enclosure(&q) else {
            return Attempt::Shrink(0.5);
        };
        let offset: Vec<Interval> = v.iter().zip(&x_hat).map(|(vi, m)| vi.sub_scalar(*m)).collect();
        let r_lin = mul_iv(&mul_ii(&q_inv, &sa), &frame.r);
        let r_off = mul_iv(&q_inv, &offset);
        let r: Vec<Interval> = r_lin.iter().zip(&r_off).map(|(a, c)| *a + *c).collect();

        let direct: Vec<Interval> = v.iter().zip(mul_iv(&sa, &frame.r)).map(|(a, c)| *a + c).collect();
        let lohner: Vec<Interval> = mul_pv(&q, &r)
            .iter()
            .zip(&x_hat)
            .map(|(a, m)| a.add_scalar(*m))
            .collect();
        let mut end = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut e = direct[i].intersect(&lohner[i]).and_then(|e| e.intersect(&b[i]));
            if i >= n {
                e = e.and_then(|e| e.intersect(&self.u_box[i - n]));
            }
            // Disjoint enclosures of the same set cannot happen in exact
            // arithmetic; treat it like any other uncertified step.
            let Some(e) = e else {
                return Attempt::Shrink(0.5);
            };
            end.push(e);
        }
        for i in 0..n {
            if !end[i].subset_of(&self.system.state_domain[i]) {
                return Attempt::Fail(IntegrationError::BlowUp { t: t0 });
            }
        }

        let sens: Vec<Mat<Interval>> = y.iter().map(|m| mul_ip(m, &frame.a)).collect();
        let mut step = StepModel {
            t0,
            t1,
            h,
            coeffs: t_coeffs[..]
                .iter()
                .fold(vec![Vec::with_capacity(dim); k], |mut acc, zi| {
                    for (order, c) in zi.iter().take(k).enumerate() {
                        acc[order].push(*c);
                    }
                    acc
                }),
            remainder,
            sens,
            r: frame.r.clone(),
            apriori: b,
            hull: Vec::new(),
            end: end.clone(),
            n_vars: n,
        };
        step.hull = step.eval_local(Interval::new(0.0, h.hi()));
        Attempt::Accept(Box::new(step), Frame { x_hat, a: q, r, x: end })
    }

    fn initial_box(&self) -> Vec<Interval> {
        self.init_box.iter().copied().collect()
    }

    /// Enclosure of every solution value at times in `t`.
    ///
    /// Panics unless `t ⊆ [0, horizon]`.
    pub fn eval(&self, t: Interval) -> IntervalBox {
        assert!(
            t.lo() >= 0.0 && t.hi() <= self.horizon,
            "time {t:?} outside the integrated range [0, {}]",
            self.horizon
        );
        let n = self.state_dim();
        if t.hi() == 0.0 || self.steps.is_empty() {
            return IntervalBox::new(self.initial_box());
        }
        let first = self.steps.partition_point(|s| s.t1 < t.lo());
        let mut acc: Option<Vec<Interval>> = None;
        for step in self.steps[first..].iter().take_while(|s| s.t0 <= t.hi()) {
            let part = if t.lo() <= step.t0 && t.hi() >= step.t1 {
                step.hull.clone()
            } else {
                let lo = t.lo().max(step.t0);
                let hi = t.hi().min(step.t1);
                let tau = (Interval::new(lo, hi) - Interval::point(step.t0))
                    .intersect(&Interval::new(0.0, step.h.hi()))
                    .unwrap_or(Interval::ZERO);
                step.eval_local(tau)
            };
            acc = Some(match acc {
                None => part,
                Some(prev) if t.is_point() => prev
                    .iter()
                    .zip(&part)
                    .map(|(a, b)| a.intersect(b).unwrap_or_else(|| a.hull(b)))
                    .collect(),
                Some(prev) => prev.iter().zip(&part).map(|(a, b)| a.hull(b)).collect(),
            });
        }
        let mut out = acc.expect("time range overlaps a step");
        if t.lo() == 0.0 {
            for (o, x0) in out.iter_mut().zip(self.initial_box()) {
                *o = o.hull(&x0);
            }
        }
        out.truncate(n);
        IntervalBox::new(out)
    }

    /// Writes one CSV row per step endpoint: `t_lo,t_hi` followed by the
    /// lower and upper bound of every variable.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        write!(w, "t_lo,t_hi")?;
        for name in &self.system.vars {
            write!(w, ",{name}_lo,{name}_hi")?;
        }
        writeln!(w)?;
        let row = |w: &mut dyn Write, t: f64, b: &[Interval]| -> io::Result<()> {
            write!(w, "{t:?},{t:?}")?;
            for v in b {
                write!(w, ",{:?},{:?}", v.lo(), v.hi())?;
            }
            writeln!(w)
        };
        row(&mut w, 0.0, &self.initial_box())?;
        for s in &self.steps {
            row(&mut w, s.t1, &s.end[..s.n_vars])?;
        }
        Ok(())
    }
}
