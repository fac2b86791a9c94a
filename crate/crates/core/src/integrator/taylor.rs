//! Taylor coefficients of ODE solutions by automatic differentiation.
//!
//! The flow is compiled into a straight-line tape. Coefficients of every tape
//! node are produced order by order with the usual recurrences, over any
//! scalar implementing [`TaylorScalar`]: plain intervals for solution
//! coefficients, [`Dual`] intervals for their sensitivities to the initial
//! value.

use crate::interval::Interval;
use crate::model::{ContinuousSystem, Expr};

/// Arithmetic needed by the coefficient recurrences.
pub(crate) trait TaylorScalar: Clone {
    /// A constant shaped like `self`.
    fn lift(&self, c: Interval) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn sqr(&self) -> Self {
        self.mul(self)
    }
    fn neg(&self) -> Self;
    fn div(&self, o: &Self) -> Option<Self>;
    fn mul_int(&self, k: u32) -> Self;
    fn div_int(&self, k: u32) -> Self;
    fn exp(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
}

impl TaylorScalar for Interval {
    fn lift(&self, c: Interval) -> Self {
        c
    }
    fn add(&self, o: &Self) -> Self {
        *self + *o
    }
    fn sub(&self, o: &Self) -> Self {
        *self - *o
    }
    fn mul(&self, o: &Self) -> Self {
        *self * *o
    }
    fn sqr(&self) -> Self {
        Interval::sqr(self)
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn div(&self, o: &Self) -> Option<Self> {
        self.checked_div(o)
    }
    fn mul_int(&self, k: u32) -> Self {
        self.scale(k as f64)
    }
    fn div_int(&self, k: u32) -> Self {
        Interval::div_int(self, k)
    }
    fn exp(&self) -> Self {
        Interval::exp(self)
    }
    fn sin(&self) -> Self {
        Interval::sin(self)
    }
    fn cos(&self) -> Self {
        Interval::cos(self)
    }
}

/// An interval value with an interval gradient (forward-mode derivative).
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Dual {
    pub v: Interval,
    pub d: Vec<Interval>,
}

impl Dual {
    pub fn variable(v: Interval, index: usize, dim: usize) -> Dual {
        let mut d = vec![Interval::ZERO; dim];
        d[index] = Interval::ONE;
        Dual { v, d }
    }

    fn map_d(&self, f: impl Fn(&Interval) -> Interval) -> Vec<Interval> {
        self.d.iter().map(f).collect()
    }
}

impl TaylorScalar for Dual {
    fn lift(&self, c: Interval) -> Self {
        Dual {
            v: c,
            d: vec![Interval::ZERO; self.d.len()],
        }
    }
    fn add(&self, o: &Self) -> Self {
        Dual {
            v: self.v + o.v,
            d: self.d.iter().zip(&o.d).map(|(a, b)| *a + *b).collect(),
        }
    }
    fn sub(&self, o: &Self) -> Self {
        Dual {
            v: self.v - o.v,
            d: self.d.iter().zip(&o.d).map(|(a, b)| *a - *b).collect(),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        Dual {
            v: self.v * o.v,
            d: self.d.iter().zip(&o.d).map(|(a, b)| *a * o.v + self.v * *b).collect(),
        }
    }
    fn neg(&self) -> Self {
        Dual {
            v: -self.v,
            d: self.map_d(|a| -*a),
        }
    }
    fn div(&self, o: &Self) -> Option<Self> {
        let q = self.v.checked_div(&o.v)?;
        let d = self
            .d
            .iter()
            .zip(&o.d)
            .map(|(a, b)| (*a - q * *b).checked_div(&o.v))
            .collect::<Option<Vec<_>>>()?;
        Some(Dual { v: q, d })
    }
    fn mul_int(&self, k: u32) -> Self {
        Dual {
            v: self.v.scale(k as f64),
            d: self.map_d(|a| a.scale(k as f64)),
        }
    }
    fn div_int(&self, k: u32) -> Self {
        Dual {
            v: self.v.div_int(k),
            d: self.map_d(|a| a.div_int(k)),
        }
    }
    fn exp(&self) -> Self {
        let e = self.v.exp();
        Dual {
            v: e,
            d: self.map_d(|a| *a * e),
        }
    }
    fn sin(&self) -> Self {
        let c = self.v.cos();
        Dual {
            v: self.v.sin(),
            d: self.map_d(|a| *a * c),
        }
    }
    fn cos(&self) -> Self {
        let s = -self.v.sin();
        Dual {
            v: self.v.cos(),
            d: self.map_d(|a| *a * s),
        }
    }
}

#[derive(Debug, Clone)]
enum Op {
    Var(usize),
    Const(Interval),
    Neg(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Exp(usize),
    // Sine and cosine of the same argument are always emitted as a pair.
    Sin { arg: usize, cos: usize },
    Cos { arg: usize, sin: usize },
}

/// Straight-line program computing the right-hand side of the extended
/// system `z = (x, u)`, `x' = F(u, x)`, `u' = 0`.
#[derive(Debug, Clone)]
pub(crate) struct Tape {
    ops: Vec<Op>,
    outputs: Vec<usize>,
    n_vars: usize,
    dim: usize,
}

impl Tape {
    pub fn compile(sys: &ContinuousSystem) -> Tape {
        let n = sys.n_vars();
        let mut tape = Tape {
            ops: Vec::new(),
            outputs: Vec::new(),
            n_vars: n,
            dim: n + sys.n_params(),
        };
        for i in 0..tape.dim {
            tape.ops.push(Op::Var(i));
        }
        for e in &sys.flow {
            let out = tape.emit(e, n);
            tape.outputs.push(out);
        }
        tape
    }

    /// Extended state dimension (variables followed by parameters).
    pub fn dim(&self) -> usize {
        self.dim
    }

    fn push(&mut self, op: Op) -> usize {
        self.ops.push(op);
        self.ops.len() - 1
    }

    fn emit(&mut self, e: &Expr, n: usize) -> usize {
        match e {
            Expr::Const(c) => self.push(Op::Const(*c)),
            Expr::Var(i) => *i,
            Expr::Param(i) => n + *i,
            Expr::Neg(a) => {
                let a = self.emit(a, n);
                self.push(Op::Neg(a))
            }
            Expr::Add(a, b) => {
                let (a, b) = (self.emit(a, n), self.emit(b, n));
                self.push(Op::Add(a, b))
            }
            Expr::Sub(a, b) => {
                let (a, b) = (self.emit(a, n), self.emit(b, n));
                self.push(Op::Sub(a, b))
            }
            Expr::Mul(a, b) => {
                let (a, b) = (self.emit(a, n), self.emit(b, n));
                self.push(Op::Mul(a, b))
            }
            Expr::Div(a, b) => {
                let (a, b) = (self.emit(a, n), self.emit(b, n));
                self.push(Op::Div(a, b))
            }
            Expr::Pow(a, k) => {
                let base = self.emit(a, n);
                if *k == 0 {
                    return self.push(Op::Const(Interval::ONE));
                }
                let p = self.emit_pow(base, k.unsigned_abs());
                if *k < 0 {
                    let one = self.push(Op::Const(Interval::ONE));
                    self.push(Op::Div(one, p))
                } else {
                    p
                }
            }
            Expr::Exp(a) => {
                let a = self.emit(a, n);
                self.push(Op::Exp(a))
            }
            Expr::Sin(a) | Expr::Cos(a) => {
                let arg = self.emit(a, n);
                let s = self.ops.len();
                self.ops.push(Op::Sin { arg, cos: s + 1 });
                self.ops.push(Op::Cos { arg, sin: s });
                if matches!(e, Expr::Sin(_)) {
                    s
                } else {
                    s + 1
                }
            }
        }
    }

    // Binary powering by repeated multiplication.
    fn emit_pow(&mut self, base: usize, k: u32) -> usize {
        if k == 1 {
            return base;
        }
        let half = self.emit_pow(base, k / 2);
        let sq = self.push(Op::Mul(half, half));
        if k % 2 == 1 {
            self.push(Op::Mul(sq, base))
        } else {
            sq
        }
    }

    fn node_coeff<S: TaylorScalar>(&self, node: usize, k: usize, c: &[Vec<S>], z: &[Vec<S>]) -> Option<S> {
        let zero = || z[0][0].lift(Interval::ZERO);
        Some(match &self.ops[node] {
            Op::Var(i) => z[*i][k].clone(),
            Op::Const(v) => {
                if k == 0 {
                    z[0][0].lift(*v)
                } else {
                    zero()
                }
            }
            Op::Neg(a) => c[*a][k].neg(),
            Op::Add(a, b) => c[*a][k].add(&c[*b][k]),
            Op::Sub(a, b) => c[*a][k].sub(&c[*b][k]),
            Op::Mul(ia, ib) => {
                let (a, b) = (&c[*ia], &c[*ib]);
                if ia == ib && k == 0 {
                    a[0].sqr()
                } else if ia == ib {
                    // Squaring: use the symmetric half of the convolution.
                    let mut acc = zero();
                    for i in 0..k.div_ceil(2) {
                        acc = acc.add(&a[i].mul(&a[k - i]));
                    }
                    acc = acc.mul_int(2);
                    if k.is_multiple_of(2) {
                        acc = acc.add(&a[k / 2].mul(&a[k / 2]));
                    }
                    acc
                } else {
                    let mut acc = a[0].mul(&b[k]);
                    for i in 1..=k {
                        acc = acc.add(&a[i].mul(&b[k - i]));
                    }
                    acc
                }
            }
            Op::Div(a, b) => {
                let (a, b) = (&c[*a], &c[*b]);
                let q = &c[node];
                let mut num = a[k].clone();
                for i in 0..k {
                    num = num.sub(&q[i].mul(&b[k - i]));
                }
                num.div(&b[0])?
            }
            Op::Exp(a) => {
                let (a, e) = (&c[*a], &c[node]);
                if k == 0 {
                    a[0].exp()
                } else {
                    let mut acc = zero();
                    for i in 1..=k {
                        acc = acc.add(&a[i].mul(&e[k - i]).mul_int(i as u32));
                    }
                    acc.div_int(k as u32)
                }
            }
            Op::Sin { arg, cos } => {
                let (a, co) = (&c[*arg], &c[*cos]);
                if k == 0 {
                    a[0].sin()
                } else {
                    let mut acc = zero();
                    for i in 1..=k {
                        acc = acc.add(&a[i].mul(&co[k - i]).mul_int(i as u32));
                    }
                    acc.div_int(k as u32)
                }
            }
            Op::Cos { arg, sin } => {
                let (a, si) = (&c[*arg], &c[*sin]);
                if k == 0 {
                    a[0].cos()
                } else {
                    let mut acc = zero();
                    for i in 1..=k {
                        acc = acc.add(&a[i].mul(&si[k - i]).mul_int(i as u32));
                    }
                    acc.div_int(k as u32).neg()
                }
            }
        })
    }

    /// Taylor coefficients `z_0..=z_order` (scaled derivatives `z^(k)/k!`) of
    /// the solution through `z0`. Returns `None` if a division meets a
    /// denominator containing zero.
    pub fn coefficients<S: TaylorScalar>(&self, z0: Vec<S>, order: usize) -> Option<Vec<Vec<S>>> {
        debug_assert_eq!(z0.len(), self.dim);
        let mut z: Vec<Vec<S>> = z0.into_iter().map(|v| vec![v]).collect();
        let mut c: Vec<Vec<S>> = vec![Vec::with_capacity(order); self.ops.len()];
        for k in 0..order {
            for node in 0..self.ops.len() {
                let v = self.node_coeff(node, k, &c, &z)?;
                c[node].push(v);
            }
            for (i, zi) in z.iter_mut().enumerate() {
                let next = if i < self.n_vars {
                    c[self.outputs[i]][k].div_int(k as u32 + 1)
                } else {
                    zi[0].lift(Interval::ZERO)
                };
                zi.push(next);
            }
        }
        Some(z)
    }

    /// The right-hand side evaluated over a box of the extended state.
    pub fn eval(&self, z: &[Interval]) -> Option<Vec<Interval>> {
        let mut c: Vec<Vec<Interval>> = vec![Vec::with_capacity(1); self.ops.len()];
        let zz: Vec<Vec<Interval>> = z.iter().map(|v| vec![*v]).collect();
        for node in 0..self.ops.len() {
            let v = self.node_coeff(node, 0, &c, &zz)?;
            c[node].push(v);
        }
        let mut out: Vec<Interval> = self.outputs.iter().map(|&o| c[o][0]).collect();
        out.resize(self.dim, Interval::ZERO);
        Some(out)
    }
}
