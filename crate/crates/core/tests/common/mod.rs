//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

pub mod suites;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use stlcert::interval::{Interval, IntervalBox};
use stlcert::model::ContinuousSystem;
use stlcert::stl::{Formula, TimeBound};
use stlcert::timesets::{ApproxSet, Bound};

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince integration of `sys` with parameters `u` from
/// `x0`, returning the state at each of the increasing `times`.
pub fn simulate(sys: &ContinuousSystem, u: &[f64], x0: &[f64], times: &[f64], tol: f64) -> Vec<Vec<f64>> {
    let rhs = |x: &[f64]| -> Vec<f64> { sys.flow.iter().map(|f| f.eval_f64(u, x)).collect() };
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut t = 0.0;
    let mut h: f64 = 1e-3;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target {
            let step = h.min(target - t);
            let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
            for s in 0..7 {
                let xs: Vec<f64> = (0..n)
                    .map(|i| x[i] + step * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>())
                    .collect();
                k.push(rhs(&xs));
            }
            let x5: Vec<f64> = (0..n)
                .map(|i| x[i] + step * (0..7).map(|s| B5[s] * k[s][i]).sum::<f64>())
                .collect();
            let err = (0..n)
                .map(|i| {
                    let e = step * (0..7).map(|s| (B5[s] - B4[s]) * k[s][i]).sum::<f64>();
                    e.abs() / (tol * (1.0 + x[i].abs().max(x5[i].abs())))
                })
                .fold(0.0, f64::max);
            if err <= 1.0 {
                t += step;
                x = x5;
            }
            h = step * (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        }
        out.push(x.clone());
    }
    out
}

pub fn sample_in(b: &IntervalBox, rng: &mut ChaCha8Rng) -> Vec<f64> {
    b.iter()
        .map(|iv| {
            if iv.is_point() {
                iv.lo()
            } else {
                rng.gen_range(iv.lo()..=iv.hi())
            }
        })
        .collect()
}

/// Truth of `phi` at every grid time `k·h`, for a signal sampled at those
/// times. Until uses the discrete reading "the right operand holds at some
/// grid time in the window and the left one at every grid time up to and
/// including it". Times whose window leaves the samples count as false.
pub fn grid_truth(phi: &Formula, states: &[Vec<f64>], u: &[f64], h: f64) -> Vec<bool> {
    let n = states.len();
    match phi {
        Formula::True => vec![true; n],
        Formula::Atom(f) => states.iter().map(|x| f.eval_f64(u, x) < 0.0).collect(),
        Formula::Not(a) => grid_truth(a, states, u, h).into_iter().map(|b| !b).collect(),
        Formula::Or(a, b) => grid_truth(a, states, u, h)
            .into_iter()
            .zip(grid_truth(b, states, u, h))
            .map(|(x, y)| x || y)
            .collect(),
        Formula::Until(t, a, b) => {
            let ta = grid_truth(a, states, u, h);
            let tb = grid_truth(b, states, u, h);
            until_on_grid(&ta, &tb, t.lo().mid(), t.hi().mid(), h)
        }
    }
}

/// Discrete until over boolean sequences sampled with spacing `h`.
pub fn until_on_grid(ta: &[bool], tb: &[bool], lo: f64, hi: f64, h: f64) -> Vec<bool> {
    let n = ta.len();
    let a_steps = (lo / h - 1e-9).ceil() as usize;
    let b_steps = (hi / h + 1e-9).floor() as usize;
    // prefix[i] = number of true tb before index i.
    let mut prefix = vec![0usize; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + usize::from(tb[i]);
    }
    // run_end[i] = first index ≥ i where ta is false.
    let mut run_end = vec![n; n + 1];
    for i in (0..n).rev() {
        run_end[i] = if ta[i] { run_end[i + 1] } else { i };
    }
    (0..n)
        .map(|k| {
            let first = k + a_steps;
            let last = (k + b_steps).min(run_end[k].saturating_sub(1)).min(n - 1);
            ta[k] && first <= last && first < n && prefix[last + 1] > prefix[first]
        })
        .collect()
}

/// A union of half-open intervals `[a, b)`, `b = ∞` allowed, with exactly
/// known endpoints.
#[derive(Debug, Clone)]
pub struct StepSignal {
    pub intervals: Vec<(f64, f64)>,
}

impl StepSignal {
    pub fn random(rng: &mut ChaCha8Rng, horizon: f64) -> StepSignal {
        let mut cuts: Vec<f64> = (0..rng.gen_range(0..8)).map(|_| rng.gen_range(0.0..horizon)).collect();
        if rng.gen_bool(0.3) {
            cuts.push(0.0);
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 0.05);
        let mut intervals = Vec::new();
        let mut i = 0;
        while i < cuts.len() {
            let end = cuts.get(i + 1).copied().unwrap_or(f64::INFINITY);
            intervals.push((cuts[i], end));
            i += 2;
        }
        StepSignal { intervals }
    }

    pub fn holds(&self, t: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= t && t < b)
    }

    /// Exact point-bound approximated set.
    pub fn to_set(&self) -> ApproxSet {
        let mut bounds = Vec::new();
        for &(a, b) in &self.intervals {
            bounds.push(Bound::lower(Interval::point(a)));
            if b.is_finite() {
                bounds.push(Bound::upper(Interval::point(b)));
            }
        }
        ApproxSet::from_bounds(bounds).expect("step signal bounds are canonical")
    }

    pub fn grid(&self, h: f64, n: usize) -> Vec<bool> {
        (0..n).map(|k| self.holds(k as f64 * h)).collect()
    }
}

/// Where `set` certainly holds and where it certainly fails at time `t`.
/// `None` inside a bound enclosure.
pub fn set_truth(set: &ApproxSet, t: f64) -> Option<bool> {
    let bounds = set.bounds();
    let mut inside = false;
    for b in &bounds {
        if b.s.contains(t) {
            return None;
        }
        if b.s.hi() < t {
            inside = b.polarity;
        }
    }
    Some(inside)
}

/// Grid points of `[0, upto]` at which the certain truth of `set` disagrees
/// with `grid`, skipping points within `margin` of any bound.
pub fn disagreements(set: &ApproxSet, grid: &[bool], h: f64, upto: f64, margin: f64) -> Vec<f64> {
    let bounds = set.bounds();
    let mut bad = Vec::new();
    for (k, &g) in grid.iter().enumerate() {
        let t = k as f64 * h;
        if t > upto {
            break;
        }
        if bounds.iter().any(|b| t >= b.s.lo() - margin && t <= b.s.hi() + margin) {
            continue;
        }
        if let Some(v) = set_truth(set, t) {
            if v != g {
                bad.push(t);
            }
        }
    }
    bad
}

pub fn time_bound(lo: f64, hi: f64) -> TimeBound {
    TimeBound::from_f64(lo, hi).expect("valid time bound")
}

/// One line of `tests/data/golden.txt`.
pub struct GoldenCase {
    pub expected: stlcert::monitor::Outcome,
    pub model: String,
    pub params: Vec<String>,
    pub system: ContinuousSystem,
    pub formula_text: String,
    pub formula: Formula,
}

pub fn golden_corpus() -> Vec<GoldenCase> {
    use stlcert::monitor::Outcome;
    let text = include_str!("../data/golden.txt");
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|line| {
            let cols: Vec<&str> = line.split('|').map(str::trim).collect();
            assert!(cols.len() >= 4, "bad corpus line {line}");
            let expected = match cols[0] {
                "valid" => Outcome::Valid,
                "unsat" => Outcome::Unsat,
                "unknown" => Outcome::Unknown,
                other => panic!("bad outcome {other}"),
            };
            let model = cols[1].to_string();
            let mut system = stlcert::model::builtin(&model).expect("built-in model");
            let params: Vec<String> = cols[2]
                .split_whitespace()
                .filter(|p| *p != "-")
                .map(String::from)
                .collect();
            let mut u = system.param_domain.clone().into_vec();
            for p in &params {
                let (name, value) = p.split_once('=').expect("NAME=VALUE");
                let k = system.params.iter().position(|n| n == name).expect("known parameter");
                let vals: Vec<f64> = value.split(',').map(|v| v.parse().unwrap()).collect();
                u[k] = Interval::new(vals[0], *vals.last().unwrap());
            }
            system = system.with_param_domain(IntervalBox::new(u)).unwrap();
            // The formula column may itself contain `|`.
            let formula_text = cols[3..].join(" | ");
            let formula = stlcert::stl::parse_formula(&formula_text, &system.scope()).unwrap();
            GoldenCase {
                expected,
                model,
                params,
                system,
                formula_text,
                formula,
            }
        })
        .collect()
}
