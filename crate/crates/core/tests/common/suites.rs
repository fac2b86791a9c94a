//! Property checks shared by the test suites and the acceptance run. Each
//! one panics on the first violation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stlcert::integrator::{IntegratorConfig, SignalEnclosure};
use stlcert::interval::{ext_div, Interval, IntervalBox};
use stlcert::model::{ContinuousSystem, Expr};
use stlcert::monitor::{monitor_stl, propagate, MonitorConfig, Outcome};
use stlcert::stl::{Formula, TimeBound};
use stlcert::timesets::{is_canonical, ApproxSet};

use super::{disagreements, grid_truth, sample_in, simulate, until_on_grid, StepSignal};

pub fn random_interval(rng: &mut ChaCha8Rng) -> Interval {
    let scale = 10f64.powi(rng.gen_range(-3..4));
    let a = rng.gen_range(-1.0..1.0) * scale;
    let b = if rng.gen_bool(0.1) {
        a
    } else {
        rng.gen_range(-1.0..1.0) * scale
    };
    Interval::new(a.min(b), a.max(b))
}

fn sample(rng: &mut ChaCha8Rng, iv: &Interval) -> f64 {
    match rng.gen_range(0..10) {
        0 => iv.lo(),
        1 => iv.hi(),
        _ => rng.gen_range(iv.lo()..=iv.hi()),
    }
}

/// Violations of `x ∘ y ∈ a ∘ b` over `pairs` random interval pairs with
/// `points` samples each.
pub fn containment_violations(pairs: usize, points: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    let mut check = |name: &str, r: Interval, v: f64, a: Interval, b: Interval| {
        if !r.contains(v) {
            bad.push(format!("{name}: {v} not in {r:?} for {a:?}, {b:?}"));
        }
    };
    for _ in 0..pairs {
        let a = random_interval(&mut rng);
        let b = random_interval(&mut rng);
        let sum = a + b;
        let diff = a - b;
        let prod = a * b;
        let quot = b.checked_div(&a);
        let (sa, ea, na, ca) = (a.sqr(), a.exp(), a.sin(), a.cos());
        let p3 = a.powi(3);
        for _ in 0..points {
            let x = sample(&mut rng, &a);
            let y = sample(&mut rng, &b);
            check("add", sum, x + y, a, b);
            check("sub", diff, x - y, a, b);
            check("mul", prod, x * y, a, b);
            if let Some(q) = quot {
                check("div", q, y / x, b, a);
            }
            check("sqr", sa, x * x, a, a);
            check("powi", p3, x.powi(3), a, a);
            if x < 700.0 {
                check("exp", ea, x.exp(), a, a);
            }
            check("sin", na, x.sin(), a, a);
            check("cos", ca, x.cos(), a, a);
        }
    }
    bad
}

/// Checks `ext_div` against a dense feasibility scan on `cases` random inputs.
pub fn ext_div_oracle(cases: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let a = random_interval(&mut rng);
        let b = if case % 2 == 0 {
            // Divisors straddling zero exercise the split case.
            let lo = -rng.gen_range(0.0..3.0);
            Interval::new(lo, rng.gen_range(0.0..3.0))
        } else {
            random_interval(&mut rng)
        };
        let d = Interval::new(-rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0));
        let r = ext_div(&a, &b, &d);
        if let Some(r) = r {
            assert!(r.subset_of(&d), "{r:?} not in {d:?}");
        }
        for k in 0..=400 {
            let delta = (d.lo() + d.width() * k as f64 / 400.0).min(d.hi());
            // δ is feasible iff the segment {βδ : β ∈ b} meets a.
            let (p, q) = (b.lo() * delta, b.hi() * delta);
            let feasible = p.min(q) <= a.hi() && p.max(q) >= a.lo();
            if feasible {
                assert!(
                    r.is_some_and(|r| r.contains(delta)),
                    "feasible {delta} lost: a={a:?} b={b:?} d={d:?} r={r:?}"
                );
            }
        }
    }
}

/// Step signal whose cut points are `k/128 + offset`, so that bounds coming
/// from different signals never coincide and all arithmetic is exact.
fn lattice_signal(rng: &mut ChaCha8Rng, offset: f64) -> StepSignal {
    let mut ks: Vec<i64> = (0..rng.gen_range(0..8)).map(|_| rng.gen_range(0..20 * 128)).collect();
    ks.sort();
    ks.dedup();
    let mut cuts: Vec<f64> = ks.iter().map(|&k| k as f64 / 128.0 + offset).collect();
    if rng.gen_bool(0.25) {
        cuts.insert(0, 0.0);
    }
    let intervals = cuts
        .chunks(2)
        .map(|c| (c[0], c.get(1).copied().unwrap_or(f64::INFINITY)))
        .collect();
    StepSignal { intervals }
}

fn lattice_bound(rng: &mut ChaCha8Rng) -> TimeBound {
    let lo = rng.gen_range(0..4 * 128) as f64 / 128.0;
    let w = rng.gen_range(1..4 * 128) as f64 / 128.0;
    TimeBound::from_f64(lo, lo + w).unwrap()
}

/// Random formula using each leaf exactly once.
fn random_formula(rng: &mut ChaCha8Rng, leaves: &[usize], depth: usize) -> Formula {
    if leaves.len() == 1 && (depth == 0 || rng.gen_bool(0.3)) {
        let atom = Formula::Atom(Expr::Var(leaves[0]));
        return if rng.gen_bool(0.3) { Formula::not(atom) } else { atom };
    }
    let depth = depth.saturating_sub(1);
    if leaves.len() == 1 || rng.gen_bool(0.2) {
        let a = random_formula(rng, leaves, depth);
        return match rng.gen_range(0..3) {
            0 => Formula::not(a),
            1 => Formula::eventually(lattice_bound(rng), a),
            _ => Formula::always(lattice_bound(rng), a),
        };
    }
    let (l, r) = leaves.split_at(rng.gen_range(1..leaves.len()));
    let a = random_formula(rng, l, depth);
    let b = random_formula(rng, r, depth);
    match rng.gen_range(0..3) {
        0 => Formula::or(a, b),
        1 => Formula::and(a, b),
        _ => Formula::until(lattice_bound(rng), a, b),
    }
}

fn grid_of(phi: &Formula, grids: &[Vec<bool>]) -> Vec<bool> {
    match phi {
        Formula::True => vec![true; grids[0].len()],
        Formula::Atom(Expr::Var(i)) => grids[*i].clone(),
        Formula::Atom(_) => unreachable!("leaves are variables"),
        Formula::Not(a) => grid_of(a, grids).into_iter().map(|b| !b).collect(),
        Formula::Or(a, b) => grid_of(a, grids)
            .into_iter()
            .zip(grid_of(b, grids))
            .map(|(x, y)| x || y)
            .collect(),
        Formula::Until(t, a, b) => until_on_grid(&grid_of(a, grids), &grid_of(b, grids), t.lo().mid(), t.hi().mid(), H),
    }
}

const H: f64 = 1e-3;
const GRID_END: f64 = 40.0;
const CHECK_END: f64 = 20.0;

/// Compares propagated sets with discrete semantics on `instances` random
/// formulas over three lattice step signals. Returns the number of instances
/// compared; the others were rejected as ambiguous.
pub fn timesets_grid_oracle(instances: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (GRID_END / H) as usize;
    let offsets = [1.0 / 1024.0, 3.0 / 1024.0, 5.0 / 1024.0];
    let mut compared = 0;
    let mut ambiguous = 0;
    for instance in 0..instances {
        let signals: Vec<StepSignal> = offsets.iter().map(|&o| lattice_signal(&mut rng, o)).collect();
        let sets: Vec<ApproxSet> = signals.iter().map(StepSignal::to_set).collect();
        let grids: Vec<Vec<bool>> = signals.iter().map(|s| s.grid(H, n)).collect();
        let atoms: Vec<Expr> = (0..3).map(Expr::Var).collect();
        let leaves = &[0, 1, 2][..rng.gen_range(1..=3)];
        let phi = random_formula(&mut rng, leaves, 3);
        match propagate(&phi, &atoms, &sets) {
            Err(_) => ambiguous += 1,
            Ok(set) => {
                assert!(is_canonical(&set.bounds()), "instance {instance}: {set:?}");
                let bad = disagreements(&set, &grid_of(&phi, &grids), H, CHECK_END, 2.0 * H);
                assert!(
                    bad.is_empty(),
                    "instance {instance}: {phi:?} gives {set:?}, wrong at {:?}",
                    &bad[..bad.len().min(5)]
                );
                compared += 1;
            }
        }
    }
    assert!(
        compared * 4 >= instances * 3,
        "only {compared} instances compared, {ambiguous} ambiguous"
    );
    compared
}

/// Integrates `sys` over a box of half-width `w` around `centre`, then checks
/// that sampled trajectories stay inside the enclosure at step endpoints and
/// at interior times.
pub fn check_containment(
    sys: &ContinuousSystem,
    centre: &[f64],
    w: f64,
    horizon: f64,
    samples: usize,
    seed: u64,
) -> f64 {
    let u_box = IntervalBox::new(centre.iter().map(|&c| Interval::new(c - w, c + w)).collect());
    let mut enc = SignalEnclosure::new(sys, u_box.clone(), sys.init.clone(), IntegratorConfig::default());
    enc.extend(horizon).expect("integration succeeds");

    let mut times: Vec<f64> = enc
        .steps()
        .iter()
        .map(|s| s.span().hi())
        .filter(|&t| t <= horizon)
        .collect();
    times.extend((1..200).map(|k| horizon * k as f64 / 200.0));
    times.sort_by(f64::total_cmp);
    times.dedup();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut widest: f64 = 0.0;
    for _ in 0..samples {
        let u = sample_in(&u_box, &mut rng);
        let x0 = sample_in(&sys.init, &mut rng);
        let states = simulate(sys, &u, &x0, &times, 1e-12);
        for (t, x) in times.iter().zip(&states) {
            let enclosure = enc.eval(Interval::point(*t));
            for (iv, xi) in enclosure.iter().zip(x) {
                let slack = 1e-8 * (1.0 + xi.abs()) * (1.0 + t);
                assert!(
                    iv.lo() - slack <= *xi && *xi <= iv.hi() + slack,
                    "{u:?}: x = {xi} outside {iv:?} at t = {t}"
                );
                widest = widest.max(iv.width());
            }
        }
    }
    widest
}

const GRID: f64 = 1e-3;

/// Truth at time 0 of `phi` under grid semantics for one sampled instance.
pub fn sampled_truth(sys: &ContinuousSystem, phi: &Formula, u: &[f64], x0: &[f64]) -> bool {
    let n = (phi.necessary_length() / GRID).ceil() as usize + 2;
    let times: Vec<f64> = (0..n).map(|k| k as f64 * GRID).collect();
    let states = simulate(sys, u, x0, &times, 1e-11);
    grid_truth(phi, &states, u, GRID)[0]
}

/// Runs the monitor, checks that every set it computed is canonical and, on a
/// definite verdict, checks the verdict against ten simulated instances drawn
/// from the parameter and initial boxes.
pub fn spot_check(sys: &ContinuousSystem, phi: &Formula, seed: u64) -> Outcome {
    let v = monitor_stl(sys, phi, &MonitorConfig::default());
    for dump in &v.sets {
        let bounds = dump.set.bounds();
        assert!(is_canonical(&bounds), "{}: {:?}", dump.formula, dump.set);
        assert_eq!(ApproxSet::from_bounds(bounds).as_ref(), Some(&dump.set));
    }
    if v.outcome != Outcome::Unknown {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            let u = sample_in(&sys.param_domain, &mut rng);
            let x0 = sample_in(&sys.init, &mut rng);
            let truth = sampled_truth(sys, phi, &u, &x0);
            assert_eq!(
                truth,
                v.outcome == Outcome::Valid,
                "{:?} contradicted at u = {u:?}",
                v.outcome
            );
        }
    }
    v.outcome
}
