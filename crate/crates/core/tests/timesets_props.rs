mod common;

use std::time::Instant;

use proptest::prelude::*;

use stlcert::interval::Interval;
use stlcert::stl::TimeBound;
use stlcert::timesets::{is_canonical, ApproxSet, Bound};

use common::suites::timesets_grid_oracle;
use common::{disagreements, until_on_grid};

const H: f64 = 1e-3;

#[test]
fn operations_agree_with_grid_oracle() {
    timesets_grid_oracle(200, 11);
}

#[test]
fn eventually_window_against_grid() {
    // F_[2,3] of the indicator of [5,6).
    let b = ApproxSet::from_bounds(vec![
        Bound::lower(Interval::point(5.0)),
        Bound::upper(Interval::point(6.0)),
    ])
    .unwrap();
    let t = TimeBound::from_f64(2.0, 3.0).unwrap();
    let set = ApproxSet::Universe.shift_all(&t, &b).unwrap();
    let n = 10_001;
    let grid_b: Vec<bool> = (0..n).map(|k| (5.0..6.0).contains(&(k as f64 * H))).collect();
    let grid = until_on_grid(&vec![true; n], &grid_b, 2.0, 3.0, H);
    assert!(disagreements(&set, &grid, H, 6.0, 2.0 * H).is_empty());
    assert_eq!(
        set.bounds(),
        vec![Bound::lower(Interval::point(2.0)), Bound::upper(Interval::point(4.0))]
    );
}

fn canonical_set() -> impl Strategy<Value = ApproxSet> {
    (prop::collection::vec((0.0..30.0f64, 0.0..0.3f64), 0..10), any::<bool>()).prop_filter_map(
        "needs canonical bounds",
        |(mut raw, start_at_zero)| {
            raw.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut bounds = Vec::new();
            if start_at_zero {
                bounds.push(Bound::lower(Interval::ZERO));
            }
            let mut last = f64::NEG_INFINITY;
            for (lo, w) in raw {
                if lo <= last + 1e-3 || lo <= 1e-3 {
                    continue;
                }
                let polarity = bounds.len() % 2 == 0;
                bounds.push(Bound {
                    s: Interval::new(lo, lo + w),
                    polarity,
                });
                last = lo + w;
            }
            ApproxSet::from_bounds(bounds)
        },
    )
}

fn time_bound() -> impl Strategy<Value = TimeBound> {
    (0.0..5.0f64, 0.0..5.0f64).prop_map(|(lo, w)| TimeBound::from_f64(lo, lo + w).unwrap())
}

fn canonical(r: &Result<ApproxSet, stlcert::timesets::AmbiguityError>) -> bool {
    r.as_ref().map_or(true, |s| {
        is_canonical(&s.bounds()) && ApproxSet::from_bounds(s.bounds()).as_ref() == Some(s)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn operations_are_closed(a in canonical_set(), b in canonical_set(), t in time_bound()) {
        prop_assert!(canonical(&a.invert()));
        prop_assert!(canonical(&a.join(&b)));
        prop_assert!(canonical(&a.intersect(&b)));
        prop_assert!(canonical(&a.shift_all(&t, &b)));
    }

    #[test]
    fn algebraic_identities(a in canonical_set(), b in canonical_set()) {
        if let Ok(inv) = a.invert() {
            prop_assert_eq!(inv.invert().unwrap(), a.clone());
        }
        if let (Ok(ab), Ok(ba)) = (a.join(&b), b.join(&a)) {
            prop_assert_eq!(ab, ba);
        }
        prop_assert_eq!(a.join(&a).unwrap(), a.clone());
        if let (Ok(ab), Ok(ba)) = (a.intersect(&b), b.intersect(&a)) {
            prop_assert_eq!(ab, ba);
        }
        // !(a | b) = !a & !b
        if let (Ok(lhs), Ok(na), Ok(nb)) = (a.join(&b).and_then(|j| j.invert()), a.invert(), b.invert()) {
            if let Ok(rhs) = na.intersect(&nb) {
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}

fn many_bounds(n: usize, offset: f64) -> ApproxSet {
    let bounds = (0..n)
        .map(|k| Bound {
            s: Interval::new(1.0 + k as f64 + offset, 1.0 + k as f64 + offset + 0.01),
            polarity: k % 2 == 0,
        })
        .collect();
    ApproxSet::from_bounds(bounds).unwrap()
}

#[test]
fn large_sets_stay_fast() {
    let a = many_bounds(1000, 0.0);
    let b = many_bounds(1000, 0.5);
    let t = TimeBound::from_f64(0.0, 0.25).unwrap();
    let start = Instant::now();
    let inv = a.invert().unwrap();
    let join = a.join(&b).unwrap();
    let meet = a.intersect(&b).unwrap();
    let shifted = a.shift_all(&t, &b).unwrap();
    let elapsed = start.elapsed();
    for s in [&inv, &join, &meet, &shifted] {
        assert!(is_canonical(&s.bounds()));
    }
    assert_eq!(inv.len(), 1001);
    assert!(elapsed.as_secs_f64() < 5.0, "{elapsed:?}");
}
