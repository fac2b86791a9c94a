//! Seeded batches of verifications over sampled parameter values.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::interval::{Interval, IntervalBox};
use crate::model::{ContinuousSystem, ModelError};
use crate::monitor::{monitor_stl, MonitorConfig, Outcome, UnknownCause, Verdict};
use crate::stl::Formula;

/// Name of the sampler recorded in every report.
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.3, seed_from_u64)";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchSpec {
    pub runs: usize,
    pub seed: u64,
    /// Half-width `w`: each sampled value `u` becomes the box `u + [-w, w]`.
    pub widen: f64,
    pub config: MonitorConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub index: usize,
    /// Sampled parameter values before widening.
    pub u: Vec<f64>,
    pub verdict: Verdict,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchReport {
    pub rng: &'static str,
    pub seed: u64,
    pub runs: usize,
    pub widen: f64,
    pub n_valid: usize,
    pub n_unsat: usize,
    pub n_unknown: usize,
    pub n_unknown_by_cause: BTreeMap<UnknownCause, usize>,
    /// Mean wall-clock time of the Valid runs.
    pub mean_valid_time: Option<f64>,
}

/// Draws `runs` parameter vectors uniformly from the system's parameter
/// domain. The sequence depends only on the seed.
pub fn sample_parameters(sys: &ContinuousSystem, runs: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..runs)
        .map(|_| {
            sys.param_domain
                .iter()
                .map(|d| {
                    if d.is_point() {
                        d.lo()
                    } else {
                        rng.gen_range(d.lo()..=d.hi())
                    }
                })
                .collect()
        })
        .collect()
}

/// Parameter box `u + [-w, w]` for every component.
pub fn widened(u: &[f64], w: f64) -> IntervalBox {
    u.iter().map(|&x| Interval::point(x) + Interval::new(-w, w)).collect()
}

/// Verifies `phi` once per sampled parameter vector, in parallel. Records
/// come back in sampling order.
pub fn run_batch(
    sys: &ContinuousSystem,
    phi: &Formula,
    spec: &BatchSpec,
) -> Result<(BatchReport, Vec<RunRecord>), ModelError> {
    let samples = sample_parameters(sys, spec.runs, spec.seed);
    let systems = samples
        .iter()
        .map(|u| sys.with_param_domain(widened(u, spec.widen)))
        .collect::<Result<Vec<_>, _>>()?;
    let records: Vec<RunRecord> = samples
        .into_par_iter()
        .zip(systems)
        .enumerate()
        .map(|(index, (u, s))| {
            let start = Instant::now();
            let mut verdict = monitor_stl(&s, phi, &spec.config);
            let seconds = start.elapsed().as_secs_f64();
            verdict.sets.clear();
            RunRecord {
                index,
                u,
                verdict,
                seconds,
            }
        })
        .collect();
    Ok((summarize(spec, &records), records))
}

pub fn summarize(spec: &BatchSpec, records: &[RunRecord]) -> BatchReport {
    let count = |o: Outcome| records.iter().filter(|r| r.verdict.outcome == o).count();
    let mut by_cause: BTreeMap<UnknownCause, usize> = UnknownCause::ALL.iter().map(|&c| (c, 0)).collect();
    for r in records {
        if let Some(c) = r.verdict.unknown_cause {
            *by_cause.entry(c).or_insert(0) += 1;
        }
    }
    let valid_times: Vec<f64> = records
        .iter()
        .filter(|r| r.verdict.outcome == Outcome::Valid)
        .map(|r| r.seconds)
        .collect();
    BatchReport {
        rng: RNG_NAME,
        seed: spec.seed,
        runs: records.len(),
        widen: spec.widen,
        n_valid: count(Outcome::Valid),
        n_unsat: count(Outcome::Unsat),
        n_unknown: count(Outcome::Unknown),
        n_unknown_by_cause: by_cause,
        mean_valid_time: (!valid_times.is_empty()).then(|| valid_times.iter().sum::<f64>() / valid_times.len() as f64),
    }
}
