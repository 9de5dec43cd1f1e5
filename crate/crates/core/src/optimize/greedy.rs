use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Objective, TraceRow};
use crate::error::{Error, Result};
use crate::objective::Criterion;
use crate::pattern::SamplingPattern;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreedyConfig {
    pub m: usize,
    /// Re-evaluate candidates top-first by their last known gain instead of
    /// evaluating every candidate at every step.
    pub lazy: bool,
    pub criterion: Criterion,
    /// No new step starts once this many reconstructions were spent.
    pub max_recon_calls: Option<u64>,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        Self {
            m: 0,
            lazy: true,
            criterion: Criterion::Kspace,
            max_recon_calls: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GreedyOutcome {
    pub pattern: SamplingPattern,
    /// Criterion value of `pattern`; `None` when nothing was added.
    pub value: Option<f64>,
    /// One row per added point.
    pub trace: Vec<TraceRow>,
    pub recon_calls: u64,
}

/// Stale or fresh gain of adding one candidate.
#[derive(Clone, Copy, Debug)]
struct Entry {
    gain: f64,
    /// Criterion value after adding `point`.
    value: f64,
    point: usize,
    /// Step at which `gain` was computed.
    stamp: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // max-heap on gain, lower index first on ties
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then(other.point.cmp(&self.point))
    }
}

/// Adds one point at a time, each time the one minimising the criterion,
/// until the pattern holds `M` points.
pub fn greedy_forward(
    init: SamplingPattern,
    config: &GreedyConfig,
    objective: &Objective,
) -> Result<GreedyOutcome> {
    let n = init.grid().n_points();
    if config.m < init.len() || config.m > n {
        return Err(Error::InvalidConfig(format!(
            "M = {} must lie between |Ω_init| = {} and N = {n}",
            config.m,
            init.len()
        )));
    }
    let per_eval = objective.dataset.len() as u64;
    let mut calls = 0u64;
    let mut trace = Vec::new();
    let mut pattern = init;
    let mut value = f64::NAN;

    let eval_one = |p: &SamplingPattern, k: usize| -> Result<f64> {
        Ok(objective
            .evaluate(&p.with_changes(&[k], &[])?, config.criterion)?
            .value)
    };
    let eval_all = |p: &SamplingPattern, cands: &[usize]| -> Result<Vec<f64>> {
        let vals: Vec<Result<f64>> = cands.par_iter().map(|&k| eval_one(p, k)).collect();
        vals.into_iter().collect()
    };

    let mut heap = BinaryHeap::new();
    let mut step = 0;
    while pattern.len() < config.m {
        if config.max_recon_calls.is_some_and(|b| calls >= b) {
            break;
        }
        let chosen = if !config.lazy || step == 0 {
            let cands: Vec<usize> = pattern.non_members().collect();
            let vals = eval_all(&pattern, &cands)?;
            calls += per_eval * cands.len() as u64;
            let best = (0..cands.len())
                .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
                .expect("candidates exist below N");
            if config.lazy {
                let base = objective.evaluate(&pattern, config.criterion)?.value;
                calls += objective.cost_of(&pattern);
                for (i, (&k, &v)) in cands.iter().zip(&vals).enumerate() {
                    if i != best {
                        heap.push(Entry {
                            gain: base - v,
                            value: v,
                            point: k,
                            stamp: step,
                        });
                    }
                }
            }
            (cands[best], vals[best])
        } else {
            loop {
                let top = heap.pop().expect("candidates exist below N");
                if top.stamp == step {
                    break (top.point, top.value);
                }
                let v = eval_one(&pattern, top.point)?;
                calls += per_eval;
                heap.push(Entry {
                    gain: value - v,
                    value: v,
                    point: top.point,
                    stamp: step,
                });
            }
        };
        pattern = pattern.with_changes(&[chosen.0], &[])?;
        value = chosen.1;
        step += 1;
        trace.push(TraceRow {
            iter: step,
            size: pattern.len(),
            k: 1,
            f: value,
            accepted: true,
            recon_calls_cum: calls,
            wall_ms: objective.elapsed_ms(),
        });
    }
    let value = (step > 0).then_some(value);
    Ok(GreedyOutcome {
        pattern,
        value,
        trace,
        recon_calls: calls,
    })
}
