use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Objective, TraceRow};
use crate::error::{Error, Result};
use crate::objective::Criterion;
use crate::pattern::SamplingPattern;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PossConfig {
    pub m: usize,
    /// Iteration budget; the initial evaluation counts as the first.
    pub iterations: usize,
    pub seed: u64,
    pub criterion: Criterion,
}

impl Default for PossConfig {
    fn default() -> Self {
        Self {
            m: 0,
            iterations: 100,
            seed: 0,
            criterion: Criterion::Kspace,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PossOutcome {
    pub pattern: SamplingPattern,
    pub value: f64,
    pub trace: Vec<TraceRow>,
    pub recon_calls: u64,
}

/// Random bit-flip mutation with size repair, accepted when the criterion does
/// not increase.
pub fn poss_run(
    init: SamplingPattern,
    config: &PossConfig,
    objective: &Objective,
) -> Result<PossOutcome> {
    let grid = init.grid();
    let n = grid.n_points();
    if config.m == 0 || config.m > n {
        return Err(Error::InvalidConfig(format!(
            "M must satisfy 0 < M <= N = {n}, got {}",
            config.m
        )));
    }
    if init.locked().len() > config.m {
        return Err(Error::LockedTooLarge {
            required: init.locked().len(),
            available: config.m,
        });
    }
    if config.iterations == 0 {
        return Err(Error::InvalidConfig(
            "POSS needs at least one iteration".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut current = init;
    let mut value = objective.evaluate(&current, config.criterion)?.value;
    let mut calls = objective.cost_of(&current);
    let mut trace = vec![TraceRow {
        iter: 0,
        size: current.len(),
        k: 0,
        f: value,
        accepted: true,
        recon_calls_cum: calls,
        wall_ms: objective.elapsed_ms(),
    }];
    let p = 1.0 / n as f64;
    for iter in 1..config.iterations {
        let mut bits = current.membership().to_vec();
        let mut flips = 0;
        for (k, b) in bits.iter_mut().enumerate() {
            if rng.random::<f64>() < p && !current.is_locked(k) {
                *b = !*b;
                flips += 1;
            }
        }
        let size = bits.iter().filter(|&&b| b).count();
        if size > config.m {
            let pool: Vec<usize> = (0..n)
                .filter(|&k| bits[k] && !current.is_locked(k))
                .collect();
            for i in sample(&mut rng, pool.len(), size - config.m) {
                bits[pool[i]] = false;
            }
        } else if size < config.m {
            let pool: Vec<usize> = (0..n).filter(|&k| !bits[k]).collect();
            for i in sample(&mut rng, pool.len(), config.m - size) {
                bits[pool[i]] = true;
            }
        }
        let members = (0..n).filter(|&k| bits[k]);
        let cand = SamplingPattern::new(grid, members, current.locked().iter().copied())?;
        let v = objective.evaluate(&cand, config.criterion)?.value;
        calls += objective.cost_of(&cand);
        let accepted = v <= value;
        trace.push(TraceRow {
            iter,
            size: cand.len(),
            k: flips,
            f: v,
            accepted,
            recon_calls_cum: calls,
            wall_ms: objective.elapsed_ms(),
        });
        if accepted {
            current = cand;
            value = v;
        }
    }
    Ok(PossOutcome {
        pattern: current,
        value,
        trace,
        recon_calls: calls,
    })
}
