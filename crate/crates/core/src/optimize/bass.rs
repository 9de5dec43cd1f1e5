use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::select::{select_add, select_remove};
use super::{Objective, TraceRow};
use crate::error::{Error, Result};
use crate::objective::{Criterion, ImportanceMaps, DEFAULT_DELTA};
use crate::pattern::SamplingPattern;
use crate::sampling::PositionalConstraint;

/// Pre-selection probability as a function of `K`, `M` and `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[derive(Default)]
pub enum RhoRule {
    /// `K / M`.
    #[default]
    KOverM,
    Constant(f64),
}


impl RhoRule {
    fn raw(self, k: usize, m: usize) -> f64 {
        match self {
            RhoRule::KOverM => k as f64 / m as f64,
            RhoRule::Constant(c) => c,
        }
    }

    /// Probability for additions, lifted above `K / (N − M)` when needed.
    pub fn for_add(self, k: usize, m: usize, n: usize) -> f64 {
        lift(self, self.raw(k, m), k as f64 / (n - m) as f64)
    }

    /// Probability for removals, lifted above `K / M` when needed.
    pub fn for_remove(self, k: usize, m: usize) -> f64 {
        lift(self, self.raw(k, m), k as f64 / m as f64)
    }
}

/// `K / M` becomes `max(K / M, min(1, 2 · floor))`; a constant is only
/// replaced when it does not exceed the floor.
fn lift(rule: RhoRule, rho: f64, floor: f64) -> f64 {
    let lifted = (2.0 * floor).min(1.0);
    match rule {
        RhoRule::KOverM => rho.max(lifted).min(1.0),
        RhoRule::Constant(_) if rho > floor => rho.min(1.0),
        RhoRule::Constant(_) => lifted,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BassConfig {
    /// Target pattern size `M`.
    pub m: usize,
    /// Iteration budget `L`; the initial evaluation counts as the first.
    pub iterations: usize,
    pub k_init: usize,
    pub alpha: f64,
    pub rho_add: RhoRule,
    pub rho_remove: RhoRule,
    pub constraint: PositionalConstraint,
    pub delta: f64,
    pub seed: u64,
    pub criterion: Criterion,
}

impl Default for BassConfig {
    fn default() -> Self {
        Self {
            m: 0,
            iterations: 100,
            k_init: 8,
            alpha: 0.5,
            rho_add: RhoRule::KOverM,
            rho_remove: RhoRule::KOverM,
            constraint: PositionalConstraint::default(),
            delta: DEFAULT_DELTA,
            seed: 0,
            criterion: Criterion::Kspace,
        }
    }
}

impl BassConfig {
    pub fn new(m: usize, iterations: usize, k_init: usize) -> Self {
        Self {
            m,
            iterations,
            k_init,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Checks the configuration against a starting pattern.
    pub fn validate(&self, init: &SamplingPattern) -> Result<()> {
        let n = init.grid().n_points();
        let bad = |s: String| Err(Error::InvalidConfig(s));
        if self.m == 0 || self.m >= n {
            return bad(format!("M must satisfy 0 < M < N = {n}, got {}", self.m));
        }
        if self.k_init == 0 || self.k_init >= self.m.min(n - self.m) {
            return bad(format!(
                "K_init must satisfy 0 < K_init < min(M, N - M) = {}, got {}",
                self.m.min(n - self.m),
                self.k_init
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.delta.is_nan() || self.delta <= 0.0 {
            return bad(format!("delta must be > 0, got {}", self.delta));
        }
        for rule in [self.rho_add, self.rho_remove] {
            if let RhoRule::Constant(c) = rule {
                if !(c > 0.0 && c <= 1.0) {
                    return bad(format!("rho must lie in (0, 1], got {c}"));
                }
            }
        }
        if init.locked().len() > self.m {
            return Err(Error::LockedTooLarge {
                required: init.locked().len(),
                available: self.m,
            });
        }
        let gap = init.len().abs_diff(self.m);
        let needed = gap.div_ceil(self.k_init) + 1;
        if self.iterations < needed {
            return bad(format!(
                "L = {} cannot reach size M; at least {needed} iterations needed",
                self.iterations
            ));
        }
        Ok(())
    }
}

/// Optimizer state between iterations.
#[derive(Clone, Debug)]
pub struct OptimizerState {
    pub pattern: SamplingPattern,
    pub k: usize,
    /// Number of evaluations done, including the initial one.
    pub iteration: usize,
    /// Criterion value of `pattern`.
    pub value: f64,
    /// Maps of `pattern`, from its own evaluation.
    pub maps: ImportanceMaps,
    pub recon_calls: u64,
    pub trace: Vec<TraceRow>,
    /// Lowest-valued pattern of size `M` evaluated so far.
    pub best: Option<(SamplingPattern, f64)>,
    pub warnings: Vec<String>,
}

impl OptimizerState {
    /// Evaluates the starting pattern; this is the run's first iteration.
    pub fn initialize(
        init: SamplingPattern,
        config: &BassConfig,
        objective: &Objective,
    ) -> Result<Self> {
        let eval = objective.evaluate(&init, config.criterion)?;
        let maps = eval.efficacy.maps(objective.dataset, config.delta)?;
        let recon_calls = objective.cost_of(&init);
        let size = init.len();
        let best = (size == config.m).then(|| (init.clone(), eval.value));
        let row = TraceRow {
            iter: 0,
            size,
            k: config.k_init,
            f: eval.value,
            accepted: true,
            recon_calls_cum: recon_calls,
            wall_ms: objective.elapsed_ms(),
        };
        Ok(Self {
            pattern: init,
            k: config.k_init,
            iteration: 1,
            value: eval.value,
            maps,
            recon_calls,
            trace: vec![row],
            best,
            warnings: Vec::new(),
        })
    }
}

/// One pass of the remove/add/accept loop body.
pub fn bass_step(
    state: &mut OptimizerState,
    config: &BassConfig,
    objective: &Objective,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let m = config.m;
    let n = state.pattern.grid().n_points();
    let k = state.k;
    let removed = select_remove(
        &state.pattern,
        m,
        k,
        config.rho_remove.for_remove(k, m),
        &state.maps.rmap,
        &config.constraint,
        rng,
    )?;
    let added = select_add(
        &state.pattern,
        m,
        k,
        config.rho_add.for_add(k, m, n),
        &state.maps.eps,
        &config.constraint,
        rng,
    )?;
    for (what, s) in [("remove", &removed), ("add", &added)] {
        if s.relaxed {
            state.warnings.push(format!(
                "iteration {}: positional constraint relaxed in select-{what}",
                state.iteration
            ));
        }
    }
    let cand = state.pattern.with_changes(&added.points, &removed.points)?;
    let eval = objective.evaluate(&cand, config.criterion)?;
    state.recon_calls += objective.cost_of(&cand);

    let at_target = cand.len() == m;
    // F is only compared between two patterns of size M; the step that first
    // lands on M is taken like any other size-changing step.
    let accepted = !at_target || state.pattern.len() != m || eval.value <= state.value;
    if at_target && state.best.as_ref().is_none_or(|(_, b)| eval.value < *b) {
        state.best = Some((cand.clone(), eval.value));
    }
    state.trace.push(TraceRow {
        iter: state.iteration,
        size: cand.len(),
        k,
        f: eval.value,
        accepted,
        recon_calls_cum: state.recon_calls,
        wall_ms: objective.elapsed_ms(),
    });
    if accepted {
        state.maps = eval.efficacy.maps(objective.dataset, config.delta)?;
        state.pattern = cand;
        state.value = eval.value;
    } else {
        state.k = ((k - 1) as f64 * config.alpha).floor() as usize + 1;
    }
    state.iteration += 1;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct BassOutcome {
    /// Best pattern of size `M` evaluated during the run.
    pub pattern: SamplingPattern,
    pub value: f64,
    pub state: OptimizerState,
}

impl BassOutcome {
    pub fn trace(&self) -> &[TraceRow] {
        &self.state.trace
    }
}

/// Runs `L` iterations from `init`: the initial evaluation followed by
/// `L − 1` steps.
pub fn bass_run(
    init: SamplingPattern,
    config: &BassConfig,
    objective: &Objective,
) -> Result<BassOutcome> {
    config.validate(&init)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = OptimizerState::initialize(init, config, objective)?;
    while state.iteration < config.iterations {
        bass_step(&mut state, config, objective, &mut rng)?;
    }
    let (pattern, value) = state
        .best
        .clone()
        .ok_or_else(|| Error::InvalidConfig("no pattern of size M was reached".into()))?;
    Ok(BassOutcome {
        pattern,
        value,
        state,
    })
}
