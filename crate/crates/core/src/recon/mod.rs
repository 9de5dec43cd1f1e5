//! Reconstruction oracles `R(Ω, m̄)` and the forward model.
//!
//! Every oracle returns a full-grid k-space estimate and counts its own
//! invocations; that count is the cost unit the optimizers report.

mod cs;
mod dictionary;
mod encoding;
mod fista;
mod nuclear;
mod sfd;

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

pub use cs::{data_fidelity, data_gradient, recon_cs, recon_dic, recon_zero_fill, CsOutcome};
pub use dictionary::{Dictionary, DictionaryConfig};
pub use encoding::{coil_combine, forward_e, CoilSensitivities, Encoder};
pub use nuclear::{nuclear_norm, prox_nuclear};
pub use sfd::{prox_sfd, sfd_norm};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::pattern::{apply_sampling, SamplingPattern};
use crate::volume::{MultiCoilKSpace, Sampled};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReconMethod {
    ZeroFill,
    CsSfd,
    CsLr,
    CsDic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconConfig {
    pub method: ReconMethod,
    /// Regularisation weight λ.
    pub lambda: f64,
    pub max_iterations: usize,
    /// Stop once an accepted step lowers the cost by less than this
    /// fraction.
    pub tolerance: f64,
    /// Fast-gradient-projection steps per SFD prox.
    pub inner_iterations: usize,
    pub dictionary: Option<DictionaryConfig>,
    /// Starting Lipschitz estimate; defaults to the bound from the coil
    /// sensitivities (and dictionary).
    pub initial_lipschitz: Option<f64>,
    /// Lipschitz growth per backtracking step.
    pub backtrack_factor: f64,
}

impl Default for ReconConfig {
    fn default() -> Self {
        Self {
            method: ReconMethod::ZeroFill,
            lambda: 1e-3,
            max_iterations: 30,
            tolerance: 1e-6,
            inner_iterations: 10,
            dictionary: None,
            initial_lipschitz: None,
            backtrack_factor: 2.0,
        }
    }
}

impl ReconConfig {
    pub fn new(method: ReconMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if self.max_iterations == 0 || self.inner_iterations == 0 {
            return Err(Error::InvalidConfig("iteration counts must be >= 1".into()));
        }
        if self.method == ReconMethod::CsDic && self.dictionary.is_none() {
            return Err(Error::InvalidConfig("cs-dic needs a dictionary".into()));
        }
        Ok(())
    }
}

/// Thread-safe invocation counter.
#[derive(Debug, Default)]
pub struct CallCounter(AtomicU64);

impl CallCounter {
    pub fn tick(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

/// A fixed recovery algorithm mapping undersampled measurements to a full
/// k-space estimate.
pub trait Reconstructor: Send + Sync {
    fn reconstruct(&self, pattern: &SamplingPattern, sampled: &Sampled) -> Result<MultiCoilKSpace>;

    /// Number of `reconstruct` calls so far.
    fn calls(&self) -> u64;

    fn name(&self) -> &'static str;
}

/// Zero-filled coil combination with data consistency on sampled rows.
#[derive(Debug)]
pub struct ZeroFill {
    encoder: Encoder,
    counter: CallCounter,
}

impl ZeroFill {
    pub fn new(encoder: Encoder) -> Self {
        Self {
            encoder,
            counter: CallCounter::default(),
        }
    }
}

impl Reconstructor for ZeroFill {
    fn reconstruct(&self, pattern: &SamplingPattern, sampled: &Sampled) -> Result<MultiCoilKSpace> {
        self.counter.tick();
        recon_zero_fill(pattern, sampled, &self.encoder)
    }

    fn calls(&self) -> u64 {
        self.counter.get()
    }

    fn name(&self) -> &'static str {
        "zero-fill"
    }
}

/// FISTA-based reconstruction for `cs-sfd`, `cs-lr` and `cs-dic`.
#[derive(Debug)]
pub struct CompressedSensing {
    config: ReconConfig,
    encoder: Encoder,
    dictionary: Option<Dictionary>,
    counter: CallCounter,
}

impl CompressedSensing {
    pub fn new(config: ReconConfig, encoder: Encoder) -> Result<Self> {
        config.validate()?;
        let dictionary = match config.method {
            ReconMethod::CsDic => {
                let d = Dictionary::new(config.dictionary.as_ref().expect("validated"))?;
                if d.frames() != encoder.grid().nt {
                    return Err(Error::DimensionMismatch(format!(
                        "dictionary has {} time stamps, grid has {} frames",
                        d.frames(),
                        encoder.grid().nt
                    )));
                }
                Some(d)
            }
            ReconMethod::CsSfd | ReconMethod::CsLr => None,
            ReconMethod::ZeroFill => {
                return Err(Error::InvalidConfig(
                    "zero-fill is not a compressed-sensing method".into(),
                ))
            }
        };
        Ok(Self {
            config,
            encoder,
            dictionary,
            counter: CallCounter::default(),
        })
    }

    pub fn config(&self) -> &ReconConfig {
        &self.config
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    /// Runs the solver and returns the image, coefficients and cost trace.
    /// Counts as one oracle call.
    pub fn solve(&self, pattern: &SamplingPattern, sampled: &Sampled) -> Result<CsOutcome> {
        self.counter.tick();
        match &self.dictionary {
            Some(d) => recon_dic(pattern, sampled, &self.config, &self.encoder, d),
            None => recon_cs(pattern, sampled, &self.config, &self.encoder),
        }
    }
}

impl Reconstructor for CompressedSensing {
    fn reconstruct(&self, pattern: &SamplingPattern, sampled: &Sampled) -> Result<MultiCoilKSpace> {
        self.solve(pattern, sampled).map(|o| o.kspace)
    }

    fn calls(&self) -> u64 {
        self.counter.get()
    }

    fn name(&self) -> &'static str {
        match self.config.method {
            ReconMethod::CsSfd => "cs-sfd",
            ReconMethod::CsLr => "cs-lr",
            ReconMethod::CsDic => "cs-dic",
            ReconMethod::ZeroFill => unreachable!(),
        }
    }
}

/// Builds the reconstructor described by `config` for a grid.
pub fn build_reconstructor(
    config: &ReconConfig,
    sens: &CoilSensitivities,
    grid: &crate::grid::KSpaceGrid,
) -> Result<Box<dyn Reconstructor>> {
    config.validate()?;
    let encoder = Encoder::for_grid(sens.clone(), grid)?;
    Ok(match config.method {
        ReconMethod::ZeroFill => Box::new(ZeroFill::new(encoder)),
        _ => Box::new(CompressedSensing::new(config.clone(), encoder)?),
    })
}

/// Test double that recovers every item perfectly: it looks up the dataset
/// item whose sampled rows equal the measurements and returns it whole.
#[derive(Debug)]
pub struct ReferenceOracle {
    items: Vec<MultiCoilKSpace>,
    counter: CallCounter,
}

impl ReferenceOracle {
    pub fn new(dataset: &Dataset) -> Self {
        Self {
            items: dataset.items().to_vec(),
            counter: CallCounter::default(),
        }
    }
}

impl Reconstructor for ReferenceOracle {
    fn reconstruct(&self, pattern: &SamplingPattern, sampled: &Sampled) -> Result<MultiCoilKSpace> {
        self.counter.tick();
        for item in &self.items {
            if item.grid() == sampled.grid()
                && apply_sampling(pattern, item)?.values() == sampled.values()
            {
                return Ok(item.clone());
            }
        }
        Err(Error::InvalidConfig(
            "measurements match no reference item".into(),
        ))
    }

    fn calls(&self) -> u64 {
        self.counter.get()
    }

    fn name(&self) -> &'static str {
        "reference"
    }
}
