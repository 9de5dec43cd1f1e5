//! Regularised image-domain reconstructions solved with monotone FISTA.

use crate::error::{Error, Result};
use crate::pattern::{embed_sampled, SamplingPattern};
use crate::volume::{ImageVolume, MultiCoilKSpace, Sampled, C64};

use super::dictionary::Dictionary;
use super::encoding::Encoder;
use super::fista::{self, FistaSettings, Problem};
use super::nuclear::{nuclear_norm_raw, prox_nuclear_raw};
use super::sfd::{sfd_norm_raw, SfdProx};
use super::{ReconConfig, ReconMethod};

/// `S_Ω E`, mapping an image to its sampled multi-coil rows.
pub(crate) struct SampledEncoding<'a> {
    encoder: &'a Encoder,
    points: &'a [usize],
}

impl<'a> SampledEncoding<'a> {
    pub(crate) fn new(encoder: &'a Encoder, points: &'a [usize]) -> Self {
        Self { encoder, points }
    }

    pub(crate) fn apply(&self, x: &[C64]) -> Vec<C64> {
        let g = self.encoder.grid();
        let n = g.n_points();
        let mut full = vec![C64::new(0.0, 0.0); n * g.nc];
        self.encoder.forward_into(x, &mut full);
        let mut out = Vec::with_capacity(self.points.len() * g.nc);
        for &k in self.points {
            for c in 0..g.nc {
                out.push(full[c * n + k]);
            }
        }
        out
    }

    pub(crate) fn adjoint(&self, r: &[C64]) -> Vec<C64> {
        let g = self.encoder.grid();
        let n = g.n_points();
        let mut full = vec![C64::new(0.0, 0.0); n * g.nc];
        for (j, &k) in self.points.iter().enumerate() {
            for c in 0..g.nc {
                full[c * n + k] = r[j * g.nc + c];
            }
        }
        let mut out = vec![C64::new(0.0, 0.0); n];
        self.encoder.adjoint_into(&mut full, &mut out);
        out
    }
}

enum Prior {
    Sfd(SfdProx),
    LowRank,
}

struct ImageProblem<'a> {
    op: SampledEncoding<'a>,
    prior: Prior,
    dims: (usize, usize, usize),
}

impl Problem for ImageProblem<'_> {
    fn apply(&self, z: &[C64]) -> Vec<C64> {
        self.op.apply(z)
    }
    fn adjoint(&self, r: &[C64]) -> Vec<C64> {
        self.op.adjoint(r)
    }
    fn penalty(&self, z: &[C64]) -> f64 {
        match self.prior {
            Prior::Sfd(_) => sfd_norm_raw(z, self.dims),
            Prior::LowRank => nuclear_norm_raw(z, self.dims.0 * self.dims.1, self.dims.2),
        }
    }
    fn prox(&mut self, v: &[C64], theta: f64) -> Vec<C64> {
        match &mut self.prior {
            Prior::Sfd(p) => p.apply(v, theta),
            Prior::LowRank => prox_nuclear_raw(v, self.dims.0 * self.dims.1, self.dims.2, theta),
        }
    }
}

struct SynthesisProblem<'a> {
    op: SampledEncoding<'a>,
    dict: &'a Dictionary,
    plane: usize,
}

impl Problem for SynthesisProblem<'_> {
    fn apply(&self, u: &[C64]) -> Vec<C64> {
        self.op.apply(&self.dict.synthesize(u, self.plane))
    }
    fn adjoint(&self, r: &[C64]) -> Vec<C64> {
        self.dict.analyze(&self.op.adjoint(r), self.plane)
    }
    fn penalty(&self, u: &[C64]) -> f64 {
        u.iter().map(|v| v.norm()).sum()
    }
    fn prox(&mut self, v: &[C64], theta: f64) -> Vec<C64> {
        v.iter()
            .map(|v| {
                let m = v.norm();
                if m <= theta {
                    C64::new(0.0, 0.0)
                } else {
                    v * ((m - theta) / m)
                }
            })
            .collect()
    }
}

/// Result of a regularised reconstruction.
#[derive(Clone, Debug)]
pub struct CsOutcome {
    pub image: ImageVolume,
    /// `E x̂` on the full grid.
    pub kspace: MultiCoilKSpace,
    /// Synthesis coefficients (dictionary method only), `u[j * plane + p]`.
    pub coefficients: Option<Vec<C64>>,
    /// Objective after every proximal step, starting with the initial cost.
    pub costs: Vec<f64>,
}

fn check_inputs(
    pattern: &SamplingPattern,
    sampled: &Sampled,
    encoder: &Encoder,
    config: &ReconConfig,
) -> Result<()> {
    let grid = encoder.grid();
    if sampled.grid() != grid {
        return Err(Error::GridMismatch {
            expected: grid,
            found: sampled.grid(),
        });
    }
    pattern.grid().check_points(&grid)?;
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    if sampled.points() != pattern.members() {
        return Err(Error::InvalidConfig(
            "sampled rows do not match pattern members".into(),
        ));
    }
    if config.lambda.is_nan() || config.lambda < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "lambda must be >= 0, got {}",
            config.lambda
        )));
    }
    if config.max_iterations == 0 {
        return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
    }
    Ok(())
}

fn settings(config: &ReconConfig, operator_norm_sqr: f64) -> FistaSettings {
    FistaSettings {
        lambda: config.lambda,
        max_iterations: config.max_iterations,
        tolerance: config.tolerance,
        lipschitz: config.initial_lipschitz.unwrap_or(2.0 * operator_norm_sqr),
        backtrack_factor: config.backtrack_factor.max(1.0 + 1e-3),
    }
}

/// Solves `min ‖m̄ − S_Ω E x‖² + λ P(x)` with the spatial finite-difference
/// (`cs-sfd`) or Casorati nuclear-norm (`cs-lr`) prior, starting from zero.
pub fn recon_cs(
    pattern: &SamplingPattern,
    sampled: &Sampled,
    config: &ReconConfig,
    encoder: &Encoder,
) -> Result<CsOutcome> {
    check_inputs(pattern, sampled, encoder, config)?;
    let g = encoder.grid();
    let dims = (g.nx, g.ny, g.nt);
    let prior = match config.method {
        ReconMethod::CsSfd => Prior::Sfd(SfdProx::new(dims, config.inner_iterations.max(1))),
        ReconMethod::CsLr => Prior::LowRank,
        other => {
            return Err(Error::InvalidConfig(format!(
                "recon_cs does not handle {other:?}"
            )))
        }
    };
    let mut problem = ImageProblem {
        op: SampledEncoding::new(encoder, pattern.members()),
        prior,
        dims,
    };
    let s = settings(config, encoder.sensitivities().max_sum_of_squares());
    let out = fista::minimize(
        &mut problem,
        sampled.values(),
        vec![C64::new(0.0, 0.0); g.n_points()],
        &s,
    )?;
    let image = ImageVolume::from_values(g.nx, g.ny, g.nt, out.solution)?;
    let kspace = encoder.forward(&image)?;
    Ok(CsOutcome {
        image,
        kspace,
        coefficients: None,
        costs: out.costs,
    })
}

/// Solves `min ‖m̄ − S_Ω E D u‖² + λ‖u‖₁` and returns `x̂ = D û`.
pub fn recon_dic(
    pattern: &SamplingPattern,
    sampled: &Sampled,
    config: &ReconConfig,
    encoder: &Encoder,
    dict: &Dictionary,
) -> Result<CsOutcome> {
    check_inputs(pattern, sampled, encoder, config)?;
    let g = encoder.grid();
    if g.nt < 2 || dict.frames() != g.nt {
        return Err(Error::DimensionMismatch(format!(
            "dictionary has {} frames, grid has {}",
            dict.frames(),
            g.nt
        )));
    }
    let plane = g.plane();
    let mut problem = SynthesisProblem {
        op: SampledEncoding::new(encoder, pattern.members()),
        dict,
        plane,
    };
    let s = settings(
        config,
        encoder.sensitivities().max_sum_of_squares() * dict.squared_norm(),
    );
    let u0 = vec![C64::new(0.0, 0.0); plane * dict.n_atoms()];
    let out = fista::minimize(&mut problem, sampled.values(), u0, &s)?;
    let image = ImageVolume::from_values(g.nx, g.ny, g.nt, dict.synthesize(&out.solution, plane))?;
    let kspace = encoder.forward(&image)?;
    Ok(CsOutcome {
        image,
        kspace,
        coefficients: Some(out.solution),
        costs: out.costs,
    })
}

/// Zero-filled coil-combined image re-encoded on the full grid, with the
/// measured rows written back.
pub fn recon_zero_fill(
    pattern: &SamplingPattern,
    sampled: &Sampled,
    encoder: &Encoder,
) -> Result<MultiCoilKSpace> {
    let filled = embed_sampled(pattern, sampled)?;
    let image = encoder.coil_combine(&filled)?;
    let mut out = encoder.forward(&image)?;
    for (k, row) in sampled.rows() {
        for (c, &v) in row.iter().enumerate() {
            out.set(k, c, v);
        }
    }
    Ok(out)
}

/// `½‖m̄ − S_Ω E x‖²`.
pub fn data_fidelity(
    pattern: &SamplingPattern,
    sampled: &Sampled,
    encoder: &Encoder,
    x: &ImageVolume,
) -> f64 {
    let ax = SampledEncoding::new(encoder, pattern.members()).apply(x.values());
    0.5 * ax
        .iter()
        .zip(sampled.values())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
}

/// `Eᴴ S_Ωᵀ (S_Ω E x − m̄)`, the gradient of [`data_fidelity`] with respect
/// to the real and imaginary parts of `x`.
pub fn data_gradient(
    pattern: &SamplingPattern,
    sampled: &Sampled,
    encoder: &Encoder,
    x: &ImageVolume,
) -> ImageVolume {
    let op = SampledEncoding::new(encoder, pattern.members());
    let r: Vec<C64> = op
        .apply(x.values())
        .iter()
        .zip(sampled.values())
        .map(|(a, b)| a - b)
        .collect();
    let (nx, ny, nt) = x.dims();
    ImageVolume::from_values(nx, ny, nt, op.adjoint(&r)).expect("gradient preserves dims")
}
