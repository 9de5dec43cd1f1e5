//! Efficacy criteria, quality metrics and importance maps.

mod maps;
mod metrics;
mod ssim;

pub use maps::{epsilon_map, r_map, ImportanceMaps};
pub use metrics::{distance_f, normalized_sq_error, nrmse, nrmse_mean, nrmse_slices};
pub use ssim::{ssim, ssim_frame};

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::pattern::{apply_sampling, SamplingPattern};
use crate::recon::{coil_combine, CoilSensitivities, Reconstructor};
use crate::volume::{ImageVolume, MultiCoilKSpace};

pub const DEFAULT_DELTA: f64 = 1e-12;

/// Which value the optimizer compares when deciding acceptance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// Mean normalised k-space error.
    #[default]
    Kspace,
    /// Mean negative SSIM of coil-combined magnitude images.
    Image,
}

/// Result of reconstructing every item of a dataset under one pattern.
#[derive(Clone, Debug)]
pub struct Efficacy {
    /// Mean of `per_item`.
    pub value: f64,
    pub per_item: Vec<f64>,
    /// `e_i = m_i − R(Ω, S_Ω m_i)`.
    pub residuals: Vec<MultiCoilKSpace>,
}

impl Efficacy {
    /// Reconstructed k-space of item `i`, recovered from its residual.
    pub fn estimate(&self, dataset: &Dataset, i: usize) -> Result<MultiCoilKSpace> {
        dataset.items()[i].sub(&self.residuals[i])
    }

    pub fn maps(&self, dataset: &Dataset, delta: f64) -> Result<ImportanceMaps> {
        ImportanceMaps::compute(&self.residuals, dataset, delta)
    }
}

/// `F(Ω)`: reconstructs each item once (in parallel) and averages the
/// normalised errors in item order.
pub fn efficacy(
    pattern: &SamplingPattern,
    dataset: &Dataset,
    recon: &dyn Reconstructor,
) -> Result<Efficacy> {
    if pattern.members().is_empty() {
        return Err(Error::EmptyPattern);
    }
    let per: Vec<Result<(f64, MultiCoilKSpace)>> = dataset
        .items()
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let run = || -> Result<(f64, MultiCoilKSpace)> {
                let sampled = apply_sampling(pattern, m)?;
                let est = recon.reconstruct(pattern, &sampled)?;
                let e = m.sub(&est)?;
                let f = distance_f(m, &est)?;
                Ok((f, e))
            };
            run().map_err(|e| e.at_item(i))
        })
        .collect();
    let mut per_item = Vec::with_capacity(per.len());
    let mut residuals = Vec::with_capacity(per.len());
    for r in per {
        let (f, e) = r?;
        per_item.push(f);
        residuals.push(e);
    }
    let value = per_item.iter().sum::<f64>() / per_item.len() as f64;
    Ok(Efficacy {
        value,
        per_item,
        residuals,
    })
}

/// Mean SSIM between coil-combined references and the estimates implied by
/// `eff`'s residuals.
pub fn mean_ssim(eff: &Efficacy, dataset: &Dataset, sens: &CoilSensitivities) -> Result<f64> {
    let vals: Vec<Result<f64>> = (0..dataset.len())
        .into_par_iter()
        .map(|i| {
            let (x, xh) = image_pair(eff, dataset, sens, i)?;
            ssim(&x, &xh).map_err(|e| e.at_item(i))
        })
        .collect();
    let mut total = 0.0;
    for v in vals {
        total += v?;
    }
    Ok(total / dataset.len() as f64)
}

fn image_pair(
    eff: &Efficacy,
    dataset: &Dataset,
    sens: &CoilSensitivities,
    i: usize,
) -> Result<(ImageVolume, ImageVolume)> {
    let x = coil_combine(&dataset.items()[i], sens).map_err(|e| e.at_item(i))?;
    let xh = coil_combine(&eff.estimate(dataset, i)?, sens).map_err(|e| e.at_item(i))?;
    Ok((x, xh))
}

/// `G(Ω)`: mean over items of `−SSIM(|x_i|, |x̂_i|)`.
pub fn image_criterion(
    pattern: &SamplingPattern,
    dataset: &Dataset,
    recon: &dyn Reconstructor,
    sens: &CoilSensitivities,
) -> Result<f64> {
    let eff = efficacy(pattern, dataset, recon)?;
    Ok(-mean_ssim(&eff, dataset, sens)?)
}

/// Criterion value of an already computed efficacy.
pub fn criterion_value(
    criterion: Criterion,
    eff: &Efficacy,
    dataset: &Dataset,
    sens: Option<&CoilSensitivities>,
) -> Result<f64> {
    match criterion {
        Criterion::Kspace => Ok(eff.value),
        Criterion::Image => {
            let sens = sens.ok_or_else(|| {
                Error::InvalidConfig("image criterion needs coil sensitivities".into())
            })?;
            Ok(-mean_ssim(eff, dataset, sens)?)
        }
    }
}

/// SHA-256 of the dataset's dimensions and values.
pub fn dataset_fingerprint(dataset: &Dataset) -> String {
    let g = dataset.grid();
    let mut h = Sha256::new();
    for d in [g.nx, g.ny, g.nt, g.nc, dataset.len()] {
        h.update((d as u64).to_le_bytes());
    }
    for item in dataset.items() {
        for v in item.values() {
            h.update(v.re.to_le_bytes());
            h.update(v.im.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

/// Summary of one pattern on one dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub cost_f: f64,
    pub per_item_f: Vec<f64>,
    /// Square root of the summed per-item errors.
    pub nrmse_kspace: f64,
    /// Square root of the mean per-item error.
    pub nrmse_kspace_per_item_mean: f64,
    pub nrmse_image: f64,
    pub mean_ssim: f64,
    pub recon_calls: u64,
    pub wall_ms: u64,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str =
        "F,nrmse_kspace,nrmse_kspace_per_item_mean,nrmse_image,mean_ssim,recon_calls,wall_ms";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.cost_f,
            self.nrmse_kspace,
            self.nrmse_kspace_per_item_mean,
            self.nrmse_image,
            self.mean_ssim,
            self.recon_calls,
            self.wall_ms
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Reconstructs every item once and reports all metrics.
pub fn evaluate(
    pattern: &SamplingPattern,
    dataset: &Dataset,
    recon: &dyn Reconstructor,
    sens: &CoilSensitivities,
) -> Result<EvalReport> {
    let start = Instant::now();
    let eff = efficacy(pattern, dataset, recon)?;
    let sum: f64 = eff.per_item.iter().sum();
    let mut img_err = 0.0;
    let mut ssim_total = 0.0;
    for i in 0..dataset.len() {
        let (x, xh) = image_pair(&eff, dataset, sens, i)?;
        img_err += normalized_sq_error(x.values(), xh.values()).map_err(|e| e.at_item(i))?;
        ssim_total += ssim(&x, &xh).map_err(|e| e.at_item(i))?;
    }
    Ok(EvalReport {
        cost_f: eff.value,
        nrmse_kspace: sum.sqrt(),
        nrmse_kspace_per_item_mean: (sum / dataset.len() as f64).sqrt(),
        nrmse_image: img_err.sqrt(),
        mean_ssim: ssim_total / dataset.len() as f64,
        per_item_f: eff.per_item,
        recon_calls: dataset.len() as u64,
        wall_ms: start.elapsed().as_millis() as u64,
    })
}
