//! Importance maps over the grid points, computed from reconstruction
//! residuals `e_i = m_i − R(Ω, S_Ω m_i)`.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::volume::MultiCoilKSpace;

/// `ε_k = 1/(N_i N_c) Σ_i Σ_c |e_{i,c,k}|² / ‖m_i‖²`.
pub fn epsilon_map(residuals: &[MultiCoilKSpace], dataset: &Dataset) -> Result<Vec<f64>> {
    check(residuals, dataset)?;
    let g = dataset.grid();
    let n = g.n_points();
    let scale = 1.0 / (dataset.len() * g.nc) as f64;
    let mut eps = vec![0.0; n];
    for (e, m) in residuals.iter().zip(dataset.items()) {
        let norm = m.norm_sqr();
        if norm == 0.0 {
            return Err(Error::ZeroData);
        }
        for (k, v) in eps.iter_mut().enumerate() {
            *v += e.row_energy(k) / norm;
        }
    }
    eps.iter_mut().for_each(|v| *v *= scale);
    Ok(eps)
}

/// `r_k = 1/(N_i N_c) Σ_i (Σ_c |e_{i,c,k}|² + δ) / (Σ_c |m_{i,c,k}|² + δ)`.
pub fn r_map(residuals: &[MultiCoilKSpace], dataset: &Dataset, delta: f64) -> Result<Vec<f64>> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "delta must be > 0, got {delta}"
        )));
    }
    check(residuals, dataset)?;
    let g = dataset.grid();
    let scale = 1.0 / (dataset.len() * g.nc) as f64;
    let mut r = vec![0.0; g.n_points()];
    for (e, m) in residuals.iter().zip(dataset.items()) {
        for (k, v) in r.iter_mut().enumerate() {
            *v += (e.row_energy(k) + delta) / (m.row_energy(k) + delta);
        }
    }
    r.iter_mut().for_each(|v| *v *= scale);
    Ok(r)
}

fn check(residuals: &[MultiCoilKSpace], dataset: &Dataset) -> Result<()> {
    if residuals.len() != dataset.len() {
        return Err(Error::LengthMismatch {
            expected: dataset.len(),
            found: residuals.len(),
        });
    }
    if let Some(bad) = residuals.iter().find(|e| e.grid() != dataset.grid()) {
        return Err(Error::GridMismatch {
            expected: dataset.grid(),
            found: bad.grid(),
        });
    }
    Ok(())
}

/// ε-map and r-map of one pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceMaps {
    pub eps: Vec<f64>,
    pub rmap: Vec<f64>,
}

impl ImportanceMaps {
    pub fn compute(residuals: &[MultiCoilKSpace], dataset: &Dataset, delta: f64) -> Result<Self> {
        Ok(Self {
            eps: epsilon_map(residuals, dataset)?,
            rmap: r_map(residuals, dataset, delta)?,
        })
    }
}
