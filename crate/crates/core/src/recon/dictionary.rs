//! Multi-exponential relaxation dictionary `x = D u`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionaryConfig {
    /// Relaxation constants `T_j` of the atoms (same unit as time stamps).
    pub decay_constants: Vec<f64>,
    /// Acquisition time of every frame.
    pub time_stamps: Vec<f64>,
}

impl DictionaryConfig {
    /// `count` decay constants spaced logarithmically over `[lo, hi]`.
    pub fn log_spaced(lo: f64, hi: f64, count: usize, time_stamps: Vec<f64>) -> Self {
        let decay_constants = if count == 1 {
            vec![lo]
        } else {
            (0..count)
                .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (count - 1) as f64).exp())
                .collect()
        };
        Self {
            decay_constants,
            time_stamps,
        }
    }
}

/// Atoms `d_j[t] = exp(−t/T_j)`, each normalised to unit ℓ2 norm over frames.
#[derive(Clone, Debug)]
pub struct Dictionary {
    nt: usize,
    n_atoms: usize,
    /// Row-major `nt × n_atoms`.
    atoms: Vec<f64>,
    decay_constants: Vec<f64>,
}

impl Dictionary {
    pub fn new(config: &DictionaryConfig) -> Result<Self> {
        let nt = config.time_stamps.len();
        let n_atoms = config.decay_constants.len();
        if nt < 2 {
            return Err(Error::InvalidConfig(
                "dictionary needs at least two frames".into(),
            ));
        }
        if n_atoms == 0 {
            return Err(Error::InvalidConfig(
                "dictionary needs at least one atom".into(),
            ));
        }
        if config
            .decay_constants
            .iter()
            .any(|&d| !(d > 0.0 && d.is_finite()))
        {
            return Err(Error::InvalidConfig(
                "decay constants must be positive".into(),
            ));
        }
        let mut atoms = vec![0.0; nt * n_atoms];
        for (j, &decay) in config.decay_constants.iter().enumerate() {
            let col: Vec<f64> = config
                .time_stamps
                .iter()
                .map(|&t| (-t / decay).exp())
                .collect();
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::InvalidConfig(format!("atom {j} has zero norm")));
            }
            for (t, v) in col.iter().enumerate() {
                atoms[t * n_atoms + j] = v / norm;
            }
        }
        Ok(Self {
            nt,
            n_atoms,
            atoms,
            decay_constants: config.decay_constants.clone(),
        })
    }

    #[inline]
    pub fn frames(&self) -> usize {
        self.nt
    }

    #[inline]
    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn decay_constants(&self) -> &[f64] {
        &self.decay_constants
    }

    #[inline]
    pub fn atom(&self, t: usize, j: usize) -> f64 {
        self.atoms[t * self.n_atoms + j]
    }

    /// Largest eigenvalue of `DᵀD`, i.e. `‖D‖²`.
    pub fn squared_norm(&self) -> f64 {
        let d = DMatrix::from_row_slice(self.nt, self.n_atoms, &self.atoms);
        let gram = d.transpose() * d;
        SymmetricEigen::new(gram)
            .eigenvalues
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    /// `x = D u` with `u[j * plane + p]` and `x[t * plane + p]`.
    pub(crate) fn synthesize(&self, u: &[C64], plane: usize) -> Vec<C64> {
        let mut x = vec![C64::new(0.0, 0.0); plane * self.nt];
        for t in 0..self.nt {
            let xt = &mut x[t * plane..(t + 1) * plane];
            for j in 0..self.n_atoms {
                let w = self.atom(t, j);
                if w == 0.0 {
                    continue;
                }
                for (o, v) in xt.iter_mut().zip(&u[j * plane..(j + 1) * plane]) {
                    *o += v * w;
                }
            }
        }
        x
    }

    /// `u = Dᵀ x`.
    pub(crate) fn analyze(&self, x: &[C64], plane: usize) -> Vec<C64> {
        let mut u = vec![C64::new(0.0, 0.0); plane * self.n_atoms];
        for j in 0..self.n_atoms {
            let uj = &mut u[j * plane..(j + 1) * plane];
            for t in 0..self.nt {
                let w = self.atom(t, j);
                for (o, v) in uj.iter_mut().zip(&x[t * plane..(t + 1) * plane]) {
                    *o += v * w;
                }
            }
        }
        u
    }
}
