//! Sampling-pattern generators and positional constraints.
//!
//! Frequencies are measured on the unshifted FFT layout: the DC bin sits at
//! `(kx, ky) = (0, 0)` and the "centre" of k-space wraps around the edges.

mod constraint;

pub(crate) use constraint::Blocker;
pub use constraint::{conjugate_index, violates_constraint, PositionalConstraint};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::KSpaceGrid;
use crate::pattern::SamplingPattern;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    VariableDensity,
    PoissonDisk,
    CenterOnly,
    UniformRandom,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalibrationFrames {
    #[default]
    All,
    First,
}

/// Fully sampled central block, locked in every generated pattern.
///
/// A width `w` covers the `w` bins with signed frequency in
/// `-(w/2)..w - w/2`; a width of 0 disables the region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationRegion {
    pub width_x: usize,
    pub width_y: usize,
    pub frames: CalibrationFrames,
}

impl Default for CalibrationRegion {
    fn default() -> Self {
        Self {
            width_x: 4,
            width_y: 4,
            frames: CalibrationFrames::All,
        }
    }
}

impl CalibrationRegion {
    pub fn new(width_x: usize, width_y: usize) -> Self {
        Self {
            width_x,
            width_y,
            frames: CalibrationFrames::All,
        }
    }

    pub fn none() -> Self {
        Self::new(0, 0)
    }

    /// Point indices of the region, ascending.
    pub fn points(&self, grid: &KSpaceGrid) -> Vec<usize> {
        if self.width_x == 0 || self.width_y == 0 {
            return Vec::new();
        }
        let wx = self.width_x.min(grid.nx) as i64;
        let wy = self.width_y.min(grid.ny) as i64;
        let frames = match self.frames {
            CalibrationFrames::All => grid.nt,
            CalibrationFrames::First => 1,
        };
        let mut out = Vec::with_capacity((wx * wy) as usize * frames);
        for t in 0..frames {
            for fy in -(wy / 2)..wy - wy / 2 {
                for fx in -(wx / 2)..wx - wx / 2 {
                    let kx = KSpaceGrid::bin_of_freq(fx, grid.nx);
                    let ky = KSpaceGrid::bin_of_freq(fy, grid.ny);
                    out.push(grid.index_of(kx, ky, t));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    /// Exact number of points in the generated pattern.
    pub target: usize,
    /// Exponent `p` of the density law `(1 + d/σ)^(-p)`.
    #[serde(default = "default_exponent")]
    pub density_exponent: f64,
    /// Scale `σ` of the density law, in grid steps.
    #[serde(default = "default_scale")]
    pub density_scale: f64,
    /// Minimum distance between unlocked Poisson-disk points, grid steps.
    #[serde(default = "default_radius")]
    pub min_distance: f64,
    /// Relative growth of the Poisson-disk radius from the centre to the
    /// k-space corner (0 keeps it constant).
    #[serde(default)]
    pub radius_growth: f64,
    #[serde(default)]
    pub calibration: CalibrationRegion,
    #[serde(default)]
    pub seed: u64,
}

fn default_exponent() -> f64 {
    2.0
}
fn default_scale() -> f64 {
    4.0
}
fn default_radius() -> f64 {
    1.5
}

impl GeneratorConfig {
    pub fn new(kind: GeneratorKind, target: usize) -> Self {
        Self {
            kind,
            target,
            density_exponent: default_exponent(),
            density_scale: default_scale(),
            min_distance: default_radius(),
            radius_growth: 0.0,
            calibration: CalibrationRegion::default(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_calibration(mut self, calibration: CalibrationRegion) -> Self {
        self.calibration = calibration;
        self
    }
}

/// Distance of a point from DC within its frame, in grid steps.
pub fn center_distance(k: usize, grid: &KSpaceGrid) -> f64 {
    let (kx, ky, _) = grid.coords_of(k);
    let fx = KSpaceGrid::signed_freq(kx, grid.nx) as f64;
    let fy = KSpaceGrid::signed_freq(ky, grid.ny) as f64;
    fx.hypot(fy)
}

/// Variable-density inclusion weight `(1 + d/σ)^(-p)`.
pub fn density_weight(k: usize, grid: &KSpaceGrid, scale: f64, exponent: f64) -> f64 {
    (1.0 + center_distance(k, grid) / scale).powf(-exponent)
}

/// Orders `candidates` by Efraimidis–Spirakis keys `ln(u) / w`, largest
/// first; the first `m` are a weighted sample without replacement.
fn weighted_order(
    candidates: &[usize],
    weight: impl Fn(usize) -> f64,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = candidates
        .iter()
        .map(|&k| {
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            (u.ln() / weight(k), k)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, k)| k).collect()
}

pub fn generate(config: &GeneratorConfig, grid: &KSpaceGrid) -> Result<SamplingPattern> {
    let n = grid.n_points();
    let locked = config.calibration.points(grid);
    if config.target > n {
        return Err(Error::InvalidConfig(format!(
            "target {} exceeds {} grid points",
            config.target, n
        )));
    }
    if config.target < locked.len() {
        return Err(Error::InvalidConfig(format!(
            "target {} smaller than calibration region of {} points",
            config.target,
            locked.len()
        )));
    }
    if matches!(
        config.kind,
        GeneratorKind::VariableDensity | GeneratorKind::PoissonDisk
    ) && (config.density_scale <= 0.0 || config.density_exponent < 0.0)
    {
        return Err(Error::InvalidConfig(
            "density scale must be > 0 and exponent >= 0".into(),
        ));
    }

    let need = config.target - locked.len();
    let mut is_locked = vec![false; n];
    for &k in &locked {
        is_locked[k] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&k| !is_locked[k]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let chosen: Vec<usize> = match config.kind {
        GeneratorKind::CenterOnly => {
            let mut by_dist: Vec<(f64, usize)> = free
                .iter()
                .map(|&k| (center_distance(k, grid), k))
                .collect();
            by_dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            by_dist.into_iter().take(need).map(|(_, k)| k).collect()
        }
        GeneratorKind::UniformRandom => weighted_order(&free, |_| 1.0, &mut rng)
            .into_iter()
            .take(need)
            .collect(),
        GeneratorKind::VariableDensity => {
            let (s, p) = (config.density_scale, config.density_exponent);
            weighted_order(&free, |k| density_weight(k, grid, s, p), &mut rng)
                .into_iter()
                .take(need)
                .collect()
        }
        GeneratorKind::PoissonDisk => poisson_disk(config, grid, &free, need, &mut rng)?,
    };
    SamplingPattern::with_locked(*grid, chosen, &locked)
}

/// Dart throwing in density-weighted random order; a candidate is kept when
/// no kept point of the same frame lies closer than the larger of the two
/// local radii.
fn poisson_disk(
    config: &GeneratorConfig,
    grid: &KSpaceGrid,
    free: &[usize],
    need: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let r0 = config.min_distance;
    if r0.is_nan() || r0 < 0.0 || config.radius_growth < 0.0 {
        return Err(Error::InvalidConfig(
            "poisson-disk radius and growth must be >= 0".into(),
        ));
    }
    let d_max = ((grid.nx / 2) as f64).hypot((grid.ny / 2) as f64).max(1.0);
    let radius = |k: usize| r0 * (1.0 + config.radius_growth * center_distance(k, grid) / d_max);
    let r_max = r0 * (1.0 + config.radius_growth);
    let reach = r_max.ceil() as i64;

    let (s, p) = (config.density_scale, config.density_exponent);
    let order = weighted_order(free, |k| density_weight(k, grid, s, p), rng);
    let mut kept = vec![false; grid.n_points()];
    let mut out = Vec::with_capacity(need);
    for k in order {
        if out.len() == need {
            break;
        }
        let (kx, ky, t) = grid.coords_of(k);
        let fx = KSpaceGrid::signed_freq(kx, grid.nx);
        let fy = KSpaceGrid::signed_freq(ky, grid.ny);
        let rk = radius(k);
        let mut ok = true;
        'scan: for dy in -reach..=reach {
            for dx in -reach..=reach {
                let (gx, gy) = (fx + dx, fy + dy);
                // Neighbours are taken on the signed-frequency plane, no wrap.
                if KSpaceGrid::signed_freq(KSpaceGrid::bin_of_freq(gx, grid.nx), grid.nx) != gx
                    || KSpaceGrid::signed_freq(KSpaceGrid::bin_of_freq(gy, grid.ny), grid.ny) != gy
                {
                    continue;
                }
                let j = grid.index_of(
                    KSpaceGrid::bin_of_freq(gx, grid.nx),
                    KSpaceGrid::bin_of_freq(gy, grid.ny),
                    t,
                );
                if j != k && kept[j] {
                    let dist = ((dx * dx + dy * dy) as f64).sqrt();
                    if dist < rk.max(radius(j)) {
                        ok = false;
                        break 'scan;
                    }
                }
            }
        }
        if ok {
            kept[k] = true;
            out.push(k);
        }
    }
    if out.len() < need {
        return Err(Error::InvalidConfig(format!(
            "poisson-disk radius {r0} admits only {} of {need} points",
            out.len()
        )));
    }
    Ok(out)
}
