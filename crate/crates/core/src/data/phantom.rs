use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sensitivity::simulate_sensitivities;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grid::KSpaceGrid;
use crate::recon::{CoilSensitivities, Encoder};
use crate::volume::{ImageVolume, MultiCoilKSpace, C64};

/// Random ellipse phantoms. Each item is a jittered outer ellipse with a few
/// inner ellipses painted over it; every ellipse is one tissue with its own
/// density and decay constant, so multi-frame items decay per pixel as a
/// single exponential. A smooth intensity modulation and phase, constant over
/// frames, keep the images from being exactly piecewise constant.
/// Layout of the ellipses in each item.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhantomShape {
    /// Modified Shepp–Logan head, jittered per item, plus optional random
    /// extra ellipses.
    #[default]
    SheppLogan,
    /// One jittered outer ellipse plus random inner ellipses.
    Ellipses,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhantomConfig {
    pub shape: PhantomShape,
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub nc: usize,
    pub items: usize,
    /// Inclusive range of random (extra) inner ellipse counts.
    pub ellipse_count: [usize; 2],
    /// Range of inner semi-axes, as a fraction of the half field of view.
    pub ellipse_size: [f64; 2],
    /// Range of tissue densities of inner ellipses; the outer one is 1.
    pub intensity: [f64; 2],
    /// Relative perturbation of template ellipses.
    pub jitter: f64,
    /// Amplitude of a smooth multiplicative intensity modulation.
    pub texture: f64,
    /// Peak of a smooth random image phase, in radians.
    pub phase: f64,
    /// Coil lobe width as a fraction of the larger image side.
    pub coil_smoothness: f64,
    /// Frame times in ms; empty means `0, 10, 20, …`.
    pub time_stamps_ms: Vec<f64>,
    /// Range of decay constants in ms.
    pub decay_ms: [f64; 2],
    /// Complex Gaussian k-space noise, relative to the peak modulus.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for PhantomConfig {
    fn default() -> Self {
        Self {
            shape: PhantomShape::SheppLogan,
            nx: 32,
            ny: 32,
            nt: 1,
            nc: 1,
            items: 10,
            ellipse_count: [0, 2],
            ellipse_size: [0.08, 0.35],
            intensity: [0.2, 0.9],
            jitter: 0.1,
            texture: 0.2,
            phase: 0.5,
            coil_smoothness: 0.5,
            time_stamps_ms: Vec::new(),
            decay_ms: [20.0, 150.0],
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

impl PhantomConfig {
    pub fn new(nx: usize, ny: usize, nt: usize, nc: usize, items: usize) -> Self {
        Self {
            nx,
            ny,
            nt,
            nc,
            items,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidConfig(s));
        if self.nx < 4 || self.ny < 4 {
            return bad(format!(
                "phantom must be at least 4x4, got {}x{}",
                self.nx, self.ny
            ));
        }
        if self.nt == 0 || self.nc == 0 || self.items == 0 {
            return bad("frames, coils and items must be at least 1".into());
        }
        if self.ellipse_count[0] > self.ellipse_count[1] {
            return bad("ellipse_count range is reversed".into());
        }
        let ordered = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
        if !ordered(self.ellipse_size) || self.ellipse_size[0] <= 0.0 {
            return bad("ellipse_size must be a positive range".into());
        }
        if !ordered(self.intensity) {
            return bad("intensity must be a finite range".into());
        }
        if !ordered(self.decay_ms) || self.decay_ms[0] <= 0.0 {
            return bad("decay constants must be > 0".into());
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!(
                "noise sigma must be >= 0, got {}",
                self.noise_sigma
            ));
        }
        if !(self.texture >= 0.0 && self.texture < 1.0) {
            return bad(format!("texture must lie in [0, 1), got {}", self.texture));
        }
        if !(self.phase >= 0.0 && self.phase.is_finite()) {
            return bad(format!("phase must be >= 0, got {}", self.phase));
        }
        if !(self.jitter >= 0.0 && self.jitter < 0.5) {
            return bad(format!("jitter must lie in [0, 0.5), got {}", self.jitter));
        }
        if !self.time_stamps_ms.is_empty() && self.time_stamps_ms.len() != self.nt {
            return bad(format!(
                "{} time stamps for {} frames",
                self.time_stamps_ms.len(),
                self.nt
            ));
        }
        KSpaceGrid::new(self.nx, self.ny, self.nt, self.nc)?;
        Ok(())
    }

    pub fn time_stamps(&self) -> Vec<f64> {
        if self.time_stamps_ms.is_empty() {
            (0..self.nt).map(|t| 10.0 * t as f64).collect()
        } else {
            self.time_stamps_ms.clone()
        }
    }
}

/// A generated data set with everything needed to score reconstructions.
#[derive(Clone, Debug)]
pub struct Phantom {
    pub dataset: Dataset,
    pub sensitivities: CoilSensitivities,
    /// Noise-free images, scaled like the normalised k-space.
    pub truth: Vec<ImageVolume>,
}

struct Ellipse {
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
    angle: f64,
    density: f64,
    decay: f64,
}

impl Ellipse {
    fn contains(&self, u: f64, v: f64) -> bool {
        let (s, c) = self.angle.sin_cos();
        let (du, dv) = (u - self.cx, v - self.cy);
        let p = (du * c + dv * s) / self.a;
        let q = (-du * s + dv * c) / self.b;
        p * p + q * q <= 1.0
    }
}

fn quantize(v: C64) -> C64 {
    C64::new(v.re as f32 as f64, v.im as f32 as f64)
}

/// Modified Shepp–Logan ellipses as `(density, a, b, x0, y0, degrees)`, with
/// the additive intensities turned into painter's-order densities.
const SHEPP_LOGAN: [(f64, f64, f64, f64, f64, f64); 10] = [
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (0.2, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (0.05, 0.11, 0.31, 0.22, 0.0, -18.0),
    (0.05, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.3, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.3, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.3, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.3, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.3, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.3, 0.023, 0.046, 0.06, -0.605, 0.0),
];

fn draw_decay(config: &PhantomConfig, rng: &mut ChaCha8Rng) -> f64 {
    let [lo, hi] = config.decay_ms;
    if lo < hi {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn draw_range(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[0] < r[1] {
        rng.random_range(r[0]..r[1])
    } else {
        r[0]
    }
}

/// Uniform in `[-j, j]`, or 0 without jitter.
fn draw_jitter(rng: &mut ChaCha8Rng, j: f64) -> f64 {
    if j > 0.0 {
        rng.random_range(-j..j)
    } else {
        0.0
    }
}

fn ellipses(config: &PhantomConfig, rng: &mut ChaCha8Rng) -> Vec<Ellipse> {
    let j = config.jitter;
    let mut out = Vec::new();
    match config.shape {
        PhantomShape::SheppLogan => {
            for &(density, a, b, x0, y0, deg) in &SHEPP_LOGAN {
                let scale = 1.0 + draw_jitter(rng, j);
                out.push(Ellipse {
                    cx: x0 + 0.1 * draw_jitter(rng, j),
                    cy: y0 + 0.1 * draw_jitter(rng, j),
                    a: a * scale * (1.0 + 0.5 * draw_jitter(rng, j)),
                    b: b * scale * (1.0 + 0.5 * draw_jitter(rng, j)),
                    angle: deg.to_radians() + draw_jitter(rng, j),
                    density: density * (1.0 + draw_jitter(rng, j)),
                    decay: draw_decay(config, rng),
                });
            }
        }
        PhantomShape::Ellipses => {
            out.push(Ellipse {
                cx: draw_jitter(rng, j),
                cy: draw_jitter(rng, j),
                a: 0.72 * (1.0 + draw_jitter(rng, j)),
                b: 0.88 * (1.0 + draw_jitter(rng, j)),
                angle: draw_jitter(rng, j) * std::f64::consts::PI,
                density: 1.0,
                decay: draw_decay(config, rng),
            });
        }
    }
    // extra ellipses stay inside the outer one
    let (ox, oy, oa, ob) = (out[0].cx, out[0].cy, out[0].a, out[0].b);
    let [cmin, cmax] = config.ellipse_count;
    let count = rng.random_range(cmin..=cmax);
    for _ in 0..count {
        let radius = 0.5 * rng.random::<f64>().sqrt();
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let e = Ellipse {
            cx: ox + radius * oa * theta.cos(),
            cy: oy + radius * ob * theta.sin(),
            a: draw_range(rng, config.ellipse_size),
            b: draw_range(rng, config.ellipse_size),
            angle: rng.random_range(0.0..std::f64::consts::PI),
            density: draw_range(rng, config.intensity),
            decay: draw_decay(config, rng),
        };
        out.push(e);
    }
    out
}

/// Smooth fields over the unit square: a few random plane waves for the
/// intensity modulation and a random bilinear phase.
struct Smooth {
    waves: Vec<(f64, f64, f64, f64)>,
    texture: f64,
    phase: [f64; 3],
}

impl Smooth {
    fn draw(config: &PhantomConfig, rng: &mut ChaCha8Rng) -> Self {
        let waves = (0..3)
            .map(|_| {
                let f = rng.random_range(1.0..4.0) * std::f64::consts::PI;
                let a = rng.random_range(0.0..std::f64::consts::PI);
                (
                    f * a.cos(),
                    f * a.sin(),
                    rng.random_range(0.0..std::f64::consts::TAU),
                    rng.random_range(0.5..1.0),
                )
            })
            .collect();
        let mut c = || rng.random_range(-1.0..1.0);
        let phase = [
            c() * config.phase / 3.0,
            c() * config.phase / 3.0,
            c() * config.phase / 3.0,
        ];
        Self {
            waves,
            texture: config.texture,
            phase,
        }
    }

    fn at(&self, u: f64, v: f64) -> C64 {
        let wave: f64 = self
            .waves
            .iter()
            .map(|&(fu, fv, p, w)| w * (fu * u + fv * v + p).sin())
            .sum::<f64>()
            / 3.0;
        let mag = 1.0 + self.texture * wave;
        C64::from_polar(
            mag,
            self.phase[0] * u + self.phase[1] * v + self.phase[2] * u * v,
        )
    }
}

fn rasterize(config: &PhantomConfig, shapes: &[Ellipse], smooth: &Smooth) -> Result<ImageVolume> {
    let (nx, ny, nt) = (config.nx, config.ny, config.nt);
    let plane = nx * ny;
    let stamps = config.time_stamps();
    let mut values = vec![C64::new(0.0, 0.0); plane * nt];
    for y in 0..ny {
        let v = (y as f64 - ny as f64 / 2.0) / (ny as f64 / 2.0);
        for x in 0..nx {
            let u = (x as f64 - nx as f64 / 2.0) / (nx as f64 / 2.0);
            // painter's order: the last ellipse containing the pixel wins
            if let Some(e) = shapes.iter().rev().find(|e| e.contains(u, v)) {
                let w = smooth.at(u, v);
                for (t, &ms) in stamps.iter().enumerate() {
                    let s = if nt == 1 {
                        e.density
                    } else {
                        e.density * (-ms / e.decay).exp()
                    };
                    values[t * plane + y * nx + x] = w * s;
                }
            }
        }
    }
    ImageVolume::from_values(nx, ny, nt, values)
}

/// Generates items in parallel; item `i` draws from RNG stream `i + 1` of the
/// seed, the coil profiles from stream 0.
pub fn generate_phantom_dataset(config: &PhantomConfig) -> Result<Phantom> {
    config.validate()?;
    let grid = KSpaceGrid::new(config.nx, config.ny, config.nt, config.nc)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sens = simulate_sensitivities(
        config.nx,
        config.ny,
        config.nc,
        config.coil_smoothness,
        &mut rng,
    )?;
    let sens = CoilSensitivities::new(
        config.nx,
        config.ny,
        config.nc,
        sens.values().iter().map(|&v| quantize(v)).collect(),
    )?;
    let encoder = Encoder::for_grid(sens.clone(), &grid)?;

    let made: Vec<Result<(MultiCoilKSpace, ImageVolume)>> = (0..config.items)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64 + 1);
            let shapes = ellipses(config, &mut rng);
            let smooth = Smooth::draw(config, &mut rng);
            let image = rasterize(config, &shapes, &smooth)?;
            let mut m = encoder.forward(&image)?;
            if config.noise_sigma > 0.0 {
                let s = config.noise_sigma * m.max_modulus() / std::f64::consts::SQRT_2;
                for v in m.values_mut() {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *v += C64::new(re * s, im * s);
                }
            }
            let peak = m.max_modulus();
            let m = m.normalize().map_err(|e| e.at_item(i))?;
            let m = MultiCoilKSpace::from_values(
                grid,
                m.values().iter().map(|&v| quantize(v)).collect(),
            )?;
            let truth: Vec<C64> = image.values().iter().map(|&v| quantize(v / peak)).collect();
            Ok((
                m,
                ImageVolume::from_values(config.nx, config.ny, config.nt, truth)?,
            ))
        })
        .collect();
    let mut items = Vec::with_capacity(config.items);
    let mut truth = Vec::with_capacity(config.items);
    for r in made {
        let (m, x) = r?;
        items.push(m);
        truth.push(x);
    }
    Ok(Phantom {
        dataset: Dataset::new(items)?,
        sensitivities: sens,
        truth,
    })
}
