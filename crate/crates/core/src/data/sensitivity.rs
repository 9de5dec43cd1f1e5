use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::recon::CoilSensitivities;
use crate::volume::C64;

/// Smooth synthetic receive profiles: one Gaussian lobe per coil, centred on
/// equispaced positions just outside the field of view, each with a random
/// linear phase ramp relative to coil 0. Profiles are normalised to unit
/// sum of squares at every pixel.
///
/// `smoothness` is the lobe width as a fraction of the larger image side.
pub fn simulate_sensitivities<R: Rng + ?Sized>(
    nx: usize,
    ny: usize,
    nc: usize,
    smoothness: f64,
    rng: &mut R,
) -> Result<CoilSensitivities> {
    if nc == 0 {
        return Err(Error::InvalidConfig("coil count must be at least 1".into()));
    }
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidGrid(format!("sensitivity dims {nx}x{ny}")));
    }
    if !(smoothness > 0.0 && smoothness.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "smoothness must be > 0, got {smoothness}"
        )));
    }
    let plane = nx * ny;
    let width = smoothness * nx.max(ny) as f64;
    let (cx, cy) = ((nx as f64 - 1.0) / 2.0, (ny as f64 - 1.0) / 2.0);
    let offset = rng.random::<f64>() * 2.0 * PI;
    let mut values = vec![C64::new(0.0, 0.0); plane * nc];
    for c in 0..nc {
        let angle = offset + 2.0 * PI * c as f64 / nc as f64;
        let (px, py) = (
            cx + 0.6 * nx as f64 * angle.cos(),
            cy + 0.6 * ny as f64 * angle.sin(),
        );
        let (ramp_x, ramp_y, phase0) = if c == 0 {
            (0.0, 0.0, 0.0)
        } else {
            (
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
            )
        };
        for y in 0..ny {
            for x in 0..nx {
                let (dx, dy) = (x as f64 - px, y as f64 - py);
                let mag = (-(dx * dx + dy * dy) / (2.0 * width * width)).exp();
                let phase = phase0
                    + ramp_x * (x as f64 / nx as f64 - 0.5)
                    + ramp_y * (y as f64 / ny as f64 - 0.5);
                values[c * plane + y * nx + x] = C64::from_polar(mag, phase);
            }
        }
    }
    for p in 0..plane {
        let sos: f64 = (0..nc).map(|c| values[c * plane + p].norm_sqr()).sum();
        if sos.is_nan() || sos <= 0.0 {
            return Err(Error::InvalidConfig(
                "sensitivity lobes too narrow for the grid".into(),
            ));
        }
        let s = 1.0 / sos.sqrt();
        for c in 0..nc {
            values[c * plane + p] *= s;
        }
    }
    if nc == 1 {
        // a single normalised coil with zero phase is exactly one
        values.iter_mut().for_each(|v| *v = C64::new(1.0, 0.0));
    }
    CoilSensitivities::new(nx, ny, nc, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_coil_is_one() {
        let s = simulate_sensitivities(8, 6, 1, 0.5, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(s.values().iter().all(|v| *v == C64::new(1.0, 0.0)));
    }

    #[test]
    fn unit_sum_of_squares() {
        for nc in [2, 4, 8] {
            let s =
                simulate_sensitivities(32, 24, nc, 0.4, &mut ChaCha8Rng::seed_from_u64(nc as u64))
                    .unwrap();
            assert!(s.sum_of_squares().iter().all(|v| (v - 1.0).abs() < 1e-10));
        }
    }

    #[test]
    fn deterministic() {
        let a = simulate_sensitivities(16, 16, 4, 0.5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = simulate_sensitivities(16, 16, 4, 0.5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!(simulate_sensitivities(16, 16, 0, 0.5, &mut ChaCha8Rng::seed_from_u64(9)).is_err());
    }

    #[test]
    fn coils_differ() {
        let s = simulate_sensitivities(16, 16, 2, 0.5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let d: f64 = s
            .coil(0)
            .iter()
            .zip(s.coil(1))
            .map(|(a, b)| (a.norm() - b.norm()).abs())
            .sum();
        assert!(d > 1.0);
    }
}
