//! Structural similarity on magnitude images: 11×11 Gaussian window with
//! σ = 1.5, K1 = 0.01, K2 = 0.03, computed per frame and averaged.
//!
//! Near the image border the window is truncated to the in-bounds pixels and
//! renormalised, so images smaller than the window are still handled.

use crate::error::{Error, Result};
use crate::volume::ImageVolume;

pub const WINDOW: usize = 11;
pub const SIGMA: f64 = 1.5;
pub const K1: f64 = 0.01;
pub const K2: f64 = 0.03;

fn gaussian_kernel() -> [f64; WINDOW] {
    let half = (WINDOW / 2) as f64;
    let mut k = [0.0; WINDOW];
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - half;
        *v = (-d * d / (2.0 * SIGMA * SIGMA)).exp();
    }
    k
}

/// Separable, truncation-renormalised Gaussian mean of one frame.
fn local_mean(img: &[f64], nx: usize, ny: usize, kernel: &[f64; WINDOW]) -> Vec<f64> {
    let half = (WINDOW / 2) as isize;
    let mut tmp = vec![0.0; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            let (mut acc, mut w) = (0.0, 0.0);
            for (i, &k) in kernel.iter().enumerate() {
                let xx = x as isize + i as isize - half;
                if xx >= 0 && (xx as usize) < nx {
                    acc += k * img[y * nx + xx as usize];
                    w += k;
                }
            }
            tmp[y * nx + x] = acc / w;
        }
    }
    let mut out = vec![0.0; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            let (mut acc, mut w) = (0.0, 0.0);
            for (i, &k) in kernel.iter().enumerate() {
                let yy = y as isize + i as isize - half;
                if yy >= 0 && (yy as usize) < ny {
                    acc += k * tmp[yy as usize * nx + x];
                    w += k;
                }
            }
            out[y * nx + x] = acc / w;
        }
    }
    out
}

/// Mean SSIM of two real frames with dynamic range `range`.
pub fn ssim_frame(x: &[f64], y: &[f64], nx: usize, ny: usize, range: f64) -> f64 {
    let kernel = gaussian_kernel();
    let c1 = (K1 * range).powi(2);
    let c2 = (K2 * range).powi(2);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let mx = local_mean(x, nx, ny, &kernel);
    let my = local_mean(y, nx, ny, &kernel);
    let mxx = local_mean(&xx, nx, ny, &kernel);
    let myy = local_mean(&yy, nx, ny, &kernel);
    let mxy = local_mean(&xy, nx, ny, &kernel);
    let mut total = 0.0;
    for i in 0..nx * ny {
        let (ux, uy) = (mx[i], my[i]);
        let vx = mxx[i] - ux * ux;
        let vy = myy[i] - uy * uy;
        let cov = mxy[i] - ux * uy;
        total +=
            ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
    }
    total / (nx * ny) as f64
}

/// SSIM between the magnitudes of `reference` and `estimate`, averaged over
/// frames. The dynamic range is the largest magnitude of the reference.
pub fn ssim(reference: &ImageVolume, estimate: &ImageVolume) -> Result<f64> {
    if !reference.same_dims(estimate) {
        return Err(Error::DimensionMismatch(format!(
            "{:?} vs {:?}",
            reference.dims(),
            estimate.dims()
        )));
    }
    let (nx, ny, nt) = reference.dims();
    let a = reference.magnitude();
    let b = estimate.magnitude();
    let mut range = a.iter().copied().fold(0.0, f64::max);
    if range == 0.0 {
        range = 1.0;
    }
    let plane = nx * ny;
    let total: f64 = (0..nt)
        .map(|t| {
            ssim_frame(
                &a[t * plane..(t + 1) * plane],
                &b[t * plane..(t + 1) * plane],
                nx,
                ny,
                range,
            )
        })
        .sum();
    Ok(total / nt as f64)
}
