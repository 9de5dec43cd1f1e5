//! Encoding operator `E = F C`: coil weighting followed by a per-coil,
//! per-frame unitary 2D FFT.

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::grid::KSpaceGrid;
use crate::volume::{ImageVolume, MultiCoilKSpace, C64};

/// Complex coil sensitivity maps, frame independent, coil-major
/// (`values[c * nx * ny + p]`).
#[derive(Clone, Debug, PartialEq)]
pub struct CoilSensitivities {
    nx: usize,
    ny: usize,
    nc: usize,
    values: Vec<C64>,
}

impl CoilSensitivities {
    pub fn new(nx: usize, ny: usize, nc: usize, values: Vec<C64>) -> Result<Self> {
        if nx == 0 || ny == 0 || nc == 0 {
            return Err(Error::InvalidGrid(format!(
                "sensitivity dims {nx}x{ny}x{nc}"
            )));
        }
        let expected = nx * ny * nc;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: values.len(),
            });
        }
        if let Some(i) = values
            .iter()
            .position(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { nx, ny, nc, values })
    }

    /// All coils equal to one (a single coil gives the plain FFT model).
    pub fn uniform(nx: usize, ny: usize, nc: usize) -> Self {
        let s = 1.0 / (nc as f64).sqrt();
        Self {
            nx,
            ny,
            nc,
            values: vec![C64::new(s, 0.0); nx * ny * nc],
        }
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nc)
    }

    #[inline]
    pub fn coil(&self, c: usize) -> &[C64] {
        let p = self.nx * self.ny;
        &self.values[c * p..(c + 1) * p]
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// `Σ_c |C_{n,c}|²` per pixel.
    pub fn sum_of_squares(&self) -> Vec<f64> {
        let p = self.nx * self.ny;
        let mut out = vec![0.0; p];
        for c in 0..self.nc {
            for (o, v) in out.iter_mut().zip(self.coil(c)) {
                *o += v.norm_sqr();
            }
        }
        out
    }

    /// Squared operator norm of `E` (the largest per-pixel sum of squares).
    pub fn max_sum_of_squares(&self) -> f64 {
        self.sum_of_squares().into_iter().fold(0.0, f64::max)
    }
}

/// Encoding operator bound to a set of sensitivities and a frame count.
#[derive(Clone, Debug)]
pub struct Encoder {
    sens: CoilSensitivities,
    grid: KSpaceGrid,
    fft: Fft2,
}

impl Encoder {
    pub fn new(sens: CoilSensitivities, nt: usize) -> Result<Self> {
        let (nx, ny, nc) = sens.dims();
        let grid = KSpaceGrid::new(nx, ny, nt, nc)?;
        Ok(Self {
            sens,
            grid,
            fft: Fft2::new(nx, ny),
        })
    }

    /// Encoder matching a k-space grid.
    pub fn for_grid(sens: CoilSensitivities, grid: &KSpaceGrid) -> Result<Self> {
        let (nx, ny, nc) = sens.dims();
        if (nx, ny, nc) != (grid.nx, grid.ny, grid.nc) {
            return Err(Error::DimensionMismatch(format!(
                "sensitivities {nx}x{ny}x{nc} vs grid {grid}"
            )));
        }
        Self::new(sens, grid.nt)
    }

    #[inline]
    pub fn grid(&self) -> KSpaceGrid {
        self.grid
    }

    pub fn sensitivities(&self) -> &CoilSensitivities {
        &self.sens
    }

    fn check_image(&self, x: &ImageVolume) -> Result<()> {
        let g = self.grid;
        if x.dims() != (g.nx, g.ny, g.nt) {
            let (a, b, c) = x.dims();
            return Err(Error::DimensionMismatch(format!(
                "image {a}x{b}x{c} vs grid {g}"
            )));
        }
        Ok(())
    }

    fn check_kspace(&self, m: &MultiCoilKSpace) -> Result<()> {
        if m.grid() != self.grid {
            return Err(Error::GridMismatch {
                expected: self.grid,
                found: m.grid(),
            });
        }
        Ok(())
    }

    /// `m = E x`.
    pub fn forward(&self, x: &ImageVolume) -> Result<MultiCoilKSpace> {
        self.check_image(x)?;
        let mut out = MultiCoilKSpace::zeros(self.grid);
        self.forward_into(x.values(), out.values_mut());
        Ok(out)
    }

    pub(crate) fn forward_into(&self, x: &[C64], out: &mut [C64]) {
        let g = self.grid;
        let plane = g.plane();
        let n = g.n_points();
        for c in 0..g.nc {
            let sens = self.sens.coil(c);
            for t in 0..g.nt {
                let frame = &mut out[c * n + t * plane..c * n + (t + 1) * plane];
                for ((o, xv), s) in frame
                    .iter_mut()
                    .zip(&x[t * plane..(t + 1) * plane])
                    .zip(sens)
                {
                    *o = xv * s;
                }
                self.fft.forward(frame);
            }
        }
    }

    /// `x = Eᴴ m`.
    pub fn adjoint(&self, m: &MultiCoilKSpace) -> Result<ImageVolume> {
        self.check_kspace(m)?;
        let g = self.grid;
        let mut out = ImageVolume::zeros(g.nx, g.ny, g.nt);
        let mut scratch = m.values().to_vec();
        self.adjoint_into(&mut scratch, out.values_mut());
        Ok(out)
    }

    /// Adjoint that consumes `m` as scratch space.
    pub(crate) fn adjoint_into(&self, m: &mut [C64], out: &mut [C64]) {
        let g = self.grid;
        let plane = g.plane();
        let n = g.n_points();
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for c in 0..g.nc {
            let sens = self.sens.coil(c);
            for t in 0..g.nt {
                let frame = &mut m[c * n + t * plane..c * n + (t + 1) * plane];
                self.fft.inverse(frame);
                for ((o, v), s) in out[t * plane..(t + 1) * plane]
                    .iter_mut()
                    .zip(frame.iter())
                    .zip(sens)
                {
                    *o += s.conj() * v;
                }
            }
        }
    }

    /// Per-pixel least-squares coil combination of the inverse FFTs, with
    /// weights `conj(C) / Σ|C|²`; pixels with zero sensitivity map to zero.
    pub fn coil_combine(&self, m: &MultiCoilKSpace) -> Result<ImageVolume> {
        let mut x = self.adjoint(m)?;
        let ss = self.sens.sum_of_squares();
        let plane = self.grid.plane();
        for t in 0..self.grid.nt {
            for (v, &s) in x.frame_mut(t).iter_mut().zip(&ss[..plane]) {
                *v = if s > 0.0 { *v / s } else { C64::new(0.0, 0.0) };
            }
        }
        Ok(x)
    }
}

/// `m = F C x` for a one-off call.
pub fn forward_e(x: &ImageVolume, sens: &CoilSensitivities) -> Result<MultiCoilKSpace> {
    let (_, _, nt) = x.dims();
    Encoder::new(sens.clone(), nt)?.forward(x)
}

/// Least-squares coil combination for a one-off call.
pub fn coil_combine(m: &MultiCoilKSpace, sens: &CoilSensitivities) -> Result<ImageVolume> {
    Encoder::for_grid(sens.clone(), &m.grid())?.coil_combine(m)
}
