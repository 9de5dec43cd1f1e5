//! Dense complex volumes: multi-coil k-space, images, and sampled rows.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::KSpaceGrid;

pub type C64 = Complex64;

fn check_finite(values: &[C64]) -> Result<()> {
    match values
        .iter()
        .position(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// Fully sampled multi-coil k-space for one data item.
///
/// Storage is coil-major: `values[c * N + k]` holds coil `c` at point `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiCoilKSpace {
    grid: KSpaceGrid,
    values: Vec<C64>,
}

impl MultiCoilKSpace {
    pub fn zeros(grid: KSpaceGrid) -> Self {
        Self {
            grid,
            values: vec![C64::new(0.0, 0.0); grid.n_points() * grid.nc],
        }
    }

    pub fn from_values(grid: KSpaceGrid, values: Vec<C64>) -> Result<Self> {
        let expected = grid.n_points() * grid.nc;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: values.len(),
            });
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> KSpaceGrid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    #[inline]
    pub fn coil(&self, c: usize) -> &[C64] {
        let n = self.grid.n_points();
        &self.values[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn coil_mut(&mut self, c: usize) -> &mut [C64] {
        let n = self.grid.n_points();
        &mut self.values[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, k: usize, c: usize) -> C64 {
        self.values[c * self.grid.n_points() + k]
    }

    #[inline]
    pub fn set(&mut self, k: usize, c: usize, v: C64) {
        let n = self.grid.n_points();
        self.values[c * n + k] = v;
    }

    /// Energy of point `k` summed over coils.
    pub fn row_energy(&self, k: usize) -> f64 {
        (0..self.grid.nc).map(|c| self.get(k, c).norm_sqr()).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Divides every entry by the largest modulus, so the result peaks at 1.
    pub fn normalize(&self) -> Result<Self> {
        let peak = self.max_modulus();
        if peak == 0.0 {
            return Err(Error::ZeroData);
        }
        let scale = 1.0 / peak;
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= scale;
        }
        // The peak entry may land a rounding step away from 1.
        if let Some(p) = out
            .values
            .iter_mut()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        {
            let m = p.norm();
            if m != 1.0 {
                *p /= m;
            }
        }
        Ok(out)
    }

    /// `self - other`, entrywise.
    pub fn sub(&self, other: &MultiCoilKSpace) -> Result<MultiCoilKSpace> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                expected: self.grid,
                found: other.grid,
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
        })
    }
}

/// Complex 2D+time image, indexed like k-space points: `(t * ny + y) * nx + x`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageVolume {
    nx: usize,
    ny: usize,
    nt: usize,
    values: Vec<C64>,
}

impl ImageVolume {
    pub fn zeros(nx: usize, ny: usize, nt: usize) -> Self {
        Self {
            nx,
            ny,
            nt,
            values: vec![C64::new(0.0, 0.0); nx * ny * nt],
        }
    }

    pub fn from_values(nx: usize, ny: usize, nt: usize, values: Vec<C64>) -> Result<Self> {
        if nx == 0 || ny == 0 || nt == 0 {
            return Err(Error::InvalidGrid(format!("image dims {nx}x{ny}x{nt}")));
        }
        let expected = nx * ny * nt;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: values.len(),
            });
        }
        check_finite(&values)?;
        Ok(Self { nx, ny, nt, values })
    }

    pub fn from_real(nx: usize, ny: usize, nt: usize, values: &[f64]) -> Result<Self> {
        Self::from_values(
            nx,
            ny,
            nt,
            values.iter().map(|&v| C64::new(v, 0.0)).collect(),
        )
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nt)
    }

    #[inline]
    pub fn plane(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    #[inline]
    pub fn frame(&self, t: usize) -> &[C64] {
        let p = self.plane();
        &self.values[t * p..(t + 1) * p]
    }

    #[inline]
    pub fn frame_mut(&mut self, t: usize) -> &mut [C64] {
        let p = self.plane();
        &mut self.values[t * p..(t + 1) * p]
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn same_dims(&self, other: &ImageVolume) -> bool {
        self.dims() == other.dims()
    }
}

/// Undersampled measurements `S_Ω m`: one row per sampled point, in ascending
/// point order, each row holding all coils (`values[j * nc + c]`).
#[derive(Clone, Debug, PartialEq)]
pub struct Sampled {
    grid: KSpaceGrid,
    points: Vec<usize>,
    values: Vec<C64>,
}

impl Sampled {
    pub fn new(grid: KSpaceGrid, points: Vec<usize>, values: Vec<C64>) -> Result<Self> {
        let expected = points.len() * grid.nc;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: values.len(),
            });
        }
        if let Some(&bad) = points.iter().find(|&&k| k >= grid.n_points()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: grid.n_points(),
            });
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "sampled points must be strictly ascending".into(),
            ));
        }
        Ok(Self {
            grid,
            points,
            values,
        })
    }

    #[inline]
    pub fn grid(&self) -> KSpaceGrid {
        self.grid
    }

    #[inline]
    pub fn points(&self) -> &[usize] {
        &self.points
    }

    #[inline]
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Per-coil values of the `j`-th sampled row.
    #[inline]
    pub fn row(&self, j: usize) -> &[C64] {
        let nc = self.grid.nc;
        &self.values[j * nc..(j + 1) * nc]
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &[C64])> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.values.chunks_exact(self.grid.nc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn normalize_examples() {
        let g = KSpaceGrid::new(2, 2, 1, 1).unwrap();
        let d = MultiCoilKSpace::from_values(
            g,
            vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        assert_eq!(d.normalize().unwrap().values()[0], c(1.0, 0.0));

        let g = KSpaceGrid::new(2, 1, 1, 1).unwrap();
        let d = MultiCoilKSpace::from_values(g, vec![c(0.0, 1.0), c(2.0, 0.0)]).unwrap();
        let n = d.normalize().unwrap();
        assert_eq!(n.values(), &[c(0.0, 0.5), c(1.0, 0.0)]);
    }

    #[test]
    fn normalize_rejects_zero() {
        let g = KSpaceGrid::new(2, 2, 1, 2).unwrap();
        assert!(matches!(
            MultiCoilKSpace::zeros(g).normalize(),
            Err(Error::ZeroData)
        ));
    }

    #[test]
    fn normalize_random_peaks_at_one() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let g = KSpaceGrid::new(8, 6, 2, 3).unwrap();
        for _ in 0..20 {
            let v = (0..g.n_points() * g.nc)
                .map(|_| c(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
                .collect();
            let n = MultiCoilKSpace::from_values(g, v)
                .unwrap()
                .normalize()
                .unwrap();
            assert!((n.max_modulus() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn rejects_non_finite() {
        let g = KSpaceGrid::new(2, 1, 1, 1).unwrap();
        let r = MultiCoilKSpace::from_values(g, vec![c(f64::NAN, 0.0), c(0.0, 0.0)]);
        assert!(matches!(r, Err(Error::NonFinite(0))));
    }
}
