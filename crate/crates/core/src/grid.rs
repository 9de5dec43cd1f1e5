use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensions of a Cartesian multi-coil k-space acquisition.
///
/// Sample points are the `nx * ny * nt` spatial-temporal positions; the coil
/// axis is not part of the point set since every coil is sampled at the same
/// positions. Points are numbered row-major over `(t, ky, kx)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KSpaceGrid {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub nc: usize,
}

impl KSpaceGrid {
    pub fn new(nx: usize, ny: usize, nt: usize, nc: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || nt == 0 || nc == 0 {
            return Err(Error::InvalidGrid(format!(
                "all dimensions must be >= 1, got {nx}x{ny}x{nt}x{nc}"
            )));
        }
        nx.checked_mul(ny)
            .and_then(|p| p.checked_mul(nt))
            .and_then(|p| p.checked_mul(nc))
            .ok_or_else(|| Error::InvalidGrid("dimension product overflows".into()))?;
        Ok(Self { nx, ny, nt, nc })
    }

    /// Number of sample points `N` (coils excluded).
    #[inline]
    pub fn n_points(&self) -> usize {
        self.nx * self.ny * self.nt
    }

    /// Points in one frame.
    #[inline]
    pub fn plane(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn index_of(&self, kx: usize, ky: usize, t: usize) -> usize {
        debug_assert!(kx < self.nx && ky < self.ny && t < self.nt);
        (t * self.ny + ky) * self.nx + kx
    }

    #[inline]
    pub fn coords_of(&self, k: usize) -> (usize, usize, usize) {
        let kx = k % self.nx;
        let rest = k / self.nx;
        (kx, rest % self.ny, rest / self.ny)
    }

    /// Signed frequency of an unshifted FFT bin: `0..n/2` stay positive,
    /// the upper half maps to negative frequencies.
    #[inline]
    pub fn signed_freq(bin: usize, n: usize) -> i64 {
        let half = n / 2;
        if bin < n - half {
            bin as i64
        } else {
            bin as i64 - n as i64
        }
    }

    /// Bin holding signed frequency `f` (taken modulo `n`).
    #[inline]
    pub fn bin_of_freq(f: i64, n: usize) -> usize {
        f.rem_euclid(n as i64) as usize
    }

    /// Same spatial-temporal sampling domain, ignoring the coil count.
    pub fn same_points(&self, other: &KSpaceGrid) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.nt == other.nt
    }

    pub fn with_coils(&self, nc: usize) -> Result<Self> {
        Self::new(self.nx, self.ny, self.nt, nc)
    }

    pub(crate) fn check_points(&self, other: &KSpaceGrid) -> Result<()> {
        if self.same_points(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: *self,
                found: *other,
            })
        }
    }
}

impl fmt::Display for KSpaceGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}x{}", self.nx, self.ny, self.nt, self.nc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_zero_dims() {
        assert!(KSpaceGrid::new(0, 4, 1, 1).is_err());
        assert!(KSpaceGrid::new(4, 4, 1, 0).is_err());
    }

    #[test]
    fn signed_freq_layout() {
        let f: Vec<i64> = (0..4).map(|b| KSpaceGrid::signed_freq(b, 4)).collect();
        assert_eq!(f, vec![0, 1, -2, -1]);
        let f: Vec<i64> = (0..5).map(|b| KSpaceGrid::signed_freq(b, 5)).collect();
        assert_eq!(f, vec![0, 1, 2, -2, -1]);
        for b in 0..7 {
            assert_eq!(KSpaceGrid::bin_of_freq(KSpaceGrid::signed_freq(b, 7), 7), b);
        }
    }

    proptest! {
        #[test]
        fn index_bijection(nx in 1usize..20, ny in 1usize..20, nt in 1usize..5, seed in 0usize..10_000) {
            let g = KSpaceGrid::new(nx, ny, nt, 1).unwrap();
            let k = seed % g.n_points();
            let (x, y, t) = g.coords_of(k);
            prop_assert!(x < nx && y < ny && t < nt);
            prop_assert_eq!(g.index_of(x, y, t), k);
        }
    }
}
