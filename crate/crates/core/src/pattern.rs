//! Sampling patterns and the sampling operator `S_Ω`.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::KSpaceGrid;
use crate::volume::{MultiCoilKSpace, Sampled, C64};

/// A subset Ω of the grid points with a locked calibration region.
///
/// Keeps a membership bitmap for O(1) tests and a sorted index list for
/// deterministic iteration. Immutable; edits produce new patterns.
#[derive(Clone, PartialEq, Eq)]
pub struct SamplingPattern {
    grid: KSpaceGrid,
    in_pattern: Vec<bool>,
    members: Vec<usize>,
    in_locked: Vec<bool>,
    locked: Vec<usize>,
}

impl fmt::Debug for SamplingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SamplingPattern")
            .field("grid", &self.grid)
            .field("len", &self.members.len())
            .field("locked", &self.locked.len())
            .finish()
    }
}

fn bitmap(n: usize, indices: &[usize]) -> Result<Vec<bool>> {
    let mut bits = vec![false; n];
    for &k in indices {
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, len: n });
        }
        bits[k] = true;
    }
    Ok(bits)
}

fn sorted_unique(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

impl SamplingPattern {
    /// Builds a pattern; duplicate indices are merged. Every locked index
    /// must also be listed as a member.
    pub fn new(
        grid: KSpaceGrid,
        members: impl IntoIterator<Item = usize>,
        locked: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let members = sorted_unique(members.into_iter().collect());
        let locked = sorted_unique(locked.into_iter().collect());
        let n = grid.n_points();
        let in_pattern = bitmap(n, &members)?;
        let in_locked = bitmap(n, &locked)?;
        if let Some(&k) = locked.iter().find(|&&k| !in_pattern[k]) {
            return Err(Error::LockedNotMember(k));
        }
        Ok(Self {
            grid,
            in_pattern,
            members,
            in_locked,
            locked,
        })
    }

    /// Builds a pattern whose members are `free ∪ locked`.
    pub fn with_locked(
        grid: KSpaceGrid,
        free: impl IntoIterator<Item = usize>,
        locked: &[usize],
    ) -> Result<Self> {
        Self::new(
            grid,
            free.into_iter().chain(locked.iter().copied()),
            locked.iter().copied(),
        )
    }

    pub fn empty(grid: KSpaceGrid) -> Self {
        let n = grid.n_points();
        Self {
            grid,
            in_pattern: vec![false; n],
            members: Vec::new(),
            in_locked: vec![false; n],
            locked: Vec::new(),
        }
    }

    pub fn full(grid: KSpaceGrid) -> Self {
        let n = grid.n_points();
        Self {
            grid,
            in_pattern: vec![true; n],
            members: (0..n).collect(),
            in_locked: vec![false; n],
            locked: Vec::new(),
        }
    }

    #[inline]
    pub fn grid(&self) -> KSpaceGrid {
        self.grid
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    #[inline]
    pub fn contains(&self, k: usize) -> bool {
        self.in_pattern[k]
    }

    #[inline]
    pub fn is_locked(&self, k: usize) -> bool {
        self.in_locked[k]
    }

    /// Members in ascending order.
    #[inline]
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    #[inline]
    pub fn locked(&self) -> &[usize] {
        &self.locked
    }

    pub fn membership(&self) -> &[bool] {
        &self.in_pattern
    }

    /// Members outside the locked region, ascending.
    pub fn unlocked_members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied().filter(|&k| !self.in_locked[k])
    }

    /// Grid points not in the pattern, ascending.
    pub fn non_members(&self) -> impl Iterator<Item = usize> + '_ {
        self.in_pattern
            .iter()
            .enumerate()
            .filter(|(_, &b)| !b)
            .map(|(k, _)| k)
    }

    /// `(Ω \ remove) ∪ add`. Removing a locked point is an error.
    pub fn with_changes(&self, add: &[usize], remove: &[usize]) -> Result<Self> {
        let n = self.grid.n_points();
        let mut bits = self.in_pattern.clone();
        for &k in remove {
            if k >= n {
                return Err(Error::IndexOutOfRange { index: k, len: n });
            }
            if self.in_locked[k] {
                return Err(Error::RemoveLocked(k));
            }
            bits[k] = false;
        }
        for &k in add {
            if k >= n {
                return Err(Error::IndexOutOfRange { index: k, len: n });
            }
            bits[k] = true;
        }
        let members = bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(k, _)| k)
            .collect();
        Ok(Self {
            grid: self.grid,
            in_pattern: bits,
            members,
            in_locked: self.in_locked.clone(),
            locked: self.locked.clone(),
        })
    }

    /// Members per frame.
    pub fn frame_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.grid.nt];
        let plane = self.grid.plane();
        for &k in &self.members {
            counts[k / plane] += 1;
        }
        counts
    }
}

/// Acceleration factor `N / M` kept as an exact ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AccelerationFactor {
    pub points: usize,
    pub sampled: usize,
}

impl AccelerationFactor {
    pub fn value(&self) -> f64 {
        self.points as f64 / self.sampled as f64
    }
}

impl fmt::Display for AccelerationFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.points, self.sampled)
    }
}

pub fn acceleration_factor(pattern: &SamplingPattern) -> Result<AccelerationFactor> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    Ok(AccelerationFactor {
        points: pattern.grid().n_points(),
        sampled: pattern.len(),
    })
}

/// `S_Ω m`: the rows of `data` at the pattern's points, in ascending order.
pub fn apply_sampling(pattern: &SamplingPattern, data: &MultiCoilKSpace) -> Result<Sampled> {
    let grid = data.grid();
    pattern.grid().check_points(&grid)?;
    let nc = grid.nc;
    let mut values = Vec::with_capacity(pattern.len() * nc);
    for &k in pattern.members() {
        for c in 0..nc {
            values.push(data.get(k, c));
        }
    }
    Sampled::new(grid, pattern.members().to_vec(), values)
}

/// `S_Ωᵀ v`: places sampled rows on the full grid, zeros elsewhere.
pub fn embed_sampled(pattern: &SamplingPattern, sampled: &Sampled) -> Result<MultiCoilKSpace> {
    let grid = sampled.grid();
    pattern.grid().check_points(&grid)?;
    if sampled.len() != pattern.len() {
        return Err(Error::LengthMismatch {
            expected: pattern.len(),
            found: sampled.len(),
        });
    }
    if sampled.points() != pattern.members() {
        return Err(Error::InvalidConfig(
            "sampled rows do not match pattern members".into(),
        ));
    }
    let mut out = MultiCoilKSpace::zeros(grid);
    for (k, row) in sampled.rows() {
        for (c, &v) in row.iter().enumerate() {
            out.set(k, c, v);
        }
    }
    Ok(out)
}

/// Zero-valued measurements for a pattern.
pub fn zero_sampled(pattern: &SamplingPattern, nc: usize) -> Result<Sampled> {
    let grid = pattern.grid().with_coils(nc)?;
    Sampled::new(
        grid,
        pattern.members().to_vec(),
        vec![C64::new(0.0, 0.0); pattern.len() * nc],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn grid(nx: usize, ny: usize, nc: usize) -> KSpaceGrid {
        KSpaceGrid::new(nx, ny, 1, nc).unwrap()
    }

    #[test]
    fn acceleration_examples() {
        let g = grid(320, 320, 16);
        let p = SamplingPattern::new(g, 0..6400, []).unwrap();
        assert_eq!(acceleration_factor(&p).unwrap().value(), 16.0);
        let g = grid(10, 10, 1);
        assert_eq!(
            acceleration_factor(&SamplingPattern::full(g))
                .unwrap()
                .value(),
            1.0
        );
        let g = grid(4, 4, 1);
        let p = SamplingPattern::new(g, [0, 5, 10, 15], []).unwrap();
        assert_eq!(acceleration_factor(&p).unwrap().value(), 4.0);
        assert!(matches!(
            acceleration_factor(&SamplingPattern::empty(g)),
            Err(Error::EmptyPattern)
        ));
    }

    #[test]
    fn apply_selects_rows() {
        let g = grid(2, 2, 1);
        let d = MultiCoilKSpace::from_values(
            g,
            vec![c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 0.0), c(4.0, 0.0)],
        )
        .unwrap();
        let p = SamplingPattern::new(g, [3, 0], []).unwrap();
        let s = apply_sampling(&p, &d).unwrap();
        let rows: Vec<(usize, C64)> = s.rows().map(|(k, r)| (k, r[0])).collect();
        assert_eq!(rows, vec![(0, c(1.0, 0.0)), (3, c(4.0, 0.0))]);

        let s = apply_sampling(&SamplingPattern::empty(g), &d).unwrap();
        assert!(s.is_empty());
        let full = apply_sampling(&SamplingPattern::full(g), &d).unwrap();
        assert_eq!(embed_sampled(&SamplingPattern::full(g), &full).unwrap(), d);
    }

    #[test]
    fn embed_places_rows() {
        let g = grid(2, 2, 1);
        let p = SamplingPattern::new(g, [0], []).unwrap();
        let s = Sampled::new(g, vec![0], vec![c(5.0, 0.0)]).unwrap();
        let e = embed_sampled(&p, &s).unwrap();
        assert_eq!(
            e.values(),
            &[c(5.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]
        );
        let short = Sampled::new(g, vec![], vec![]).unwrap();
        assert!(matches!(
            embed_sampled(&p, &short),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let d = MultiCoilKSpace::zeros(grid(4, 4, 1));
        let p = SamplingPattern::full(grid(4, 2, 1));
        assert!(matches!(
            apply_sampling(&p, &d),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn locked_must_be_members() {
        let g = grid(4, 4, 1);
        assert!(matches!(
            SamplingPattern::new(g, [1, 2], [3]),
            Err(Error::LockedNotMember(3))
        ));
        let p = SamplingPattern::new(g, [1, 2, 3], [3]).unwrap();
        assert!(matches!(
            p.with_changes(&[], &[3]),
            Err(Error::RemoveLocked(3))
        ));
        let q = p.with_changes(&[7], &[1]).unwrap();
        assert_eq!(q.members(), &[2, 3, 7]);
        assert!(q.is_locked(3));
    }

    fn arb_case() -> impl Strategy<Value = (usize, usize, usize, Vec<bool>, Vec<(f64, f64)>)> {
        (1usize..6, 1usize..6, 1usize..4).prop_flat_map(|(nx, ny, nc)| {
            let n = nx * ny;
            (
                Just(nx),
                Just(ny),
                Just(nc),
                proptest::collection::vec(any::<bool>(), n),
                proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), n * nc),
            )
        })
    }

    proptest! {
        #[test]
        fn sampling_projector_identities((nx, ny, nc, mask, vals) in arb_case()) {
            let g = grid(nx, ny, nc);
            let p = SamplingPattern::new(g, mask.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| k), []).unwrap();
            let d = MultiCoilKSpace::from_values(g, vals.iter().map(|&(a, b)| c(a, b)).collect()).unwrap();
            let s = apply_sampling(&p, &d).unwrap();
            let e = embed_sampled(&p, &s).unwrap();
            // apply ∘ embed = identity on sampled vectors
            prop_assert_eq!(&apply_sampling(&p, &e).unwrap(), &s);
            // embed ∘ apply is idempotent
            let e2 = embed_sampled(&p, &apply_sampling(&p, &e).unwrap()).unwrap();
            prop_assert_eq!(e2, e);
        }
    }
}
