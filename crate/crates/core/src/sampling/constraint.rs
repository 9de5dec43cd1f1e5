use serde::{Deserialize, Serialize};

use crate::grid::KSpaceGrid;

/// Rule forbidding two points chosen in one selection round from being
/// neighbours in the same frame, or complex conjugates of each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PositionalConstraint {
    /// Chebyshev radius in grid steps (cyclic); 1 is the 8-neighbourhood, 0
    /// disables the adjacency rule.
    pub radius: usize,
    pub exclude_conjugates: bool,
}

impl Default for PositionalConstraint {
    fn default() -> Self {
        Self {
            radius: 1,
            exclude_conjugates: true,
        }
    }
}

impl PositionalConstraint {
    pub fn none() -> Self {
        Self {
            radius: 0,
            exclude_conjugates: false,
        }
    }
}

/// Index of the point at `(-kx mod nx, -ky mod ny)` in the same frame.
#[inline]
pub fn conjugate_index(k: usize, grid: &KSpaceGrid) -> usize {
    let (kx, ky, t) = grid.coords_of(k);
    let cx = (grid.nx - kx) % grid.nx;
    let cy = (grid.ny - ky) % grid.ny;
    grid.index_of(cx, cy, t)
}

#[inline]
fn cyclic_gap(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

/// True iff `candidate` is within the adjacency radius of a chosen point in
/// the same frame, or is the conjugate of a chosen point.
pub fn violates_constraint(
    candidate: usize,
    chosen: &[usize],
    pc: &PositionalConstraint,
    grid: &KSpaceGrid,
) -> bool {
    let (cx, cy, ct) = grid.coords_of(candidate);
    chosen.iter().any(|&k| {
        if pc.exclude_conjugates && conjugate_index(k, grid) == candidate {
            return true;
        }
        if pc.radius == 0 {
            return false;
        }
        let (x, y, t) = grid.coords_of(k);
        t == ct
            && cyclic_gap(x, cx, grid.nx) <= pc.radius
            && cyclic_gap(y, cy, grid.ny) <= pc.radius
    })
}

/// Incremental form of [`violates_constraint`]: accepting a point marks its
/// neighbourhood and conjugate as blocked.
pub(crate) struct Blocker<'a> {
    grid: &'a KSpaceGrid,
    pc: PositionalConstraint,
    blocked: Vec<bool>,
}

impl<'a> Blocker<'a> {
    pub(crate) fn new(grid: &'a KSpaceGrid, pc: PositionalConstraint) -> Self {
        Self {
            grid,
            pc,
            blocked: vec![false; grid.n_points()],
        }
    }

    #[inline]
    pub(crate) fn is_blocked(&self, k: usize) -> bool {
        self.blocked[k]
    }

    pub(crate) fn accept(&mut self, k: usize) {
        let g = self.grid;
        if self.pc.exclude_conjugates {
            self.blocked[conjugate_index(k, g)] = true;
        }
        if self.pc.radius == 0 {
            return;
        }
        let (x, y, t) = g.coords_of(k);
        let r = self.pc.radius as i64;
        let (nx, ny) = (g.nx as i64, g.ny as i64);
        for dy in -r..=r {
            let yy = (y as i64 + dy).rem_euclid(ny) as usize;
            for dx in -r..=r {
                let xx = (x as i64 + dx).rem_euclid(nx) as usize;
                self.blocked[g.index_of(xx, yy, t)] = true;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn conjugate_examples() {
        let g = KSpaceGrid::new(4, 4, 1, 1).unwrap();
        assert_eq!(conjugate_index(0, &g), 0);
        assert_eq!(
            conjugate_index(g.index_of(1, 0, 0), &g),
            g.index_of(3, 0, 0)
        );
        for k in 0..g.n_points() {
            assert_eq!(conjugate_index(conjugate_index(k, &g), &g), k);
        }
        let g = KSpaceGrid::new(5, 3, 2, 1).unwrap();
        assert_eq!(
            conjugate_index(g.index_of(2, 1, 1), &g),
            g.index_of(3, 2, 1)
        );
    }

    #[test]
    fn violation_examples() {
        let g = KSpaceGrid::new(16, 16, 1, 1).unwrap();
        let pc = PositionalConstraint::default();
        let a = g.index_of(5, 5, 0);
        assert!(!violates_constraint(a, &[], &pc, &g));
        assert!(violates_constraint(g.index_of(6, 5, 0), &[a], &pc, &g));
        assert!(violates_constraint(g.index_of(6, 6, 0), &[a], &pc, &g));
        assert!(!violates_constraint(g.index_of(7, 5, 0), &[a], &pc, &g));
        // conjugate of (5,5) is (11,11), far away spatially
        assert!(violates_constraint(g.index_of(11, 11, 0), &[a], &pc, &g));
        // wraps around the grid edge
        assert!(violates_constraint(
            g.index_of(15, 0, 0),
            &[g.index_of(0, 1, 0)],
            &pc,
            &g
        ));
    }

    #[test]
    fn adjacency_is_per_frame() {
        let g = KSpaceGrid::new(8, 8, 2, 1).unwrap();
        let pc = PositionalConstraint {
            radius: 1,
            exclude_conjugates: false,
        };
        assert!(!violates_constraint(
            g.index_of(3, 3, 1),
            &[g.index_of(3, 3, 0)],
            &pc,
            &g
        ));
    }

    proptest! {
        #[test]
        fn blocker_agrees_with_direct_check(
            nx in 1usize..9, ny in 1usize..9, nt in 1usize..3,
            radius in 0usize..3, conj in any::<bool>(),
            picks in proptest::collection::vec(0usize..1000, 0..6),
            probe in 0usize..1000,
        ) {
            let g = KSpaceGrid::new(nx, ny, nt, 1).unwrap();
            let pc = PositionalConstraint { radius, exclude_conjugates: conj };
            let mut chosen: Vec<usize> = picks.iter().map(|p| p % g.n_points()).collect();
            chosen.sort_unstable();
            chosen.dedup();
            let mut b = Blocker::new(&g, pc);
            for &k in &chosen {
                b.accept(k);
            }
            let cand = probe % g.n_points();
            if !chosen.contains(&cand) {
                prop_assert_eq!(b.is_blocked(cand), violates_constraint(cand, &chosen, &pc, &g));
            }
        }
    }
}
