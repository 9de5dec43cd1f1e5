use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::KSpaceGrid;
use crate::pattern::SamplingPattern;
use crate::sampling::{Blocker, PositionalConstraint};

/// `|Ω_a| = min(max(M + K − |Ω|, 0), K)`.
pub fn add_count(size: usize, m: usize, k: usize) -> usize {
    (m + k).saturating_sub(size).min(k)
}

/// `|Ω_r| = min(max(|Ω| + K − M, 0), K)`.
pub fn remove_count(size: usize, m: usize, k: usize) -> usize {
    (size + k).saturating_sub(m).min(k)
}

/// Points picked by one selection call.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    /// In order of selection (decreasing importance).
    pub points: Vec<usize>,
    /// Pre-selection probability actually used after escalation.
    pub rho: f64,
    /// Whether the positional constraint had to be dropped to reach the count.
    pub relaxed: bool,
}

/// Picks `|Ω_a|` points of `Γ \ Ω` with large ε.
pub fn select_add<R: Rng + ?Sized>(
    pattern: &SamplingPattern,
    m: usize,
    k: usize,
    rho: f64,
    eps: &[f64],
    pc: &PositionalConstraint,
    rng: &mut R,
) -> Result<Selection> {
    let grid = pattern.grid();
    check_map(eps, &grid)?;
    let count = add_count(pattern.len(), m, k);
    let cands: Vec<usize> = pattern.non_members().collect();
    if cands.len() < count {
        return Err(Error::InvalidConfig(format!(
            "only {} points left to add, {count} needed",
            cands.len()
        )));
    }
    Ok(select(&cands, count, rho, eps, pc, &grid, rng))
}

/// Picks `|Ω_r|` unlocked points of `Ω` with large r.
pub fn select_remove<R: Rng + ?Sized>(
    pattern: &SamplingPattern,
    m: usize,
    k: usize,
    rho: f64,
    rmap: &[f64],
    pc: &PositionalConstraint,
    rng: &mut R,
) -> Result<Selection> {
    let grid = pattern.grid();
    check_map(rmap, &grid)?;
    let count = remove_count(pattern.len(), m, k);
    let cands: Vec<usize> = pattern.unlocked_members().collect();
    if cands.len() < count {
        return Err(Error::LockedTooLarge {
            required: count,
            available: cands.len(),
        });
    }
    Ok(select(&cands, count, rho, rmap, pc, &grid, rng))
}

fn check_map(map: &[f64], grid: &KSpaceGrid) -> Result<()> {
    if map.len() != grid.n_points() {
        return Err(Error::LengthMismatch {
            expected: grid.n_points(),
            found: map.len(),
        });
    }
    Ok(())
}

/// Bernoulli pre-selection, ranking by importance (ties by index) and greedy
/// acceptance under the positional constraint. `rho` doubles until enough
/// points survive; at `rho = 1` the constraint is dropped if still short.
fn select<R: Rng + ?Sized>(
    cands: &[usize],
    count: usize,
    rho: f64,
    mi: &[f64],
    pc: &PositionalConstraint,
    grid: &KSpaceGrid,
    rng: &mut R,
) -> Selection {
    let mut rho = rho.clamp(f64::MIN_POSITIVE, 1.0);
    if count == 0 {
        return Selection {
            points: Vec::new(),
            rho,
            relaxed: false,
        };
    }
    loop {
        let mut pre: Vec<usize> = if rho >= 1.0 {
            cands.to_vec()
        } else {
            cands
                .iter()
                .copied()
                .filter(|_| rng.random::<f64>() < rho)
                .collect()
        };
        if pre.len() >= count {
            pre.sort_by(|&a, &b| mi[b].total_cmp(&mi[a]).then(a.cmp(&b)));
            let mut blocker = Blocker::new(grid, *pc);
            let mut chosen = Vec::with_capacity(count);
            for &p in &pre {
                if !blocker.is_blocked(p) {
                    chosen.push(p);
                    if chosen.len() == count {
                        return Selection {
                            points: chosen,
                            rho,
                            relaxed: false,
                        };
                    }
                    blocker.accept(p);
                }
            }
            if rho >= 1.0 {
                let mut taken = vec![false; grid.n_points()];
                chosen.iter().for_each(|&p| taken[p] = true);
                for &p in &pre {
                    if !taken[p] {
                        chosen.push(p);
                        if chosen.len() == count {
                            break;
                        }
                    }
                }
                return Selection {
                    points: chosen,
                    rho,
                    relaxed: true,
                };
            }
        }
        rho = (2.0 * rho).min(1.0);
    }
}
