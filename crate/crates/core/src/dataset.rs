use crate::error::{Error, Result};
use crate::grid::KSpaceGrid;
use crate::volume::MultiCoilKSpace;

/// Fully sampled data items sharing one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    grid: KSpaceGrid,
    items: Vec<MultiCoilKSpace>,
}

impl Dataset {
    pub fn new(items: Vec<MultiCoilKSpace>) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::InvalidConfig("dataset needs at least one item".into()))?;
        let grid = first.grid();
        if let Some(bad) = items.iter().find(|m| m.grid() != grid) {
            return Err(Error::GridMismatch {
                expected: grid,
                found: bad.grid(),
            });
        }
        Ok(Self { grid, items })
    }

    #[inline]
    pub fn grid(&self) -> KSpaceGrid {
        self.grid
    }

    #[inline]
    pub fn items(&self) -> &[MultiCoilKSpace] {
        &self.items
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.items.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn into_items(self) -> Vec<MultiCoilKSpace> {
        self.items
    }

    /// Items `range` as a new dataset.
    pub fn subset(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.end > self.items.len() || range.start >= range.end {
            return Err(Error::InvalidConfig(format!(
                "item range {}..{} invalid for {} items",
                range.start,
                range.end,
                self.items.len()
            )));
        }
        Self::new(self.items[range].to_vec())
    }

    /// Splits by item index: the first `n_train` items train, the rest
    /// validate. Both parts must be non-empty.
    pub fn split(&self, n_train: usize) -> Result<(Self, Self)> {
        if n_train == 0 || n_train >= self.items.len() {
            return Err(Error::InvalidConfig(format!(
                "cannot split {} items into {} training and {} validation",
                self.items.len(),
                n_train,
                self.items.len().saturating_sub(n_train)
            )));
        }
        Ok((
            self.subset(0..n_train)?,
            self.subset(n_train..self.items.len())?,
        ))
    }
}
