//! Exact (k+1)-nearest-neighbor search.
//!
//! Two implementations answer the same question: [`KdIndex`], a kd-tree with
//! bounding-box pruning that works for every `L_p` metric, and
//! [`brute_force_query`], a full scan kept as the reference oracle. Both order
//! candidates by `(distance, training index)`, so ties at the k-th distance
//! are always resolved in favor of the lowest training index and the two
//! implementations return bit-identical results.

mod brute;
mod kdtree;

use std::cmp::Ordering;

pub use brute::{brute_force_nearest, brute_force_query};
pub use kdtree::KdIndex;

use crate::error::{Error, Result};

/// One training point found by a search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

impl Neighbor {
    /// Search order: distance first, then lowest training index.
    #[inline]
    pub fn cmp_key(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.index.cmp(&other.index))
    }
}

/// The `k` nearest training points of a query plus the distance `R_{k+1}` to
/// the next one.
///
/// Distances are ascending. `r_kplus1 == 0` only happens when at least
/// `k + 1` training points coincide with the query; in that case every
/// distance is zero as well.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborQueryResult {
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
    pub r_kplus1: f64,
}

impl NeighborQueryResult {
    /// Splits `k + 1` sorted neighbors into the first `k` and `R_{k+1}`.
    pub fn from_sorted(mut neighbors: Vec<Neighbor>) -> Self {
        let last = neighbors.pop().expect("at least k + 1 neighbors");
        Self {
            indices: neighbors.iter().map(|n| n.index).collect(),
            distances: neighbors.iter().map(|n| n.distance).collect(),
            r_kplus1: last.distance,
        }
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    /// True when the (k+1)-th neighbor coincides with the query.
    pub fn is_degenerate(&self) -> bool {
        self.r_kplus1 == 0.0
    }
}

pub(crate) fn check_query(n: usize, d: usize, x: &[f64], k: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.len(),
        });
    }
    if k == 0 {
        return Err(Error::ZeroK);
    }
    if k >= n {
        return Err(Error::KTooLarge { k, n });
    }
    Ok(())
}
