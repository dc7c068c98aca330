use crate::dataset::Dataset;
use crate::error::Result;
use crate::metric::Metric;

use super::{check_query, Neighbor, NeighborQueryResult};

/// The `m` nearest points of `x` by full scan, sorted by `(distance, index)`.
pub fn brute_force_nearest(dataset: &Dataset, metric: Metric, x: &[f64], m: usize) -> Vec<Neighbor> {
    let mut all: Vec<Neighbor> = (0..dataset.n())
        .map(|index| Neighbor {
            index,
            distance: metric.distance(x, dataset.point(index)),
        })
        .collect();
    let m = m.min(all.len());
    if m == 0 {
        return Vec::new();
    }
    if m < all.len() {
        all.select_nth_unstable_by(m - 1, Neighbor::cmp_key);
        all.truncate(m);
    }
    all.sort_unstable_by(Neighbor::cmp_key);
    all
}

/// Reference implementation of [`KdIndex::query`](super::KdIndex::query).
pub fn brute_force_query(
    dataset: &Dataset,
    metric: Metric,
    x: &[f64],
    k: usize,
) -> Result<NeighborQueryResult> {
    check_query(dataset.n(), dataset.d(), x, k)?;
    Ok(NeighborQueryResult::from_sorted(brute_force_nearest(
        dataset,
        metric,
        x,
        k + 1,
    )))
}
