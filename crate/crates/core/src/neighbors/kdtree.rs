use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::dataset::Dataset;
use crate::error::Result;
use crate::metric::Metric;

use super::{check_query, Neighbor, NeighborQueryResult};

const LEAF_SIZE: usize = 16;

// Pruning compares a box lower bound against the current worst candidate.
// The slack absorbs rounding differences between the two distance evaluations
// (only non-integer p uses powf, which is not guaranteed monotone).
const PRUNE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Node {
    start: usize,
    end: usize,
    // Child node ids; `None` for leaves.
    children: Option<(usize, usize)>,
}

/// Immutable kd-tree over the points of a [`Dataset`].
///
/// Every node keeps its axis-aligned bounding box. The distance from a query
/// to the box, evaluated with the index metric on the clamped query, is a
/// valid lower bound for any `L_p`, so the same pruning serves every metric.
#[derive(Debug, Clone)]
pub struct KdIndex {
    d: usize,
    metric: Metric,
    // Coordinates in tree order.
    data: Vec<f64>,
    // Original training index of each tree slot.
    ids: Vec<usize>,
    nodes: Vec<Node>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(PartialEq)]
struct Worst(Neighbor);

impl Eq for Worst {}

impl PartialOrd for Worst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Worst {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp_key(&other.0)
    }
}

impl KdIndex {
    pub fn build(dataset: &Dataset, metric: Metric) -> Self {
        let d = dataset.d();
        let n = dataset.n();
        let mut ids: Vec<usize> = (0..n).collect();
        let mut index = KdIndex {
            d,
            metric,
            data: Vec::new(),
            ids: Vec::new(),
            nodes: Vec::new(),
            lo: Vec::new(),
            hi: Vec::new(),
        };
        index.build_node(dataset, &mut ids, 0, n);
        index.data = Vec::with_capacity(n * d);
        for &i in &ids {
            index.data.extend_from_slice(dataset.point(i));
        }
        index.ids = ids;
        index
    }

    fn build_node(&mut self, dataset: &Dataset, ids: &mut [usize], start: usize, end: usize) -> usize {
        let d = self.d;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &i in &ids[start..end] {
            for (j, &v) in dataset.point(i).iter().enumerate() {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            start,
            end,
            children: None,
        });
        self.lo.extend_from_slice(&lo);
        self.hi.extend_from_slice(&hi);

        if end - start <= LEAF_SIZE {
            return id;
        }
        let (axis, spread) = (0..d)
            .map(|j| (j, hi[j] - lo[j]))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("d >= 1");
        if spread == 0.0 {
            // All points identical.
            return id;
        }
        let mid = start + (end - start) / 2;
        ids[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            dataset.point(a)[axis].total_cmp(&dataset.point(b)[axis])
        });
        let left = self.build_node(dataset, ids, start, mid);
        let right = self.build_node(dataset, ids, mid, end);
        self.nodes[id].children = Some((left, right));
        id
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    fn box_distance(&self, node: usize, x: &[f64], metric: Metric, scratch: &mut [f64]) -> f64 {
        let lo = &self.lo[node * self.d..(node + 1) * self.d];
        let hi = &self.hi[node * self.d..(node + 1) * self.d];
        for j in 0..self.d {
            scratch[j] = x[j].clamp(lo[j], hi[j]);
        }
        metric.distance(x, scratch)
    }

    /// The `m` nearest points of `x`, sorted by `(distance, index)`.
    ///
    /// `m` larger than `n` is clamped. No dimension check is done here; use
    /// [`query`](Self::query) for validated access.
    pub fn nearest(&self, x: &[f64], m: usize) -> Vec<Neighbor> {
        let m = m.min(self.n());
        if m == 0 {
            return Vec::new();
        }
        let mut heap: BinaryHeap<Worst> = BinaryHeap::with_capacity(m + 1);
        let mut scratch = vec![0.0; self.d];
        let mut stack: Vec<(usize, f64)> = vec![(0, 0.0)];
        while let Some((node, bound)) = stack.pop() {
            if heap.len() == m {
                let worst = heap.peek().expect("non-empty").0.distance;
                if bound > worst + worst * PRUNE_SLACK {
                    continue;
                }
            }
            let Node {
                start,
                end,
                children,
            } = self.nodes[node];
            match children {
                None => {
                    for slot in start..end {
                        let cand = Neighbor {
                            index: self.ids[slot],
                            distance: self
                                .metric
                                .distance(x, &self.data[slot * self.d..(slot + 1) * self.d]),
                        };
                        if heap.len() < m {
                            heap.push(Worst(cand));
                        } else if cand.cmp_key(&heap.peek().expect("non-empty").0) == Ordering::Less {
                            heap.pop();
                            heap.push(Worst(cand));
                        }
                    }
                }
                Some((left, right)) => {
                    let bl = self.box_distance(left, x, self.metric, &mut scratch);
                    let br = self.box_distance(right, x, self.metric, &mut scratch);
                    // Visit the nearer child first.
                    if bl <= br {
                        stack.push((right, br));
                        stack.push((left, bl));
                    } else {
                        stack.push((left, bl));
                        stack.push((right, br));
                    }
                }
            }
        }
        let mut out: Vec<Neighbor> = heap.into_iter().map(|w| w.0).collect();
        out.sort_unstable_by(Neighbor::cmp_key);
        out
    }

    /// Exact `k` nearest neighbors of `x` and the distance `R_{k+1}`.
    pub fn query(&self, x: &[f64], k: usize) -> Result<NeighborQueryResult> {
        check_query(self.n(), self.d, x, k)?;
        Ok(NeighborQueryResult::from_sorted(self.nearest(x, k + 1)))
    }

    /// Indices of all points within `radius` of `x` under `metric`, ascending.
    pub fn within_radius(&self, x: &[f64], radius: f64, metric: Metric) -> Vec<usize> {
        let mut out = Vec::new();
        let mut scratch = vec![0.0; self.d];
        let mut stack = vec![0usize];
        while let Some(node) = stack.pop() {
            if self.box_distance(node, x, metric, &mut scratch) > radius {
                continue;
            }
            let Node {
                start,
                end,
                children,
            } = self.nodes[node];
            match children {
                None => {
                    for slot in start..end {
                        let p = &self.data[slot * self.d..(slot + 1) * self.d];
                        if metric.distance(x, p) <= radius {
                            out.push(self.ids[slot]);
                        }
                    }
                }
                Some((l, r)) => {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Task;
    use crate::neighbors::brute_force_nearest;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn duplicate_points_do_not_recurse_forever() {
        let ds = Dataset::new(vec![1.0; 100], 1, vec![0.0; 100], Task::Regression).unwrap();
        let index = KdIndex::build(&ds, Metric::euclidean());
        let res = index.query(&[1.0], 5).unwrap();
        assert_eq!(res.indices, vec![0, 1, 2, 3, 4]);
        assert!(res.is_degenerate());
    }

    #[test]
    fn within_radius_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<f64> = (0..600).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ds = Dataset::new(pts, 3, vec![0.0; 200], Task::Regression).unwrap();
        let index = KdIndex::build(&ds, Metric::manhattan());
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let r = rng.random_range(0.0..0.6);
            let expect: Vec<usize> = (0..ds.n())
                .filter(|&i| Metric::euclidean().distance(&x, ds.point(i)) <= r)
                .collect();
            assert_eq!(index.within_radius(&x, r, Metric::euclidean()), expect);
        }
    }

    #[test]
    fn nearest_with_m_beyond_n() {
        let ds = Dataset::new(vec![0.0, 1.0, 2.0], 1, vec![0.0; 3], Task::Regression).unwrap();
        let index = KdIndex::build(&ds, Metric::euclidean());
        assert_eq!(
            index.nearest(&[1.2], 10),
            brute_force_nearest(&ds, Metric::euclidean(), &[1.2], 10)
        );
    }
}
