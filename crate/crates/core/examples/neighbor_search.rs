//! Exact k-nearest-neighbor search under L1, L2 and max norms.

use interpnn::neighbors::brute_force_query;
use interpnn::{Dataset, KdIndex, Metric, Task};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> interpnn::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (n, d) = (2000, 3);
    let points: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>()).collect();
    let data = Dataset::new(points, d, vec![0.0; n], Task::Regression)?;
    let query = [0.5, 0.5, 0.5];

    for p in [1.0, 2.0, f64::INFINITY] {
        let metric = Metric::new(p)?;
        let index = KdIndex::build(&data, metric);
        let hit = index.query(&query, 5)?;
        assert_eq!(hit, brute_force_query(&data, metric, &query, 5)?);
        println!("p = {p}: indices {:?}", hit.indices);
        println!("        distances {:.4?}, R_(k+1) = {:.4}", hit.distances, hit.r_kplus1);
    }
    Ok(())
}
