use num_traits::ToPrimitive;
use staggerlab::hardness::{gen_groupsync, gen_sample_complexity, sample_points, sparse_family};
use staggerlab::{RngStream, SolverConfig};

/// Per-item levels of distinct prime-interval items at uniform times are uncorrelated.
#[test]
fn sampled_item_levels_are_uncorrelated() {
    let cfg = SolverConfig { jobs: 4, ..SolverConfig::default() };
    let instance = gen_sample_complexity(500, &cfg).unwrap();
    let points = sample_points(&instance, 10_000, &RngStream::new(17), &cfg);
    let level = |i: usize, x: &num_bigint::BigUint| {
        let t = instance.item(i).interval;
        let r = (x % t).to_u64().unwrap();
        (t - r) as f64 / t as f64
    };
    for (a, b) in [(0, 1), (0, 499), (17, 250), (123, 124), (300, 301)] {
        let xs: Vec<f64> = points.iter().map(|x| level(a, x)).collect();
        let ys: Vec<f64> = points.iter().map(|x| level(b, x)).collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / n;
        let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / n;
        let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / n;
        let rho = cov / (vx * vy).sqrt();
        assert!(rho.abs() <= 0.1, "items {a},{b}: rho = {rho}");
    }
}

#[test]
fn full_families_are_three_sparse() {
    for q in [3u64, 5] {
        let f = sparse_family(q, 3, q.pow(3) as usize).unwrap();
        assert_eq!(f.max_pairwise_intersection(usize::MAX), 2);
    }
}

#[test]
fn groupsync_intervals_are_pairwise_distinct_products() {
    let g = gen_groupsync(11, Some(60), &SolverConfig::default()).unwrap();
    let mut intervals: Vec<_> = (0..g.len()).map(|i| g.interval(i)).collect();
    assert!(intervals.iter().all(|t| t.bits() > 64));
    intervals.sort();
    intervals.dedup();
    assert_eq!(intervals.len(), 60);
}
