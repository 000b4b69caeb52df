use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use staggerlab::interval_ptas::{group_by_interval, interval_ptas_solve};
use staggerlab::ratio::{frac, int};
use staggerlab::{brute_optimum, Instance, SolverConfig};

/// Instances with at most three distinct intervals drawn from divisors of 60.
fn suite(seed: u64, count: usize) -> Vec<Instance> {
    let pool = [2u64, 3, 4, 5, 6, 10, 12];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k = rng.gen_range(1..=3);
            let mut intervals: Vec<u64> = Vec::new();
            while intervals.len() < k {
                let t = pool[rng.gen_range(0..pool.len())];
                if !intervals.contains(&t) {
                    intervals.push(t);
                }
            }
            let n = rng.gen_range(k..=8);
            let items: Vec<(u64, u64)> = (0..n)
                .map(|i| (intervals[if i < k { i } else { rng.gen_range(0..k) }], rng.gen_range(1..=9)))
                .collect();
            Instance::discrete(&items).unwrap()
        })
        .collect()
}

#[test]
fn within_guarantee_on_small_suite() {
    let config = SolverConfig { jobs: 4, ..SolverConfig::default() };
    for (e, seed) in [(frac(3, 10), 1u64), (frac(1, 2), 2)] {
        for instance in suite(seed, 6) {
            let opt = brute_optimum(&instance, &config).unwrap().value;
            let out = interval_ptas_solve(&instance, &e, &config).unwrap();
            assert!(out.peak.value >= opt);
            assert!(out.peak.value <= &opt * (int(1) + int(17) * &e), "{instance:?}");
            assert!(out.partition.is_valid(&group_by_interval(&instance, &e).unwrap()));
        }
    }
}
