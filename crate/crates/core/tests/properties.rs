use num_bigint::BigUint;
use num_integer::Integer;
use proptest::prelude::*;
use staggerlab::arith::crt_solve_u64;
use staggerlab::coprime::coprime_lb_witness;
use staggerlab::hardness::{small_remainders, sparse_family, UniqueDivisorSystem};
use staggerlab::io::{instance_to_json, parse_instance, parse_shifts, shifts_to_json};
use staggerlab::nested::well_separated;
use staggerlab::ratio::{frac, int};
use staggerlab::{
    average_space_bound, cycle_length, peak_events, peak_ip, peak_scan, total_level, Instance, Mode, ShiftVector,
    SolverConfig,
};

fn discrete_case(max_items: usize, max_t: u64, max_h: u64) -> impl Strategy<Value = (Instance, ShiftVector)> {
    prop::collection::vec((1..=max_t, 1..=max_h, 0..max_t), 1..=max_items).prop_map(|raw| {
        let items: Vec<(u64, u64)> = raw.iter().map(|&(t, h, _)| (t, h)).collect();
        let instance = Instance::discrete(&items).unwrap();
        let shifts: Vec<u64> = raw.iter().map(|&(t, _, s)| s % t).collect();
        let shifts = ShiftVector::from_integers(&instance, &shifts).unwrap();
        (instance, shifts)
    })
}

/// Peak by direct summation over one cycle, in units of `1/Λ`.
fn oracle_peak(instance: &Instance, shifts: &[u64]) -> (u64, u64) {
    let lambda = instance.intervals().iter().fold(1u64, |a, &t| a.lcm(&t));
    let best = (0..lambda)
        .map(|t| {
            instance
                .items()
                .iter()
                .zip(shifts)
                .map(|(it, &s)| {
                    let elapsed = (t + it.interval - s) % it.interval;
                    it.quantity * (lambda / it.interval) * (it.interval - elapsed)
                })
                .sum::<u64>()
        })
        .max()
        .unwrap();
    (best, lambda)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn engines_agree_with_direct_summation((instance, shifts) in discrete_case(4, 8, 6)) {
        let cfg = SolverConfig::default();
        let scan = peak_scan(&instance, &shifts, &cfg).unwrap();
        let events = peak_events(&instance, &shifts, &cfg).unwrap();
        let ip = peak_ip(&instance, &shifts, &cfg).unwrap();
        let (num, den) = oracle_peak(&instance, &shifts.integers().unwrap());
        prop_assert_eq!(&scan.value, &frac(num, den));
        prop_assert_eq!(&events.value, &scan.value);
        prop_assert_eq!(&ip.value, &scan.value);
        for r in [&scan, &events, &ip] {
            prop_assert_eq!(total_level(&instance, &shifts, &r.argmax_time).unwrap(), r.value.clone());
        }
    }

    #[test]
    fn levels_are_periodic_and_bounded((instance, shifts) in discrete_case(5, 9, 9), t in 0u64..500) {
        let lambda = cycle_length(&instance).to_u64().unwrap();
        let here = total_level(&instance, &shifts, &int(t)).unwrap();
        let later = total_level(&instance, &shifts, &int(t + lambda)).unwrap();
        prop_assert_eq!(&here, &later);
        prop_assert!(here > int(0));
        prop_assert!(here <= int(instance.total_quantity()));
    }

    #[test]
    fn common_translation_keeps_the_peak((instance, shifts) in discrete_case(4, 8, 6), c in 0u64..50) {
        let cfg = SolverConfig::default();
        let moved: Vec<u64> = shifts.integers().unwrap().iter().map(|s| s + c).collect();
        let moved = ShiftVector::from_integers(&instance, &moved).unwrap();
        prop_assert_eq!(
            peak_scan(&instance, &shifts, &cfg).unwrap().value,
            peak_scan(&instance, &moved, &cfg).unwrap().value
        );
    }

    #[test]
    fn every_peak_reaches_the_average_space_bound((instance, shifts) in discrete_case(5, 10, 9)) {
        let cfg = SolverConfig::default();
        prop_assert!(peak_scan(&instance, &shifts, &cfg).unwrap().value >= average_space_bound(&instance));
        let c = instance.with_mode(Mode::Continuous);
        prop_assert!(peak_events(&c, &shifts, &cfg).unwrap().value >= average_space_bound(&c));
    }

    #[test]
    fn crt_meets_every_congruence(residues in prop::collection::vec(0u64..1000, 1..5)) {
        let moduli = [7u64, 9, 10, 11, 13];
        let system: Vec<(u64, u64)> = residues.iter().zip(moduli).map(|(&r, m)| (r % m, m)).collect();
        let x = crt_solve_u64(&system).unwrap();
        let product: u64 = system.iter().map(|&(_, m)| m).product();
        prop_assert!(x < BigUint::from(product));
        for (r, m) in system {
            prop_assert_eq!(&x % m, BigUint::from(r));
        }
    }

    #[test]
    fn nested_partitions_are_well_separated(
        exps in prop::collection::vec((0u32..=9, 1u64..=20), 1..=8),
        k in 2u64..=4,
    ) {
        let items: Vec<(u64, u64)> = exps.iter().map(|&(e, h)| (2u64.pow(e), h)).collect();
        let instance = Instance::discrete(&items).unwrap();
        let eps = frac(1, k);
        let p = well_separated(&instance, &eps).unwrap();
        prop_assert!(p.width_holds(&instance));
        prop_assert!(p.separation_holds(&instance));
        prop_assert!(p.negligibility_holds(&instance));
        prop_assert!(p.shortness_holds(&instance));
        let mut all: Vec<usize> = p.blocks().iter().flatten().chain(p.residual()).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..instance.len()).collect::<Vec<_>>());
    }

    #[test]
    fn sparse_families_keep_small_intersections(qi in 0usize..4, r in 2u32..=4, count in 1usize..=60) {
        let q = [2u64, 3, 5, 7][qi];
        prop_assume!(r as u64 <= q);
        let count = count.min(q.pow(r) as usize);
        let family = sparse_family(q, r, count).unwrap();
        let sets = family.subsets();
        for a in 0..sets.len() {
            prop_assert_eq!(sets[a].len(), q as usize);
            for b in a + 1..sets.len() {
                let shared = sets[a].iter().filter(|x| sets[b].contains(x)).count();
                prop_assert!(shared < r as usize);
            }
        }
    }

    #[test]
    fn remainders_land_in_every_window(
        raw in prop::collection::vec((1u32..=3, 0u64..4, any::<u64>()), 1..=4)
    ) {
        let primes = [2u64, 3, 5, 7];
        let cofactors = [1u64, 11, 13, 143];
        let entries: Vec<(u64, u64, u64)> = raw
            .iter()
            .enumerate()
            .map(|(l, &(a, c, s))| {
                let n = primes[l].pow(a) * cofactors[c as usize];
                (primes[l], n, s % n)
            })
            .collect();
        let system = UniqueDivisorSystem::new(
            entries.iter().map(|e| e.0).collect(),
            entries.iter().map(|e| BigUint::from(e.1)).collect(),
            entries.iter().map(|e| BigUint::from(e.2)).collect(),
        )
        .unwrap();
        let t = small_remainders(&system).unwrap();
        for (p, n, tau) in entries {
            let mut window = n;
            while window % p == 0 {
                window /= p;
            }
            let r: u64 = (&t % n).try_into().unwrap();
            prop_assert!((r + n - tau) % n < window);
        }
    }

    #[test]
    fn coprime_witness_is_nearly_full(
        raw in prop::collection::vec((0usize..6, 1u64..=5, 0u64..400, 1u64..=7), 1..=4)
    ) {
        let pool = [2u64, 3, 5, 7, 11, 13];
        let mut seen = Vec::new();
        let mut items = Vec::new();
        let mut shifts = Vec::new();
        for (i, h, num, den) in raw {
            if seen.contains(&pool[i]) {
                continue;
            }
            seen.push(pool[i]);
            items.push((pool[i], h));
            shifts.push(frac(num, den * 10));
        }
        let instance = Instance::continuous(&items).unwrap();
        let shifts = ShiftVector::new(&instance, shifts).unwrap();
        let w = coprime_lb_witness(&instance, &shifts).unwrap();
        let t_min = instance.min_interval();
        let bound = (int(1) - frac(1, t_min)) * int(instance.total_quantity());
        prop_assert!(w.level >= bound);
        prop_assert_eq!(total_level(&instance, &shifts, &staggerlab::ratio::from_biguint(&w.t)).unwrap(), w.level);
    }

    #[test]
    fn files_round_trip((instance, shifts) in discrete_case(6, 50, 50)) {
        let back = parse_instance(&instance_to_json(&instance)).unwrap();
        prop_assert_eq!(&back, &instance);
        prop_assert_eq!(parse_shifts(&back, &shifts_to_json(&shifts)).unwrap(), shifts);
    }
}
