//! Seeded random instances.

use num_integer::Integer;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Instance, Item, Mode};
use crate::rng::RngStream;

fn check_sizes(items: usize, max_quantity: u64) -> Result<()> {
    if items == 0 {
        return Err(Error::input("at least one item is required"));
    }
    if max_quantity == 0 {
        return Err(Error::input("max quantity must be positive"));
    }
    Ok(())
}

/// Intervals uniform in `[1, max_interval]`, quantities uniform in `[1, max_quantity]`.
pub fn random_instance(
    items: usize,
    max_interval: u64,
    max_quantity: u64,
    mode: Mode,
    rng: &mut RngStream,
) -> Result<Instance> {
    check_sizes(items, max_quantity)?;
    if max_interval == 0 {
        return Err(Error::input("max interval must be positive"));
    }
    let list = (0..items)
        .map(|_| Item::new(rng.gen_range(1..=max_interval), rng.gen_range(1..=max_quantity)))
        .collect();
    Instance::new(list, mode)
}

/// Intervals `base^j` with `j` uniform in `[0, levels]`, so every interval divides the next larger one.
pub fn random_nested(
    items: usize,
    base: u64,
    levels: u32,
    max_quantity: u64,
    mode: Mode,
    rng: &mut RngStream,
) -> Result<Instance> {
    check_sizes(items, max_quantity)?;
    if base < 2 {
        return Err(Error::input("nested base must be at least 2"));
    }
    base.checked_pow(levels)
        .ok_or_else(|| Error::input(format!("{base}^{levels} overflows")))?;
    let list = (0..items)
        .map(|_| Item::new(base.pow(rng.gen_range(0..=levels)), rng.gen_range(1..=max_quantity)))
        .collect();
    Instance::new(list, mode)
}

/// Distinct pairwise-coprime intervals in `[2, max_interval]`, drawn by rejection.
pub fn random_coprime(
    items: usize,
    max_interval: u64,
    max_quantity: u64,
    mode: Mode,
    rng: &mut RngStream,
) -> Result<Instance> {
    check_sizes(items, max_quantity)?;
    if max_interval < 2 {
        return Err(Error::input("max interval must be at least 2"));
    }
    let mut intervals: Vec<u64> = Vec::with_capacity(items);
    let mut attempts = 0u32;
    while intervals.len() < items {
        attempts += 1;
        if attempts > 10_000 {
            return Err(Error::input(format!(
                "could not draw {items} pairwise coprime intervals up to {max_interval}"
            )));
        }
        let t = rng.gen_range(2..=max_interval);
        if intervals.iter().all(|&u| u.gcd(&t) == 1) {
            intervals.push(t);
        }
    }
    let list = intervals
        .into_iter()
        .map(|t| Item::new(t, rng.gen_range(1..=max_quantity)))
        .collect();
    Instance::new(list, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::pairwise_coprime;
    use crate::nested::is_nested;

    #[test]
    fn shapes_and_ranges() {
        let mut rng = RngStream::new(3);
        for _ in 0..50 {
            let a = random_instance(4, 12, 10, Mode::Discrete, &mut rng).unwrap();
            assert_eq!(a.len(), 4);
            assert!(a.items().iter().all(|it| (1..=12).contains(&it.interval) && (1..=10).contains(&it.quantity)));

            let b = random_nested(6, 2, 4, 5, Mode::Discrete, &mut rng).unwrap();
            assert!(is_nested(&b));
            assert!(b.intervals().iter().all(|t| [1, 2, 4, 8, 16].contains(t)));

            let c = random_coprime(4, 30, 3, Mode::Continuous, &mut rng).unwrap();
            assert!(pairwise_coprime(&c.intervals()).is_ok());
            assert_eq!(c.mode(), Mode::Continuous);
        }
    }

    #[test]
    fn seeded_draws_repeat() {
        let a = random_instance(5, 9, 9, Mode::Discrete, &mut RngStream::new(8)).unwrap();
        let b = random_instance(5, 9, 9, Mode::Discrete, &mut RngStream::new(8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn impossible_requests() {
        let mut rng = RngStream::new(1);
        assert!(random_coprime(5, 6, 1, Mode::Continuous, &mut rng).is_err());
        assert!(random_instance(0, 5, 1, Mode::Discrete, &mut rng).is_err());
        assert!(random_nested(2, 1, 3, 1, Mode::Discrete, &mut rng).is_err());
        assert!(random_nested(2, 10, 30, 1, Mode::Discrete, &mut rng).is_err());
    }
}
