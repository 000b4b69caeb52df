//! Problem model: items, instances, shift vectors and exact inventory levels.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratio;

/// Exact inventory level, in units.
pub type Level = BigRational;

/// One stationary replenishment policy: `quantity` units every `interval` time units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Item {
    #[serde(rename = "T")]
    pub interval: u64,
    #[serde(rename = "H")]
    pub quantity: u64,
}

impl Item {
    pub fn new(interval: u64, quantity: u64) -> Self {
        Item { interval, quantity }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Discrete,
    Continuous,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Discrete => f.write_str("discrete"),
            Mode::Continuous => f.write_str("continuous"),
        }
    }
}

/// A validated, nonempty collection of items together with its solution mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    items: Vec<Item>,
    mode: Mode,
}

impl Instance {
    pub fn new(items: Vec<Item>, mode: Mode) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::input("instance has no items"));
        }
        for (i, item) in items.iter().enumerate() {
            if item.interval == 0 {
                return Err(Error::input(format!("item {i} has interval 0")));
            }
            if item.quantity == 0 {
                return Err(Error::input(format!("item {i} has quantity 0")));
            }
        }
        Ok(Instance { items, mode })
    }

    pub fn discrete(items: &[(u64, u64)]) -> Result<Self> {
        Self::new(items.iter().map(|&(t, h)| Item::new(t, h)).collect(), Mode::Discrete)
    }

    pub fn continuous(items: &[(u64, u64)]) -> Result<Self> {
        Self::new(items.iter().map(|&(t, h)| Item::new(t, h)).collect(), Mode::Continuous)
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn item(&self, i: usize) -> Item {
        self.items[i]
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn with_mode(&self, mode: Mode) -> Instance {
        Instance {
            items: self.items.clone(),
            mode,
        }
    }

    /// `H_Σ`.
    pub fn total_quantity(&self) -> u128 {
        self.items.iter().map(|it| it.quantity as u128).sum()
    }

    /// `H_max`.
    pub fn max_quantity(&self) -> u64 {
        self.items.iter().map(|it| it.quantity).max().unwrap_or(0)
    }

    pub fn min_interval(&self) -> u64 {
        self.items.iter().map(|it| it.interval).min().unwrap_or(0)
    }

    pub fn max_interval(&self) -> u64 {
        self.items.iter().map(|it| it.interval).max().unwrap_or(0)
    }

    pub fn intervals(&self) -> Vec<u64> {
        self.items.iter().map(|it| it.interval).collect()
    }

    pub fn quantities(&self) -> Vec<u64> {
        self.items.iter().map(|it| it.quantity).collect()
    }

    /// Total quantity of the given item ids.
    pub fn quantity_of(&self, ids: &[usize]) -> u128 {
        ids.iter().map(|&i| self.items[i].quantity as u128).sum()
    }

    /// The sub-instance on `ids`, in the given order.
    pub fn restrict(&self, ids: &[usize]) -> Result<Instance> {
        Instance::new(ids.iter().map(|&i| self.items[i]).collect(), self.mode)
    }
}

/// `Λ`, the cycle length of every joint policy.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BigCycle(BigUint);

impl BigCycle {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }
}

impl fmt::Display for BigCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `Λ = LCM(T_1, ..., T_n)`.
pub fn cycle_length(instance: &Instance) -> BigCycle {
    BigCycle(crate::arith::lcm_all(instance.items().iter().map(|it| it.interval)))
}

/// One shift per item, normalized into `[0, T_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShiftVector(Vec<BigRational>);

impl ShiftVector {
    /// Validates against `instance` and folds every entry modulo its interval.
    pub fn new(instance: &Instance, shifts: Vec<BigRational>) -> Result<Self> {
        if shifts.len() != instance.len() {
            return Err(Error::input(format!(
                "shift vector has {} entries but the instance has {} items",
                shifts.len(),
                instance.len()
            )));
        }
        let mut out = Vec::with_capacity(shifts.len());
        for (i, (tau, item)) in shifts.into_iter().zip(instance.items()).enumerate() {
            if instance.mode() == Mode::Discrete && !tau.is_integer() {
                return Err(Error::input(format!(
                    "shift {} of item {i} is not an integer in discrete mode",
                    ratio::format(&tau)
                )));
            }
            out.push(ratio::rem_euclid(&tau, item.interval));
        }
        Ok(ShiftVector(out))
    }

    pub fn from_integers(instance: &Instance, shifts: &[u64]) -> Result<Self> {
        Self::new(instance, shifts.iter().map(|&s| ratio::int(s)).collect())
    }

    pub fn zeros(instance: &Instance) -> Self {
        ShiftVector(vec![BigRational::zero(); instance.len()])
    }

    pub fn as_slice(&self) -> &[BigRational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The shifts as machine integers, when every entry is integral.
    pub fn integers(&self) -> Option<Vec<u64>> {
        self.0
            .iter()
            .map(|s| if s.is_integer() { s.to_integer().to_u64() } else { None })
            .collect()
    }

    /// Lowest common denominator of the entries.
    pub fn common_denominator(&self) -> BigInt {
        self.0
            .iter()
            .fold(BigInt::one(), |acc, s| acc.lcm(s.denom()))
    }
}

/// `I_i(τ_i, t)`: the level of one item at time `t`.
///
/// Orders sit at `τ + kT` for every integer `k`, so negative times are valid.
pub fn item_level(item: &Item, shift: &BigRational, t: &BigRational) -> Level {
    let period = ratio::int(item.interval);
    let elapsed = t - shift;
    let k = ratio::floor(&(&elapsed / &period));
    let since_order = elapsed - &period * BigRational::from_integer(k);
    ratio::int(item.quantity) * (&period - since_order) / period
}

/// `I_Σ(τ, t)`.
pub fn total_level(instance: &Instance, shifts: &ShiftVector, t: &BigRational) -> Result<Level> {
    if shifts.len() != instance.len() {
        return Err(Error::input(format!(
            "shift vector has {} entries but the instance has {} items",
            shifts.len(),
            instance.len()
        )));
    }
    Ok(instance
        .items()
        .iter()
        .zip(shifts.as_slice())
        .map(|(item, tau)| item_level(item, tau, t))
        .fold(BigRational::zero(), |acc, v| acc + v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{frac, int};

    #[test]
    fn cycle_length_examples() {
        let lam = |ts: &[u64]| {
            let items: Vec<_> = ts.iter().map(|&t| (t, 1)).collect();
            cycle_length(&Instance::discrete(&items).unwrap()).to_u64().unwrap()
        };
        assert_eq!(lam(&[4, 6]), 12);
        assert_eq!(lam(&[2, 3, 5]), 30);
        assert_eq!(lam(&[7]), 7);
    }

    #[test]
    fn item_level_examples() {
        let item = Item::new(4, 8);
        assert_eq!(item_level(&item, &int(0), &int(0)), int(8));
        assert_eq!(item_level(&item, &int(0), &int(1)), int(6));
        // last order before t=0 is at -2
        assert_eq!(item_level(&Item::new(5, 10), &int(3), &int(0)), int(6));
    }

    #[test]
    fn item_level_drains_between_epochs() {
        let item = Item::new(5, 10);
        let tau = frac(1, 2);
        let mut prev = item_level(&item, &tau, &tau);
        assert_eq!(prev, int(10));
        for k in 1..20 {
            let t = &tau + frac(k, 4);
            let v = item_level(&item, &tau, &t);
            assert!(v < prev);
            prev = v;
        }
        assert_eq!(item_level(&item, &tau, &(&tau + int(5))), int(10));
    }

    #[test]
    fn total_level_examples() {
        let inst = Instance::discrete(&[(2, 2), (2, 2)]).unwrap();
        let tau = ShiftVector::from_integers(&inst, &[0, 1]).unwrap();
        assert_eq!(total_level(&inst, &tau, &int(0)).unwrap(), int(3));
        let zero = ShiftVector::from_integers(&inst, &[0, 0]).unwrap();
        assert_eq!(total_level(&inst, &zero, &int(0)).unwrap(), int(4));
        let single = Instance::discrete(&[(7, 3)]).unwrap();
        let s = ShiftVector::from_integers(&single, &[5]).unwrap();
        assert_eq!(total_level(&single, &s, &int(5)).unwrap(), int(3));
    }

    #[test]
    fn total_level_rejects_length_mismatch() {
        let inst = Instance::discrete(&[(2, 2), (2, 2)]).unwrap();
        let other = Instance::discrete(&[(2, 2)]).unwrap();
        let tau = ShiftVector::zeros(&other);
        assert!(matches!(total_level(&inst, &tau, &int(0)), Err(Error::Input(_))));
    }

    #[test]
    fn shifts_fold_interval_to_zero() {
        let inst = Instance::discrete(&[(4, 1), (3, 1)]).unwrap();
        let tau = ShiftVector::from_integers(&inst, &[4, 7]).unwrap();
        assert_eq!(tau.integers().unwrap(), vec![0, 1]);
    }

    #[test]
    fn discrete_mode_rejects_fractional_shift() {
        let inst = Instance::discrete(&[(4, 1)]).unwrap();
        assert!(ShiftVector::new(&inst, vec![frac(1, 2)]).is_err());
        let cont = inst.with_mode(Mode::Continuous);
        assert!(ShiftVector::new(&cont, vec![frac(1, 2)]).is_ok());
    }

    #[test]
    fn instance_validation() {
        assert!(Instance::discrete(&[]).is_err());
        assert!(Instance::discrete(&[(0, 1)]).is_err());
        assert!(Instance::discrete(&[(1, 0)]).is_err());
        let inst = Instance::discrete(&[(2, 3), (5, 7)]).unwrap();
        assert_eq!(inst.total_quantity(), 10);
        assert_eq!(inst.max_quantity(), 7);
        assert_eq!((inst.min_interval(), inst.max_interval()), (2, 5));
    }
}
