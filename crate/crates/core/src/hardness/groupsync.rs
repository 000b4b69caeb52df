//! An instance on which optima of small subsets glue badly: one item per
//! subset of a sparse family, with interval the product of the subset's primes.

use num_bigint::{BigUint, RandBigInt};
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::remainders::{small_remainders, UniqueDivisorSystem};
use super::sparse::{sparse_family, SparseFamily};
use crate::arith::primes_in_range;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::model::Level;
use crate::ratio;
use crate::rng::RngStream;

/// Items are stored factored: item `i` has interval `Π_{k ∈ S_i} p_k` and quantity 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSync {
    q: u64,
    primes: Vec<u64>,
    family: SparseFamily,
    required: u64,
    overridden: bool,
}

impl GroupSync {
    pub fn q(&self) -> u64 {
        self.q
    }

    /// `K = q²`.
    pub fn ground(&self) -> usize {
        (self.q * self.q) as usize
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn family(&self) -> &SparseFamily {
        &self.family
    }

    pub fn len(&self) -> usize {
        self.family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }

    /// Prime indices of item `i`.
    pub fn factors(&self, i: usize) -> &[usize] {
        &self.family.subsets()[i]
    }

    pub fn interval(&self, i: usize) -> BigUint {
        self.factors(i).iter().map(|&k| BigUint::from(self.primes[k])).product()
    }

    /// `⌈12 K ln² K⌉`, the family size the construction calls for.
    pub fn required_size(&self) -> u64 {
        self.required
    }

    /// Whether the family size was overridden below the required size.
    pub fn overridden(&self) -> bool {
        self.overridden
    }

    /// Smallest `ε` with `q >= e^{1/(2ε²)}`.
    pub fn implied_eps(&self) -> f64 {
        (1.0 / (2.0 * (self.q as f64).ln())).sqrt()
    }

    /// Construction preconditions that this instance does not meet.
    pub fn unmet_preconditions(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.overridden {
            out.push(format!(
                "family has {} subsets, below the required {}",
                self.len(),
                self.required
            ));
        }
        let eps = self.implied_eps();
        if eps >= 0.5 {
            out.push(format!("q = {} only supports error parameters above {eps:.3}", self.q));
        }
        out
    }

    /// Level of item `i` at time `t` under shift `tau`.
    pub fn level(&self, i: usize, tau: &BigUint, t: &BigUint) -> Level {
        let period = self.interval(i);
        let elapsed = (t % &period + &period - tau % &period) % &period;
        BigRational::new((&period - elapsed).into(), period.into())
    }
}

fn required_size(k: u64) -> u64 {
    let ln = (k as f64).ln();
    (12.0 * k as f64 * ln * ln).ceil() as u64
}

/// Builds the instance for prime `q`: `K = q²` primes from `[K, 2K ln K]` and a
/// 3-sparse family of `q`-subsets of `[K]`.
///
/// Without `count` the family must reach `⌈12 K ln² K⌉ <= q³` subsets, which
/// fails for every small `q`; `count` overrides the size.
pub fn gen_groupsync(q: u64, count: Option<usize>, config: &SolverConfig) -> Result<GroupSync> {
    let k = q.checked_mul(q).ok_or_else(|| Error::input("q² overflows"))?;
    if k < 4 {
        return Err(Error::input("q must be at least 2"));
    }
    let required = required_size(k);
    let cube = (q as u128).pow(3);
    let size = match count {
        Some(c) => c,
        None if (required as u128) <= cube => required as usize,
        None => {
            return Err(Error::input(format!(
                "the family needs {required} subsets but a 3-sparse family over q = {q} has at most q³ = {cube}; pass a count"
            )))
        }
    };
    let family = sparse_family(q, 3, size)?;
    let hi = (2.0 * k as f64 * (k as f64).ln()).floor() as u64;
    let found = primes_in_range(k, hi.max(k), config)?;
    if (found.len() as u64) < k {
        return Err(Error::input(format!(
            "only {} primes in [{k}, {hi}], need {k}",
            found.len()
        )));
    }
    Ok(GroupSync {
        q,
        primes: found[..k as usize].to_vec(),
        family,
        required,
        overridden: (size as u64) < required,
    })
}

/// A uniform shift below every interval; item `i` draws from substream `i`.
pub fn random_shifts(instance: &GroupSync, rng: &RngStream) -> Vec<BigUint> {
    (0..instance.len())
        .map(|i| rng.substream(i as u64).gen_biguint_below(&instance.interval(i)))
        .collect()
}

/// `size` distinct items, ascending, drawn uniformly.
pub fn random_probe(instance: &GroupSync, size: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    if size == 0 || size > instance.len() {
        return Err(Error::input(format!("probe size must lie in [1, {}]", instance.len())));
    }
    let mut items = rand::seq::index::sample(rng, instance.len(), size).into_vec();
    items.sort_unstable();
    Ok(items)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapProbe {
    pub t: BigUint,
    /// Summed level of the probed items at `t`.
    pub level: Level,
    /// The private prime chosen for every probed item.
    pub private_primes: Vec<u64>,
    /// `Σ (1 - 1/p)` over the private primes.
    pub bound: Level,
}

/// Finds a time at which every probed item is nearly full, through a prime
/// that divides its interval and no other probed interval.
///
/// At most `q/2` items may be probed; two items share at most two primes, so
/// each then keeps at least two private ones.
pub fn subset_gap_probe(instance: &GroupSync, subset: &[usize], shifts: &[BigUint]) -> Result<GapProbe> {
    if shifts.len() != instance.len() {
        return Err(Error::input("shift vector does not match the instance"));
    }
    if subset.is_empty() {
        return Err(Error::input("empty probe"));
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != subset.len() || sorted.iter().any(|&i| i >= instance.len()) {
        return Err(Error::input("probe items must be distinct and in range"));
    }
    if 2 * subset.len() as u64 > instance.q() {
        return Err(Error::input(format!(
            "a probe may hold at most q/2 = {} items",
            instance.q() / 2
        )));
    }
    let mut private_primes = Vec::with_capacity(subset.len());
    for &i in subset {
        let own = instance
            .factors(i)
            .iter()
            .find(|&&k| subset.iter().all(|&j| j == i || !instance.factors(j).contains(&k)))
            .ok_or_else(|| Error::input(format!("item {i} shares every element with the rest of the probe")))?;
        private_primes.push(instance.primes()[*own]);
    }
    let moduli: Vec<BigUint> = subset.iter().map(|&i| instance.interval(i)).collect();
    let taus: Vec<BigUint> = subset.iter().map(|&i| shifts[i].clone()).collect();
    let system = UniqueDivisorSystem::new(private_primes.clone(), moduli, taus)?;
    let t = small_remainders(&system)?;
    let level = subset
        .iter()
        .map(|&i| instance.level(i, &shifts[i], &t))
        .fold(Level::zero(), |a, b| a + b);
    let bound = private_primes
        .iter()
        .map(|&p| BigRational::one() - ratio::frac(1, p))
        .fold(Level::zero(), |a, b| a + b);
    Ok(GapProbe {
        t,
        level,
        private_primes,
        bound,
    })
}

/// `max_S 1/p_S` over the probe's private primes, as a float for reporting.
pub fn worst_private_gap(probe: &GapProbe) -> f64 {
    probe
        .private_primes
        .iter()
        .map(|&p| 1.0 / p as f64)
        .fold(0.0, f64::max)
}
