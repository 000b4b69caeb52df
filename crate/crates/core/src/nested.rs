//! Scheme for nested instances (every distinct interval divides the next).
//!
//! Intervals are binned by powers of `1/ε`; one residue class of bins is set
//! aside, which splits the rest into blocks that are far apart in scale. Each
//! block is solved by the interval scheme and the solutions are glued.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::interval_ptas::interval_ptas_solve;
use crate::model::{Instance, Level, Mode, ShiftVector};
use crate::peak::{brute_optimum, peak_auto, scale_intervals, PeakResult};
use crate::ratio::{self, int};

/// `k = ⌈1/ε⌉` and the effective `ε' = 1/k <= ε`.
pub fn effective_eps(eps: &BigRational) -> Result<(u64, BigRational)> {
    ratio::check_eps(eps, false)?;
    let k = ratio::ceil(&(BigRational::one() / eps))
        .to_u64()
        .ok_or_else(|| Error::input("1/ε is too large"))?;
    Ok((k, ratio::frac(1, k)))
}

/// Sorted distinct intervals each divide the next.
pub fn is_nested(instance: &Instance) -> bool {
    let mut t = instance.intervals();
    t.sort_unstable();
    t.dedup();
    t.windows(2).all(|w| w[1] % w[0] == 0)
}

/// Every interval multiplied by `⌈1/ε⌉`, as a discrete instance.
///
/// Integer shifts `τ` of the result map to `τ/⌈1/ε⌉` on the input with the
/// same peak.
pub fn continuous_to_discrete(instance: &Instance, eps: &BigRational) -> Result<Instance> {
    ratio::check_eps(eps, true)?;
    if instance.mode() != Mode::Continuous {
        return Err(Error::input("the reduction expects a continuous instance"));
    }
    scale_intervals(instance, scale_factor(eps))
}

fn scale_factor(eps: &BigRational) -> u64 {
    ratio::ceil(&(BigRational::one() / eps)).to_u64().expect("1/ε fits a machine word")
}

/// Smallest `q >= 1` with `k^q >= t`.
fn bin_of(t: u64, k: u64) -> u32 {
    let mut q = 1;
    let mut power = k as u128;
    while power < t as u128 {
        power *= k as u128;
        q += 1;
    }
    q
}

/// Blocks of items in increasing scale, plus the set-aside residual.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WellSeparatedPartition {
    blocks: Vec<Vec<usize>>,
    residual: Vec<usize>,
    /// Bins `q ≡ ξ (mod k)` were set aside; `None` for a hand-made partition.
    xi: Option<u64>,
    bins: Vec<u32>,
    k: u64,
}

impl WellSeparatedPartition {
    /// A partition given explicitly, with bins for `ε' = 1/⌈1/ε⌉`.
    pub fn from_blocks(instance: &Instance, eps: &BigRational, blocks: Vec<Vec<usize>>, residual: Vec<usize>) -> Result<Self> {
        let (k, _) = effective_eps(eps)?;
        let mut seen: Vec<usize> = blocks.iter().flatten().chain(&residual).copied().collect();
        seen.sort_unstable();
        if seen != (0..instance.len()).collect::<Vec<_>>() {
            return Err(Error::input("blocks and residual must partition the items"));
        }
        Ok(WellSeparatedPartition {
            blocks,
            residual,
            xi: None,
            bins: instance.intervals().iter().map(|&t| bin_of(t, k)).collect(),
            k,
        })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn residual(&self) -> &[usize] {
        &self.residual
    }

    pub fn xi(&self) -> Option<u64> {
        self.xi
    }

    /// Bin index of every item.
    pub fn bins(&self) -> &[u32] {
        &self.bins
    }

    pub fn effective_eps(&self) -> BigRational {
        ratio::frac(1, self.k)
    }

    /// Largest over smallest interval within a block is at most `k^k`.
    pub fn width_holds(&self, instance: &Instance) -> bool {
        let bound = BigUint::from(self.k).pow(self.k as u32);
        self.blocks.iter().all(|b| {
            let ts: Vec<u64> = b.iter().map(|&i| instance.item(i).interval).collect();
            match (ts.iter().max(), ts.iter().min()) {
                (Some(&hi), Some(&lo)) => BigUint::from(hi) <= &bound * BigUint::from(lo),
                _ => true,
            }
        })
    }

    /// Every interval of an earlier block is at most `ε'` times every later one.
    pub fn separation_holds(&self, instance: &Instance) -> bool {
        let t = |i: usize| instance.item(i).interval as u128;
        self.blocks.iter().enumerate().all(|(m, b)| {
            let Some(lo) = b.iter().map(|&i| t(i)).min() else { return true };
            self.blocks[..m].iter().flatten().all(|&i| t(i) * self.k as u128 <= lo)
        })
    }

    /// `H(S_∞) <= ε' H_Σ`.
    pub fn negligibility_holds(&self, instance: &Instance) -> bool {
        instance.quantity_of(&self.residual) * self.k as u128 <= instance.total_quantity()
    }

    /// The LCM of all earlier blocks is at most `ε'` times the smallest interval of each block.
    pub fn shortness_holds(&self, instance: &Instance) -> bool {
        let mut lcm: Option<BigUint> = None;
        for b in &self.blocks {
            let Some(lo) = b.iter().map(|&i| instance.item(i).interval).min() else { continue };
            if lcm.as_ref().is_some_and(|l| l * BigUint::from(self.k) > BigUint::from(lo)) {
                return false;
            }
            let lcm = lcm.get_or_insert_with(BigUint::one);
            for &i in b {
                *lcm = num_integer::Integer::lcm(&*lcm, &BigUint::from(instance.item(i).interval));
            }
        }
        true
    }

    pub fn well_separated(&self, instance: &Instance) -> bool {
        self.width_holds(instance) && self.separation_holds(instance) && self.negligibility_holds(instance)
    }
}

fn partition_for(instance: &Instance, bins: &[u32], k: u64, xi: u64) -> WellSeparatedPartition {
    let top = bins.iter().copied().max().unwrap_or(1);
    let mut blocks = Vec::new();
    let mut residual = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for q in 1..=top {
        let members: Vec<usize> = (0..instance.len()).filter(|&i| bins[i] == q).collect();
        if q as u64 % k == xi {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
            residual.extend(members);
        } else {
            current.extend(members);
        }
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    residual.sort_unstable();
    WellSeparatedPartition {
        blocks,
        residual,
        xi: Some(xi),
        bins: bins.to_vec(),
        k,
    }
}

/// Tries every offset `ξ` and keeps the one with the lightest residual
/// (smallest `ξ` on ties). Uses `ε' = 1/⌈1/ε⌉`.
pub fn well_separated(instance: &Instance, eps: &BigRational) -> Result<WellSeparatedPartition> {
    let (k, _) = effective_eps(eps)?;
    if instance.mode() != Mode::Discrete {
        return Err(Error::input("well-separated partitions require a discrete instance"));
    }
    let bins: Vec<u32> = instance.intervals().iter().map(|&t| bin_of(t, k)).collect();
    let top = bins.iter().copied().max().unwrap_or(1) as u64;
    // offsets beyond the top bin mark nothing; one of them stands for all
    let offsets = k.min(top + 1);
    let best = (0..offsets)
        .map(|xi| partition_for(instance, &bins, k, xi))
        .min_by_key(|p| instance.quantity_of(&p.residual))
        .expect("at least one offset");
    debug_assert!(best.well_separated(instance));
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NearAdditivity {
    /// Optimum of the union of the blocks.
    pub lhs: Level,
    /// Sum of per-block optima.
    pub rhs: Level,
    pub holds: bool,
}

/// Compares the joint optimum of the blocks against `(1-2ε)` times the sum of
/// their separate optima, all by exhaustive search.
pub fn near_additivity_check(
    instance: &Instance,
    partition: &WellSeparatedPartition,
    eps: &BigRational,
    config: &SolverConfig,
) -> Result<NearAdditivity> {
    ratio::check_eps(eps, false)?;
    let union: Vec<usize> = {
        let mut u: Vec<usize> = partition.blocks().iter().flatten().copied().collect();
        u.sort_unstable();
        u
    };
    if union.is_empty() {
        return Ok(NearAdditivity {
            lhs: Level::zero(),
            rhs: Level::zero(),
            holds: true,
        });
    }
    let lhs = brute_optimum(&instance.restrict(&union)?, config)?.value;
    let mut rhs = Level::zero();
    for b in partition.blocks() {
        rhs += brute_optimum(&instance.restrict(b)?, config)?.value;
    }
    let holds = lhs >= (int(1) - int(2) * eps) * &rhs;
    Ok(NearAdditivity { lhs, rhs, holds })
}

#[derive(Debug, Clone)]
pub struct NestedOutcome {
    pub shifts: ShiftVector,
    pub peak: PeakResult,
    /// Partition of the instance that was solved (the scaled one for continuous input).
    pub partition: WellSeparatedPartition,
    pub block_peaks: Vec<Level>,
    pub residual_quantity: u128,
    pub effective_eps: BigRational,
    /// Interval scaling applied to continuous input.
    pub scale: Option<u64>,
}

/// Solves every block with the interval scheme, gives the residual zero
/// shifts and glues. Continuous input is solved on its scaled discrete copy.
pub fn nested_solve(instance: &Instance, eps: &BigRational, config: &SolverConfig) -> Result<NestedOutcome> {
    let (_, eff) = effective_eps(eps)?;
    if !is_nested(instance) {
        return Err(Error::input("intervals are not nested: some distinct interval does not divide the next"));
    }
    if instance.mode() == Mode::Continuous {
        let c = scale_factor(eps);
        let discrete = continuous_to_discrete(instance, eps)?;
        let inner = solve_discrete(&discrete, &eff, config)?;
        let shifts: Vec<BigRational> = inner
            .shifts
            .as_slice()
            .iter()
            .map(|s| s / int(c))
            .collect();
        let shifts = ShiftVector::new(instance, shifts)?;
        let peak = peak_auto(instance, &shifts, config)?;
        return Ok(NestedOutcome {
            shifts,
            peak,
            scale: Some(c),
            ..inner
        });
    }
    solve_discrete(instance, &eff, config)
}

fn solve_discrete(instance: &Instance, eff: &BigRational, config: &SolverConfig) -> Result<NestedOutcome> {
    let partition = well_separated(instance, eff)?;
    let mut shifts = vec![0u64; instance.len()];
    let mut block_peaks = Vec::with_capacity(partition.blocks().len());
    for block in partition.blocks() {
        let sub = instance.restrict(block)?;
        let out = interval_ptas_solve(&sub, eff, config)?;
        let local = out.shifts.integers().expect("discrete shifts");
        for (pos, &i) in block.iter().enumerate() {
            shifts[i] = local[pos];
        }
        block_peaks.push(out.peak.value);
    }
    let shifts = ShiftVector::from_integers(instance, &shifts)?;
    let peak = peak_auto(instance, &shifts, config)?;
    Ok(NestedOutcome {
        shifts,
        peak,
        residual_quantity: instance.quantity_of(partition.residual()),
        partition,
        block_peaks,
        effective_eps: eff.clone(),
        scale: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::peak::{peak_events, peak_scan};
    use crate::ratio::frac;

    fn inst(items: &[(u64, u64)]) -> Instance {
        Instance::discrete(items).unwrap()
    }

    #[test]
    fn scaling_examples() {
        let c = Instance::continuous(&[(2, 1), (4, 3)]).unwrap();
        let d = continuous_to_discrete(&c, &frac(1, 2)).unwrap();
        assert_eq!(d.intervals(), vec![4, 8]);
        assert_eq!(d.mode(), Mode::Discrete);
        assert_eq!(continuous_to_discrete(&c, &int(1)).unwrap().intervals(), vec![2, 4]);
        let big = Instance::continuous(&[(u64::MAX / 2, 1)]).unwrap();
        assert!(matches!(continuous_to_discrete(&big, &frac(1, 3)), Err(Error::Input(_))));
    }

    #[test]
    fn scaled_peak_maps_back() {
        let eps = frac(1, 3);
        let c = Instance::continuous(&[(2, 1), (4, 3), (8, 2)]).unwrap();
        let d = continuous_to_discrete(&c, &eps).unwrap();
        let config = SolverConfig::default();
        for tau in [[0u64, 0, 0], [1, 5, 17], [3, 11, 2]] {
            let dv = ShiftVector::from_integers(&d, &tau).unwrap();
            let cv = ShiftVector::new(&c, tau.iter().map(|&t| frac(t as i64, 3)).collect()).unwrap();
            assert_eq!(
                peak_scan(&d, &dv, &config).unwrap().value,
                peak_events(&c, &cv, &config).unwrap().value
            );
        }
    }

    #[test]
    fn bins_by_powers() {
        assert_eq!([1, 2, 3, 4, 5, 16, 17].map(|t| bin_of(t, 4)), [1, 1, 1, 1, 2, 2, 3]);
        assert_eq!([2, 4, 32].map(|t| bin_of(t, 2)), [1, 2, 5]);
    }

    #[test]
    fn partition_example() {
        let instance = inst(&[(2, 1), (4, 1), (32, 1)]);
        let p = well_separated(&instance, &frac(1, 2)).unwrap();
        assert_eq!(p.bins(), &[1, 2, 5]);
        // ξ=0 sets aside {4}; ξ=1 sets aside {2, 32}
        assert_eq!(p.xi(), Some(0));
        assert_eq!(p.residual(), &[1]);
        assert_eq!(p.blocks(), &[vec![0], vec![2]]);
        assert!(p.well_separated(&instance));
        assert!(p.shortness_holds(&instance));
    }

    #[test]
    fn single_item_is_one_block() {
        let instance = inst(&[(6, 2)]);
        let p = well_separated(&instance, &frac(1, 4)).unwrap();
        assert!(p.residual().is_empty());
        assert_eq!(p.blocks(), &[vec![0]]);
    }

    #[test]
    fn residual_is_negligible() {
        let mut state = 3u64;
        for _ in 0..100 {
            let items: Vec<(u64, u64)> = (0..6)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (1u64 << ((state >> 40) % 12), 1 + (state >> 20) % 50)
                })
                .collect();
            let instance = inst(&items);
            for e in [frac(1, 2), frac(1, 3), frac(2, 9)] {
                let p = well_separated(&instance, &e).unwrap();
                assert!(p.well_separated(&instance));
                assert!(p.shortness_holds(&instance));
            }
        }
    }

    #[test]
    fn effective_eps_rounds_down() {
        assert_eq!(effective_eps(&frac(3, 10)).unwrap(), (4, frac(1, 4)));
        assert_eq!(effective_eps(&frac(1, 2)).unwrap(), (2, frac(1, 2)));
        assert_eq!(effective_eps(&frac(9, 10)).unwrap(), (2, frac(1, 2)));
        assert!(effective_eps(&int(1)).is_err());
    }

    #[test]
    fn near_additivity_examples() {
        let config = SolverConfig::default();
        let eps = frac(1, 4);
        let instance = inst(&[(2, 1), (8, 1)]);
        let p = WellSeparatedPartition::from_blocks(&instance, &eps, vec![vec![0], vec![1]], vec![]).unwrap();
        assert!(p.shortness_holds(&instance));
        let r = near_additivity_check(&instance, &p, &eps, &config).unwrap();
        assert_eq!(r.rhs, int(2));
        assert!(r.holds);

        let one = WellSeparatedPartition::from_blocks(&instance, &eps, vec![vec![0, 1]], vec![]).unwrap();
        let r = near_additivity_check(&instance, &one, &eps, &config).unwrap();
        assert_eq!(r.lhs, r.rhs);
        assert!(r.holds);
    }

    #[test]
    fn rejects_non_nested() {
        let instance = inst(&[(2, 1), (3, 1)]);
        assert!(matches!(nested_solve(&instance, &frac(1, 2), &SolverConfig::default()), Err(Error::Input(_))));
    }

    #[test]
    fn solve_examples() {
        let config = SolverConfig::default();
        let eps = frac(1, 4);
        let instance = inst(&[(2, 1), (4, 1), (8, 1)]);
        let out = nested_solve(&instance, &eps, &config).unwrap();
        let opt = brute_optimum(&instance, &config).unwrap().value;
        assert!(out.peak.value <= opt * (int(1) + int(8) * &eps));
        assert_eq!(peak_scan(&instance, &out.shifts, &config).unwrap().value, out.peak.value);

        let single = inst(&[(6, 5)]);
        assert_eq!(nested_solve(&single, &eps, &config).unwrap().peak.value, int(5));

        let pair = inst(&[(2, 1), (2, 1)]);
        assert_eq!(nested_solve(&pair, &frac(1, 2), &config).unwrap().peak.value, frac(3, 2));
    }

    #[test]
    fn continuous_input_is_routed_through_scaling() {
        let config = SolverConfig::default();
        let c = Instance::continuous(&[(1, 2), (2, 1), (4, 3)]).unwrap();
        let out = nested_solve(&c, &frac(1, 2), &config).unwrap();
        assert_eq!(out.scale, Some(2));
        assert_eq!(peak_events(&c, &out.shifts, &config).unwrap().value, out.peak.value);
        assert!(out.peak.value <= int(c.total_quantity() as u64));
    }
}
