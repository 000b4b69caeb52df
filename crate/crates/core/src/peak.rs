//! Exact peak evaluation (scan, events, integer program) and the exhaustive optimum.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::model::{cycle_length, total_level, Instance, Level, Mode, ShiftVector};
use crate::ratio::{self, int};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Scan,
    Events,
    IntegerProgram,
    Exhaustive,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Scan => "scan",
            Engine::Events => "events",
            Engine::IntegerProgram => "ip",
            Engine::Exhaustive => "exhaustive",
        }
    }
}

/// `I_max(τ)` with the smallest time attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeakResult {
    pub value: Level,
    pub argmax_time: BigRational,
    pub engine: Engine,
}

fn require_discrete(instance: &Instance, what: &str) -> Result<()> {
    if instance.mode() != Mode::Discrete {
        return Err(Error::input(format!("{what} requires a discrete instance")));
    }
    Ok(())
}

fn integer_shifts(instance: &Instance, shifts: &ShiftVector) -> Result<Vec<u64>> {
    if shifts.len() != instance.len() {
        return Err(Error::input(format!(
            "shift vector has {} entries but the instance has {} items",
            shifts.len(),
            instance.len()
        )));
    }
    shifts
        .integers()
        .ok_or_else(|| Error::input("discrete evaluation needs integer shifts"))
}

/// `Λ` as a machine integer, or a budget error.
pub(crate) fn bounded_cycle(instance: &Instance, budget: u64) -> Result<u64> {
    let lambda = cycle_length(instance);
    match lambda.to_u64() {
        Some(l) if l <= budget => Ok(l),
        _ => Err(Error::budget("cycle length", lambda, budget)),
    }
}

/// `Λ · I_Σ(τ, t)` at every integer `t` scanned in order, with per-item phase counters.
///
/// Returns the maximum and its smallest argmax.
fn scan_scaled(intervals: &[u64], quantities: &[u64], shifts: &[u64], lambda: u64) -> (u128, u64) {
    let weights: Vec<u128> = intervals
        .iter()
        .zip(quantities)
        .map(|(&t, &h)| (lambda / t) as u128 * h as u128)
        .collect();
    // phase r_i = (t - τ_i) mod T_i, starting at t = 0
    let mut phase: Vec<u64> = intervals
        .iter()
        .zip(shifts)
        .map(|(&t, &s)| (t - s % t) % t)
        .collect();
    let mut best = (0u128, 0u64);
    for t in 0..lambda {
        let mut level = 0u128;
        for i in 0..intervals.len() {
            level += weights[i] * (intervals[i] - phase[i]) as u128;
            phase[i] += 1;
            if phase[i] == intervals[i] {
                phase[i] = 0;
            }
        }
        if level > best.0 {
            best = (level, t);
        }
    }
    best
}

/// Maximum of `I_Σ` over the integer times of one cycle.
pub fn peak_scan(instance: &Instance, shifts: &ShiftVector, config: &SolverConfig) -> Result<PeakResult> {
    require_discrete(instance, "peak_scan")?;
    let tau = integer_shifts(instance, shifts)?;
    let lambda = bounded_cycle(instance, config.scan_budget)?;
    let (value, t) = scan_scaled(&instance.intervals(), &instance.quantities(), &tau, lambda);
    Ok(PeakResult {
        value: BigRational::new(BigInt::from(value), BigInt::from(lambda)),
        argmax_time: int(t),
        engine: Engine::Scan,
    })
}

/// Evaluates `ΛD · I_Σ` at every order epoch in `[0, ΛD)`, where times are in units of `1/D`.
fn events_core<N>(periods: &[N], weights: &[N], offsets: &[N], counts: &[u64]) -> (N, N)
where
    N: Num + Ord + Clone + From<u64>,
{
    let level_at = |e: &N| -> N {
        let mut sum = N::zero();
        for j in 0..periods.len() {
            let p = &periods[j];
            // (e - a_j) mod p with both in [0, p·k); shift by p to stay nonnegative
            let r = (e.clone() + p.clone() - offsets[j].clone() % p.clone()) % p.clone();
            sum = sum + weights[j].clone() * (p.clone() - r);
        }
        sum
    };
    let mut best: Option<(N, N)> = None;
    for i in 0..periods.len() {
        let mut e = offsets[i].clone();
        for _ in 0..counts[i] {
            let v = level_at(&e);
            let better = match &best {
                None => true,
                Some((bv, bt)) => v > *bv || (v == *bv && e < *bt),
            };
            if better {
                best = Some((v, e.clone()));
            }
            e = e + periods[i].clone();
        }
    }
    best.expect("at least one epoch")
}

/// Maximum of `I_Σ` over the order epochs of one cycle; exact in either mode.
pub fn peak_events(instance: &Instance, shifts: &ShiftVector, config: &SolverConfig) -> Result<PeakResult> {
    if shifts.len() != instance.len() {
        return Err(Error::input(format!(
            "shift vector has {} entries but the instance has {} items",
            shifts.len(),
            instance.len()
        )));
    }
    let lambda = cycle_length(instance).into_inner();
    let counts_big: Vec<BigUint> = instance
        .items()
        .iter()
        .map(|it| &lambda / it.interval)
        .collect();
    let total: BigUint = counts_big.iter().sum();
    if total > BigUint::from(config.events_budget) {
        return Err(Error::budget("epoch count", total, config.events_budget));
    }
    let counts: Vec<u64> = counts_big.iter().map(|c| c.to_u64().expect("within budget")).collect();
    let denom = shifts.common_denominator();
    let offsets: Vec<BigInt> = shifts
        .as_slice()
        .iter()
        .map(|s| (s * BigRational::from_integer(denom.clone())).to_integer())
        .collect();
    let periods: Vec<BigInt> = instance
        .items()
        .iter()
        .map(|it| BigInt::from(it.interval) * &denom)
        .collect();
    let weights: Vec<BigInt> = instance
        .items()
        .iter()
        .zip(&counts)
        .map(|(it, &c)| BigInt::from(c) * it.quantity)
        .collect();
    let lambda = BigInt::from(lambda);
    // the largest intermediate is about ΛD · H_Σ
    let width = &lambda * &denom * BigInt::from(instance.total_quantity() + 1) * 2u32;
    let (value, time) = if width < BigInt::from(u128::MAX) {
        let cast = |v: &[BigInt]| -> Vec<u128> { v.iter().map(|x| x.to_u128().expect("fits")).collect() };
        let (v, t) = events_core::<u128>(&cast(&periods), &cast(&weights), &cast(&offsets), &counts);
        (BigInt::from(v), BigInt::from(t))
    } else {
        events_core::<BigInt>(&periods, &weights, &offsets, &counts)
    };
    let scale = &lambda * &denom;
    Ok(PeakResult {
        value: BigRational::new(value, scale),
        argmax_time: BigRational::new(time, denom),
        engine: Engine::Events,
    })
}

/// The peak-time integer program for a fixed shift vector, scaled by `Λ`.
///
/// Variables are the peak time `p` and one order index `x_i` per item;
/// `τ_i + x_i T_i <= p` and `0 <= p <= Λ`. The scaled objective is
/// `Σ (Λ/T_i) H_i (T_i − (p − τ_i − x_i T_i))`.
#[derive(Debug, Clone)]
pub struct IpModel {
    intervals: Vec<BigInt>,
    shifts: Vec<BigInt>,
    weights: Vec<BigInt>,
    lambda: BigInt,
    total: BigInt,
}

/// A feasible `(p, x)` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IpWitness {
    pub p: BigInt,
    pub x: Vec<BigInt>,
    pub objective: BigInt,
}

impl IpModel {
    pub fn new(instance: &Instance, shifts: &ShiftVector) -> Result<Self> {
        require_discrete(instance, "the integer program")?;
        let tau = integer_shifts(instance, shifts)?;
        let lambda = BigInt::from(cycle_length(instance).into_inner());
        Ok(IpModel {
            intervals: instance.items().iter().map(|it| BigInt::from(it.interval)).collect(),
            shifts: tau.into_iter().map(BigInt::from).collect(),
            weights: instance
                .items()
                .iter()
                .map(|it| &lambda / it.interval * it.quantity)
                .collect(),
            total: BigInt::from(instance.total_quantity()),
            lambda,
        })
    }

    pub fn lambda(&self) -> &BigInt {
        &self.lambda
    }

    /// `Λ · H_Σ`, the objective's ceiling.
    pub fn ceiling(&self) -> BigInt {
        &self.lambda * &self.total
    }

    /// Optimal order indices for a fixed `p`: the latest order at or before `p`.
    pub fn best_orders(&self, p: &BigInt) -> Vec<BigInt> {
        self.intervals
            .iter()
            .zip(&self.shifts)
            .map(|(t, s)| (p - s).div_floor(t))
            .collect()
    }

    pub fn objective(&self, p: &BigInt, x: &[BigInt]) -> BigInt {
        (0..self.intervals.len())
            .map(|i| {
                let elapsed = p - &self.shifts[i] - &x[i] * &self.intervals[i];
                &self.weights[i] * (&self.intervals[i] - elapsed)
            })
            .sum()
    }

    pub fn is_feasible(&self, p: &BigInt, x: &[BigInt]) -> bool {
        p >= &BigInt::zero()
            && p <= &self.lambda
            && (0..self.intervals.len()).all(|i| &self.shifts[i] + &x[i] * &self.intervals[i] <= *p)
    }

    fn value_at(&self, p: &BigInt) -> BigInt {
        self.objective(p, &self.best_orders(p))
    }

    /// Upper bound on the objective over `p ∈ [a, b]`: items with an order in
    /// `(a, b]` may be full, the rest only drain from their level at `a`.
    fn bound(&self, a: &BigInt, b: &BigInt) -> (BigInt, bool) {
        let mut ub = BigInt::zero();
        let mut exact = true;
        for i in 0..self.intervals.len() {
            let t = &self.intervals[i];
            let r = (a - &self.shifts[i]).mod_floor(t);
            let next = a + (t - &r);
            if &next <= b {
                ub += &self.weights[i] * t;
                exact = false;
            } else {
                ub += &self.weights[i] * (t - r);
            }
        }
        (ub, exact)
    }

    /// Smallest `p ∈ [a, b]` with objective `>= psi`, by depth-first branch and bound.
    fn search(&self, a: BigInt, b: BigInt, psi: &BigInt) -> Option<BigInt> {
        let (ub, exact) = self.bound(&a, &b);
        if ub < *psi {
            return None;
        }
        if exact || a == b {
            // no order arrives inside (a, b]: the objective is maximal at a
            return (self.value_at(&a) >= *psi).then_some(a);
        }
        let mid: BigInt = (&a + &b).div_floor(&BigInt::from(2));
        let right = &mid + 1;
        self.search(a, mid, psi).or_else(|| self.search(right, b, psi))
    }
}

/// Finds `(p, x)` satisfying the model with scaled objective `>= psi`, or `None`.
pub fn ip_feasible(model: &IpModel, psi: &BigInt) -> Option<IpWitness> {
    ip_feasible_within(model, psi, &model.lambda)
}

/// As [`ip_feasible`] with the extra constraint `p <= p_max`.
pub fn ip_feasible_within(model: &IpModel, psi: &BigInt, p_max: &BigInt) -> Option<IpWitness> {
    if p_max < &BigInt::zero() {
        return None;
    }
    let hi = p_max.min(&model.lambda).clone();
    let p = model.search(BigInt::zero(), hi, psi)?;
    let x = model.best_orders(&p);
    let objective = model.objective(&p, &x);
    Some(IpWitness { p, x, objective })
}

/// Peak via the integer program: binary search on the objective threshold,
/// then on the latest admissible peak time to pin the earliest maximizer.
pub fn peak_ip(instance: &Instance, shifts: &ShiftVector, config: &SolverConfig) -> Result<PeakResult> {
    require_discrete(instance, "peak_ip")?;
    if instance.len() > config.ip_dimension_budget {
        return Err(Error::budget("item count", instance.len(), config.ip_dimension_budget));
    }
    let model = IpModel::new(instance, shifts)?;
    let two = BigInt::from(2);
    // the average-space argument makes Λ·H_Σ/2 always feasible
    let mut lo: BigInt = Integer::div_ceil(&model.ceiling(), &two);
    let mut hi: BigInt = model.ceiling() + 1;
    debug_assert!(ip_feasible(&model, &lo).is_some());
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi).div_floor(&two);
        if ip_feasible(&model, &mid).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let psi = lo;
    // smallest p_max that still admits objective psi
    let mut p_lo = BigInt::from(-1);
    let mut p_hi = model.lambda.clone();
    while &p_hi - &p_lo > BigInt::one() {
        let mid: BigInt = (&p_lo + &p_hi).div_floor(&two);
        if ip_feasible_within(&model, &psi, &mid).is_some() {
            p_hi = mid;
        } else {
            p_lo = mid;
        }
    }
    Ok(PeakResult {
        value: BigRational::new(psi, model.lambda.clone()),
        argmax_time: BigRational::from_integer(p_hi),
        engine: Engine::IntegerProgram,
    })
}

/// Scan when the instance is discrete and its cycle fits the scan budget, events otherwise.
pub fn peak_auto(instance: &Instance, shifts: &ShiftVector, config: &SolverConfig) -> Result<PeakResult> {
    if instance.mode() == Mode::Discrete {
        if let Some(l) = cycle_length(instance).to_u64() {
            if l <= config.scan_budget {
                return peak_scan(instance, shifts, config);
            }
        }
    }
    peak_events(instance, shifts, config)
}

/// Best shift vector found by exhaustive search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimumResult {
    pub value: Level,
    pub shifts: ShiftVector,
    pub argmax_time: BigRational,
    /// False when the search ran over a grid of a continuous instance.
    pub exact: bool,
    pub vectors: u64,
}

/// Depth-first enumeration of integer shift vectors (first shift pinned to 0)
/// in lexicographic order, pruning any prefix whose partial peak already
/// reaches the best value seen.
struct Brute<'a> {
    intervals: &'a [u64],
    weights: Vec<u64>,
    lambda: usize,
}

impl Brute<'_> {
    fn add_item(&self, base: &[u64], out: &mut [u64], i: usize, shift: u64) -> u64 {
        let t = self.intervals[i];
        let w = self.weights[i];
        let mut phase = (t - shift % t) % t;
        let mut max = 0;
        for k in 0..self.lambda {
            let v = base[k] + w * (t - phase);
            out[k] = v;
            max = max.max(v);
            phase += 1;
            if phase == t {
                phase = 0;
            }
        }
        max
    }

    /// Best `(value, shifts)` below `cutoff` within the subtree of `prefix`.
    fn subtree(&self, prefix: &[u64], cutoff: u64) -> Option<(u64, Vec<u64>)> {
        let n = self.intervals.len();
        let mut levels = vec![vec![0u64; self.lambda]; n + 1];
        for (i, &s) in prefix.iter().enumerate() {
            let (head, tail) = levels.split_at_mut(i + 1);
            if self.add_item(&head[i], &mut tail[0], i, s) >= cutoff {
                return None;
            }
        }
        let mut best: Option<(u64, Vec<u64>)> = None;
        let mut cutoff = cutoff;
        let mut current = prefix.to_vec();
        self.descend(&mut levels, &mut current, &mut cutoff, &mut best);
        best
    }

    fn descend(
        &self,
        levels: &mut [Vec<u64>],
        current: &mut Vec<u64>,
        cutoff: &mut u64,
        best: &mut Option<(u64, Vec<u64>)>,
    ) {
        let i = current.len();
        if i == self.intervals.len() {
            let value = levels[i].iter().copied().max().unwrap_or(0);
            if value < *cutoff {
                *cutoff = value;
                *best = Some((value, current.clone()));
            }
            return;
        }
        for s in 0..self.intervals[i] {
            let (head, tail) = levels.split_at_mut(i + 1);
            if self.add_item(&head[i], &mut tail[0], i, s) >= *cutoff {
                continue;
            }
            current.push(s);
            self.descend(levels, current, cutoff, best);
            current.pop();
        }
    }
}

/// Exact discrete optimum by exhaustive search; a grid heuristic in continuous mode.
///
/// Continuous instances are searched over shifts that are multiples of
/// `1/config.brute_grid`, which only upper-bounds the true optimum.
pub fn brute_optimum(instance: &Instance, config: &SolverConfig) -> Result<OptimumResult> {
    match instance.mode() {
        Mode::Discrete => brute_discrete(instance, config),
        Mode::Continuous => {
            let g = config.brute_grid.max(1);
            let scaled = scale_intervals(instance, g)?;
            let found = brute_discrete(&scaled, config)?;
            let shifts = ShiftVector::new(
                instance,
                found
                    .shifts
                    .as_slice()
                    .iter()
                    .map(|s| s / int(g))
                    .collect(),
            )?;
            Ok(OptimumResult {
                value: found.value,
                shifts,
                argmax_time: found.argmax_time / int(g),
                exact: false,
                vectors: found.vectors,
            })
        }
    }
}

/// The same items with every interval multiplied by `factor`, as a discrete instance.
pub(crate) fn scale_intervals(instance: &Instance, factor: u64) -> Result<Instance> {
    let items = instance
        .items()
        .iter()
        .map(|it| {
            it.interval
                .checked_mul(factor)
                .map(|t| crate::model::Item::new(t, it.quantity))
                .ok_or_else(|| Error::input(format!("interval {} times {factor} overflows 64 bits", it.interval)))
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(items, Mode::Discrete)
}

fn brute_discrete(instance: &Instance, config: &SolverConfig) -> Result<OptimumResult> {
    let intervals = instance.intervals();
    let count = intervals[1..]
        .iter()
        .try_fold(1u64, |acc, &t| acc.checked_mul(t))
        .filter(|&c| c <= config.brute_budget);
    let Some(count) = count else {
        let big: BigUint = intervals[1..].iter().map(|&t| BigUint::from(t)).product();
        return Err(Error::budget("shift-vector count", big, config.brute_budget));
    };
    let lambda = bounded_cycle(instance, config.scan_budget)?;
    let ceiling = (lambda as u128) * instance.total_quantity();
    if ceiling >= u64::MAX as u128 {
        return Err(Error::budget("scaled level", ceiling, u64::MAX));
    }
    let brute = Brute {
        intervals: &intervals,
        weights: instance
            .items()
            .iter()
            .map(|it| lambda / it.interval * it.quantity)
            .collect(),
        lambda: lambda as usize,
    };
    // split the search into lexicographically ordered prefixes for the workers
    let mut prefixes: Vec<Vec<u64>> = vec![vec![0]];
    let mut depth = 1;
    while prefixes.len() < 64 && depth < intervals.len() {
        prefixes = prefixes
            .into_iter()
            .flat_map(|p| {
                (0..intervals[depth]).map(move |s| {
                    let mut q = p.clone();
                    q.push(s);
                    q
                })
            })
            .collect();
        depth += 1;
    }
    let cutoff = ceiling as u64 + 1;
    let results: Vec<Option<(u64, Vec<u64>)>> = if config.jobs <= 1 {
        // sequentially, each prefix only has to beat everything before it
        let mut bound = cutoff;
        prefixes
            .iter()
            .map(|p| {
                let found = brute.subtree(p, bound);
                if let Some((v, _)) = &found {
                    bound = *v;
                }
                found
            })
            .collect()
    } else {
        config.install(|| prefixes.par_iter().map(|p| brute.subtree(p, cutoff)).collect())
    };
    let (value, best) = results
        .into_iter()
        .flatten()
        .min()
        .expect("the all-zero vector is always below the ceiling cutoff");
    let shifts = ShiftVector::from_integers(instance, &best)?;
    let peak = peak_scan(instance, &shifts, config)?;
    debug_assert_eq!(peak.value, BigRational::new(BigInt::from(value), BigInt::from(lambda)));
    Ok(OptimumResult {
        value: peak.value,
        shifts,
        argmax_time: peak.argmax_time,
        exact: true,
        vectors: count,
    })
}

/// Peak of an explicit vector, exact, by whichever engine fits.
pub fn peak_of(instance: &Instance, shifts: &ShiftVector, config: &SolverConfig) -> Result<Level> {
    peak_auto(instance, shifts, config).map(|p| p.value)
}

/// `I_Σ` at the reported argmax; used to cross-check engines.
pub fn level_at_argmax(instance: &Instance, shifts: &ShiftVector, result: &PeakResult) -> Result<Level> {
    total_level(instance, shifts, &result.argmax_time)
}

/// Exact rational as `"p/q"` text for reports.
pub fn describe(result: &PeakResult) -> (String, String) {
    (ratio::format(&result.value), ratio::format(&result.argmax_time))
}
