//! Approximation scheme for instances with few distinct intervals.
//!
//! Items are grouped by interval. For every class a table of per-shift
//! quantity guesses (multiples of `ε²H_Σ/K`) is balanced into a partition of
//! the class, each group is collapsed to one super-item at its shift, and the
//! best glued vector wins.

mod balance;

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

pub use balance::{balance_partition, Assignment};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::lp_rounding::shift_options;
use crate::model::{Instance, Item, Mode, ShiftVector};
use crate::peak::{bounded_cycle, peak_events, peak_ip, peak_scan, PeakResult};
use crate::ratio::{self, int};

/// Items grouped by distinct interval, with the shift set every class shares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalClasses {
    intervals: Vec<u64>,
    members: Vec<Vec<usize>>,
    shifts: Vec<Vec<u64>>,
    quantities: Vec<u64>,
}

impl IntervalClasses {
    /// `K`.
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn interval(&self, k: usize) -> u64 {
        self.intervals[k]
    }

    pub fn intervals(&self) -> &[u64] {
        &self.intervals
    }

    pub fn members(&self, k: usize) -> &[usize] {
        &self.members[k]
    }

    pub fn shift_set(&self, k: usize) -> &[u64] {
        &self.shifts[k]
    }

    pub fn item_count(&self) -> usize {
        self.quantities.len()
    }

    pub fn class_quantity(&self, k: usize) -> u128 {
        self.members[k].iter().map(|&i| self.quantities[i] as u128).sum()
    }

    pub fn total_quantity(&self) -> u128 {
        self.quantities.iter().map(|&h| h as u128).sum()
    }

    fn quantity(&self, i: usize) -> u64 {
        self.quantities[i]
    }
}

/// Classes in increasing interval order, members in increasing item order.
pub fn group_by_interval(instance: &Instance, eps: &BigRational) -> Result<IntervalClasses> {
    ratio::check_eps(eps, false)?;
    if instance.mode() != Mode::Discrete {
        return Err(Error::input("interval grouping requires a discrete instance"));
    }
    let mut intervals = instance.intervals();
    intervals.sort_unstable();
    intervals.dedup();
    let members = intervals
        .iter()
        .map(|&t| (0..instance.len()).filter(|&i| instance.item(i).interval == t).collect())
        .collect();
    let shifts = intervals.iter().map(|&t| shift_options(t, eps).0).collect();
    Ok(IntervalClasses {
        intervals,
        members,
        shifts,
        quantities: instance.quantities(),
    })
}

/// Guessed group quantity `multiples[k][j] · unit` for shift `shift_set(k)[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuantityGuess {
    unit: BigRational,
    multiples: Vec<Vec<u64>>,
}

impl QuantityGuess {
    pub fn unit(&self) -> &BigRational {
        &self.unit
    }

    pub fn multiples(&self) -> &[Vec<u64>] {
        &self.multiples
    }

    pub fn entry(&self, k: usize, j: usize) -> BigRational {
        &self.unit * int(self.multiples[k][j])
    }

    pub fn row(&self, k: usize) -> Vec<BigRational> {
        (0..self.multiples[k].len()).map(|j| self.entry(k, j)).collect()
    }
}

/// `ε² H_Σ / K`.
pub fn quantity_unit(classes: &IntervalClasses, eps: &BigRational) -> BigRational {
    eps * eps * int(classes.total_quantity()) / int(classes.len() as u64)
}

/// `⌈K/ε²⌉`, the largest multiple a single entry may take.
pub fn max_multiple(classes: &IntervalClasses, eps: &BigRational) -> u64 {
    ratio::ceil(&(int(classes.len() as u64) / (eps * eps)))
        .to_u64()
        .expect("K/ε² fits a machine word")
}

/// Admissible row sums `[⌈H(S_k)/u⌉, ⌊H(S_k)/u + |D|⌋]`, in multiples of `u`.
fn sum_window(classes: &IntervalClasses, k: usize, unit: &BigRational) -> (u64, u64) {
    let base = int(classes.class_quantity(k)) / unit;
    let lo = ratio::ceil(&base).to_u64().expect("bounded by K/ε²");
    let hi = ratio::floor(&(base + int(classes.shift_set(k).len() as u64)))
        .to_u64()
        .expect("bounded by K/ε² + |D|");
    (lo, hi)
}

/// Number of length-`d` rows with entries in `[0, cap]` and sum in `[lo, hi]`.
fn count_rows(d: usize, cap: u64, lo: u64, hi: u64) -> BigUint {
    let width = hi as usize + 1;
    let mut ways = vec![BigUint::zero(); width];
    ways[0] = BigUint::one();
    for _ in 0..d {
        let mut next = vec![BigUint::zero(); width];
        for (s, w) in ways.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for m in 0..=cap.min((hi as usize - s) as u64) {
                next[s + m as usize] += w;
            }
        }
        ways = next;
    }
    ways[lo as usize..].iter().sum()
}

/// All admissible rows of class `k`, lexicographically.
fn class_rows(d: usize, cap: u64, lo: u64, hi: u64) -> Vec<Vec<u64>> {
    fn walk(d: usize, cap: u64, lo: u64, hi: u64, row: &mut Vec<u64>, sum: u64, out: &mut Vec<Vec<u64>>) {
        if row.len() == d {
            if sum >= lo {
                out.push(row.clone());
            }
            return;
        }
        let remaining = (d - row.len() - 1) as u64;
        for m in 0..=cap.min(hi - sum) {
            if sum + m + remaining * cap < lo {
                continue;
            }
            row.push(m);
            walk(d, cap, lo, hi, row, sum + m, out);
            row.pop();
        }
    }
    let mut out = Vec::new();
    walk(d, cap, lo, hi, &mut Vec::with_capacity(d), 0, &mut out);
    out
}

fn rows_within_budget(classes: &IntervalClasses, k: usize, eps: &BigRational, config: &SolverConfig) -> Result<Vec<Vec<u64>>> {
    let unit = quantity_unit(classes, eps);
    let (lo, hi) = sum_window(classes, k, &unit);
    let d = classes.shift_set(k).len();
    let cap = max_multiple(classes, eps);
    let count = count_rows(d, cap, lo, hi);
    if count > BigUint::from(config.guess_budget) {
        return Err(Error::budget("quantity guesses per class", count, config.guess_budget));
    }
    Ok(class_rows(d, cap, lo, hi))
}

/// Number of full tables, the product of the per-class row counts.
pub fn guess_count(classes: &IntervalClasses, eps: &BigRational) -> BigUint {
    let unit = quantity_unit(classes, eps);
    let cap = max_multiple(classes, eps);
    (0..classes.len())
        .map(|k| {
            let (lo, hi) = sum_window(classes, k, &unit);
            count_rows(classes.shift_set(k).len(), cap, lo, hi)
        })
        .product()
}

/// Odometer over the product of per-class rows.
pub struct QuantityGuesses {
    unit: BigRational,
    rows: Vec<Vec<Vec<u64>>>,
    digits: Option<Vec<usize>>,
}

impl Iterator for QuantityGuesses {
    type Item = QuantityGuess;

    fn next(&mut self) -> Option<QuantityGuess> {
        let digits = self.digits.as_mut()?;
        let guess = QuantityGuess {
            unit: self.unit.clone(),
            multiples: digits.iter().zip(&self.rows).map(|(&d, rows)| rows[d].clone()).collect(),
        };
        let mut k = digits.len();
        loop {
            if k == 0 {
                self.digits = None;
                break;
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < self.rows[k].len() {
                break;
            }
            digits[k] = 0;
        }
        Some(guess)
    }
}

/// Streams every table whose class rows sum into their windows.
pub fn enumerate_quantity_guesses(
    classes: &IntervalClasses,
    eps: &BigRational,
    config: &SolverConfig,
) -> Result<QuantityGuesses> {
    ratio::check_eps(eps, false)?;
    let total = guess_count(classes, eps);
    if total > BigUint::from(config.guess_budget) {
        return Err(Error::budget("quantity guesses", total, config.guess_budget));
    }
    let rows: Vec<Vec<Vec<u64>>> = (0..classes.len())
        .map(|k| rows_within_budget(classes, k, eps, config))
        .collect::<Result<_>>()?;
    let digits = rows.iter().all(|r| !r.is_empty()).then(|| vec![0; rows.len()]);
    Ok(QuantityGuesses {
        unit: quantity_unit(classes, eps),
        rows,
        digits,
    })
}

/// The table rounding every group of a shift vector up to the grid.
///
/// Every shift must lie in its class's shift set.
pub fn true_table(classes: &IntervalClasses, shifts: &[u64], eps: &BigRational) -> Result<QuantityGuess> {
    if shifts.len() != classes.item_count() {
        return Err(Error::input("shift vector does not match the classes"));
    }
    let unit = quantity_unit(classes, eps);
    let mut multiples = Vec::with_capacity(classes.len());
    for k in 0..classes.len() {
        let mut sums = vec![0u128; classes.shift_set(k).len()];
        for &i in classes.members(k) {
            let j = classes
                .shift_set(k)
                .iter()
                .position(|&s| s == shifts[i])
                .ok_or_else(|| Error::input(format!("shift {} of item {i} is outside its set", shifts[i])))?;
            sums[j] += classes.quantity(i) as u128;
        }
        multiples.push(
            sums.iter()
                .map(|&h| ratio::ceil(&(int(h) / &unit)).to_u64().expect("bounded by K/ε²"))
                .collect(),
        );
    }
    Ok(QuantityGuess { unit, multiples })
}

/// Item groups per class and shift index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MimickingPartition {
    groups: Vec<Vec<Vec<usize>>>,
}

impl MimickingPartition {
    pub fn new(groups: Vec<Vec<Vec<usize>>>) -> Self {
        MimickingPartition { groups }
    }

    pub fn groups(&self) -> &[Vec<Vec<usize>>] {
        &self.groups
    }

    /// Every class's groups are a disjoint cover of that class.
    pub fn is_valid(&self, classes: &IntervalClasses) -> bool {
        if self.groups.len() != classes.len() {
            return false;
        }
        (0..classes.len()).all(|k| {
            if self.groups[k].len() != classes.shift_set(k).len() {
                return false;
            }
            let mut seen: Vec<usize> = self.groups[k].iter().flatten().copied().collect();
            seen.sort_unstable();
            seen == classes.members(k)
        })
    }

    /// The shift vector placing every item at its group's shift.
    pub fn expand(&self, classes: &IntervalClasses) -> Vec<u64> {
        let mut shifts = vec![0; classes.item_count()];
        for (k, groups) in self.groups.iter().enumerate() {
            for (j, group) in groups.iter().enumerate() {
                for &i in group {
                    shifts[i] = classes.shift_set(k)[j];
                }
            }
        }
        shifts
    }
}

/// One item per nonempty group, with the group's interval, summed quantity and shift.
pub fn superitem_instance(classes: &IntervalClasses, partition: &MimickingPartition) -> Result<(Instance, ShiftVector)> {
    if !partition.is_valid(classes) {
        return Err(Error::input("partition does not split every class exactly"));
    }
    let mut items = Vec::new();
    let mut shifts = Vec::new();
    for (k, groups) in partition.groups().iter().enumerate() {
        for (j, group) in groups.iter().enumerate() {
            if group.is_empty() {
                continue;
            }
            let h: u128 = group.iter().map(|&i| classes.quantity(i) as u128).sum();
            let h = u64::try_from(h).map_err(|_| Error::input("super-item quantity overflows"))?;
            items.push(Item::new(classes.interval(k), h));
            shifts.push(classes.shift_set(k)[j]);
        }
    }
    let instance = Instance::new(items, Mode::Discrete)?;
    let shifts = ShiftVector::from_integers(&instance, &shifts)?;
    Ok((instance, shifts))
}

/// Splits class `k` along one row of a table; `None` rejects the row.
fn balance_class(
    classes: &IntervalClasses,
    k: usize,
    row: &[u64],
    unit: &BigRational,
    eps: &BigRational,
    config: &SolverConfig,
) -> Result<Option<Vec<Vec<usize>>>> {
    let members = classes.members(k);
    let jobs: Vec<u64> = members.iter().map(|&i| classes.quantity(i)).collect();
    let speeds: Vec<BigRational> = row.iter().map(|&m| unit * int(m)).collect();
    let assignment = balance_partition(&jobs, &speeds, eps, config.exact_balance_jobs)?;
    Ok(assignment.map(|a| {
        let mut groups = vec![Vec::new(); row.len()];
        for (pos, &machine) in a.machine_of.iter().enumerate() {
            groups[machine].push(members[pos]);
        }
        groups
    }))
}

/// Peak of a super-item instance: scan when the cycle fits, else the
/// integer program when it is small, else order events.
fn evaluate(instance: &Instance, shifts: &ShiftVector, config: &SolverConfig) -> Result<PeakResult> {
    if bounded_cycle(instance, config.scan_budget).is_ok() {
        peak_scan(instance, shifts, config)
    } else if instance.len() <= config.ip_dimension_budget {
        peak_ip(instance, shifts, config)
    } else {
        peak_events(instance, shifts, config)
    }
}

/// Distinct balanced splits of one class, keyed by their group quantities.
struct ClassSplits {
    rows: Vec<Vec<u64>>,
    splits: Vec<(usize, Vec<Vec<usize>>)>,
    accepted: u64,
}

fn class_splits(classes: &IntervalClasses, k: usize, eps: &BigRational, config: &SolverConfig) -> Result<ClassSplits> {
    let unit = quantity_unit(classes, eps);
    let rows = rows_within_budget(classes, k, eps, config)?;
    let balanced: Vec<Option<Vec<Vec<usize>>>> = rows
        .par_iter()
        .map(|row| balance_class(classes, k, row, &unit, eps, config))
        .collect::<Result<_>>()?;
    let mut seen = HashSet::new();
    let mut splits = Vec::new();
    let mut accepted = 0;
    for (r, groups) in balanced.into_iter().enumerate() {
        let Some(groups) = groups else { continue };
        accepted += 1;
        let key: Vec<u128> = groups
            .iter()
            .map(|g| g.iter().map(|&i| classes.quantity(i) as u128).sum())
            .collect();
        if seen.insert(key) {
            splits.push((r, groups));
        }
    }
    Ok(ClassSplits { rows, splits, accepted })
}

/// `Λ·I` of one class's super-items over one cycle.
fn class_profile(classes: &IntervalClasses, k: usize, groups: &[Vec<usize>], lambda: u64) -> Vec<u128> {
    let t = classes.interval(k);
    let mut profile = vec![0u128; lambda as usize];
    for (j, group) in groups.iter().enumerate() {
        let h: u128 = group.iter().map(|&i| classes.quantity(i) as u128).sum();
        if h == 0 {
            continue;
        }
        let weight = (lambda / t) as u128 * h;
        let shift = classes.shift_set(k)[j];
        for (time, slot) in profile.iter_mut().enumerate() {
            let phase = (time as u64 % t + t - shift) % t;
            *slot += weight * (t - phase) as u128;
        }
    }
    profile
}

/// Profiles are cached only below this many entries in total.
const PROFILE_CACHE_LIMIT: u128 = 1 << 25;

#[derive(Debug, Clone)]
pub struct IntervalPtasOutcome {
    pub shifts: ShiftVector,
    pub peak: PeakResult,
    pub classes: usize,
    /// Full tables in the enumeration (product over classes).
    pub guesses: BigUint,
    /// Full tables containing at least one rejected class row.
    pub rejected: BigUint,
    /// Distinct glued partitions whose peaks were evaluated.
    pub evaluated: u64,
    pub table: QuantityGuess,
    pub partition: MimickingPartition,
    pub super_items: usize,
}

/// Runs every quantity guess and returns the best glued vector.
///
/// Rows are balanced per class, since a class's split depends only on its own
/// row; splits with equal group quantities are interchangeable and kept once.
/// Deterministic and independent of `config.jobs`.
pub fn interval_ptas_solve(instance: &Instance, eps: &BigRational, config: &SolverConfig) -> Result<IntervalPtasOutcome> {
    let classes = group_by_interval(instance, eps)?;
    let per_class: Vec<ClassSplits> = config.install(|| {
        (0..classes.len())
            .map(|k| class_splits(&classes, k, eps, config))
            .collect::<Result<_>>()
    })?;
    if let Some(k) = per_class.iter().position(|c| c.splits.is_empty()) {
        return Err(Error::Solver(format!(
            "no quantity guess for interval {} admits a balanced split",
            classes.interval(k)
        )));
    }
    let radix: Vec<usize> = per_class.iter().map(|c| c.splits.len()).collect();
    let combos: BigUint = radix.iter().map(|&r| BigUint::from(r)).product();
    let combos = match combos.to_u64() {
        Some(c) if c <= config.guess_budget => c,
        _ => return Err(Error::budget("glued partitions", combos, config.guess_budget)),
    };
    let decode = |mut code: u64| -> Vec<usize> {
        let mut digits = vec![0; radix.len()];
        for k in (0..radix.len()).rev() {
            digits[k] = (code % radix[k] as u64) as usize;
            code /= radix[k] as u64;
        }
        digits
    };
    let partition_of = |digits: &[usize]| {
        MimickingPartition::new(
            digits
                .iter()
                .zip(&per_class)
                .map(|(&d, c)| c.splits[d].1.clone())
                .collect(),
        )
    };

    let lambda = bounded_cycle(instance, config.scan_budget).ok();
    let cached_entries = lambda.map(|l| radix.iter().map(|&r| r as u128).sum::<u128>() * l as u128);
    let values: Vec<BigRational> = config.install(|| -> Result<Vec<BigRational>> {
        match (lambda, cached_entries) {
            (Some(l), Some(entries)) if entries <= PROFILE_CACHE_LIMIT => {
                let profiles: Vec<Vec<Vec<u128>>> = per_class
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c.splits.iter().map(|(_, g)| class_profile(&classes, k, g, l)).collect())
                    .collect();
                Ok((0..combos)
                    .into_par_iter()
                    .map(|code| {
                        let digits = decode(code);
                        let peak = (0..l as usize)
                            .map(|t| digits.iter().enumerate().map(|(k, &d)| profiles[k][d][t]).sum::<u128>())
                            .max()
                            .unwrap_or(0);
                        BigRational::new(BigInt::from(peak), BigInt::from(l))
                    })
                    .collect())
            }
            _ => (0..combos)
                .into_par_iter()
                .map(|code| {
                    let (sup, shifts) = superitem_instance(&classes, &partition_of(&decode(code)))?;
                    Ok(evaluate(&sup, &shifts, config)?.value)
                })
                .collect(),
        }
    })?;
    let best_value = values.iter().min().expect("at least one glued partition").clone();
    let (digits, shifts) = (0..combos)
        .filter(|&c| values[c as usize] == best_value)
        .map(|c| {
            let digits = decode(c);
            let shifts = partition_of(&digits).expand(&classes);
            (digits, shifts)
        })
        .min_by(|a, b| a.1.cmp(&b.1))
        .expect("the minimum is attained");

    let partition = partition_of(&digits);
    let (sup, sup_shifts) = superitem_instance(&classes, &partition)?;
    let peak = evaluate(&sup, &sup_shifts, config)?;
    debug_assert_eq!(peak.value, best_value);
    let table = QuantityGuess {
        unit: quantity_unit(&classes, eps),
        multiples: digits
            .iter()
            .zip(&per_class)
            .map(|(&d, c)| c.rows[c.splits[d].0].clone())
            .collect(),
    };
    let guesses: BigUint = per_class.iter().map(|c| BigUint::from(c.rows.len())).product();
    let accepted: BigUint = per_class.iter().map(|c| BigUint::from(c.accepted)).product();
    Ok(IntervalPtasOutcome {
        shifts: ShiftVector::from_integers(instance, &shifts)?,
        peak,
        classes: classes.len(),
        rejected: &guesses - accepted,
        guesses,
        evaluated: combos,
        table,
        partition,
        super_items: sup.len(),
    })
}
