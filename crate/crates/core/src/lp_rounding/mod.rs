//! Randomized LP-rounding scheme for instances with a moderate cycle length.
//!
//! Shifts are restricted to a small per-item set, the peak and the shifts of
//! heavy items are guessed, and for every guess a feasibility LP is solved and
//! rounded item by item. The best rounded vector over all guesses wins.

mod lp;

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

pub use lp::{
    build_lp, indicator_of, round_solution, solve_lp, FeasibilityLp, FractionalSolution, LpOutcome,
    LP_TOLERANCE,
};

use crate::arith;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::model::{cycle_length, Instance, Level, Mode, ShiftVector};
use crate::peak::{peak_scan, PeakResult};
use crate::ratio::{self, frac, int};
use crate::rng::RngStream;

/// Allowed shifts per item, ascending and inside `[0, T_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscretizationSet {
    sets: Vec<Vec<u64>>,
    large: Vec<bool>,
}

impl DiscretizationSet {
    pub fn sets(&self) -> &[Vec<u64>] {
        &self.sets
    }

    pub fn set(&self, i: usize) -> &[u64] {
        &self.sets[i]
    }

    /// Large items have `T_i > 1/ε` and keep only rounded multiples of `εT_i`.
    pub fn is_large(&self, i: usize) -> bool {
        self.large[i]
    }

    /// Number of restricted vectors, `Π |D_i|`.
    pub fn vector_count(&self) -> BigUint {
        self.sets.iter().map(|s| BigUint::from(s.len())).product()
    }
}

/// Shift set of one interval: everything for `T <= 1/ε`, else `⌊jεT⌋` for
/// `1 <= j <= ⌊1/ε⌋` plus `T` itself (folded to 0).
pub fn shift_options(interval: u64, eps: &BigRational) -> (Vec<u64>, bool) {
    let t = int(interval);
    let large = &t * eps > BigRational::one();
    let mut set: Vec<u64> = if large {
        let steps = ratio::floor(&(BigRational::one() / eps))
            .to_u64()
            .expect("1/eps is small when T*eps > 1");
        (1..=steps)
            .map(|j| {
                ratio::floor(&(int(j) * eps * &t))
                    .to_u64()
                    .expect("below T")
                    % interval
            })
            .chain(std::iter::once(0))
            .collect()
    } else {
        (0..interval).collect()
    };
    set.sort_unstable();
    set.dedup();
    (set, large)
}

pub fn build_discretization(instance: &Instance, eps: &BigRational) -> Result<DiscretizationSet> {
    ratio::check_eps(eps, true)?;
    if instance.mode() != Mode::Discrete {
        return Err(Error::input("discretization requires a discrete instance"));
    }
    let (sets, large) = instance
        .items()
        .iter()
        .map(|it| shift_options(it.interval, eps))
        .unzip();
    Ok(DiscretizationSet { sets, large })
}

/// `(1+ε)^j · H_Σ/2` for `j = 0 ..= ⌈log_{1+ε} 2⌉ + 1`.
pub fn opt_estimate_grid(instance: &Instance, eps: &BigRational) -> Result<Vec<Level>> {
    ratio::check_eps(eps, true)?;
    let step = BigRational::one() + eps;
    let mut power = BigRational::one();
    let mut steps_to_two = 0;
    while power < int(2) {
        power *= &step;
        steps_to_two += 1;
    }
    let base = frac(instance.total_quantity(), 2u32);
    let mut grid = Vec::with_capacity(steps_to_two + 2);
    let mut value = base;
    for _ in 0..steps_to_two + 2 {
        grid.push(value.clone());
        value *= &step;
    }
    Ok(grid)
}

/// `δ = ε³ / (36 ln 2Λ)`, for display; heaviness itself is decided exactly.
pub fn heavy_fraction(lambda: &BigUint, eps: &BigRational) -> f64 {
    let e = ratio::approx(eps);
    e * e * e / (36.0 * arith::ln_approx(&(lambda * 2u32)))
}

/// `H_i >= δ H_Σ`, i.e. `ln 2Λ >= ε³ H_Σ / (36 H_i)`, decided exactly.
pub fn is_heavy(quantity: u64, total: u128, lambda: &BigUint, eps: &BigRational) -> bool {
    let threshold = eps * eps * eps * frac(total, 36u32) / int(quantity);
    arith::cmp_ln(&(lambda * 2u32), &threshold) != Ordering::Less
}

/// Heavy items and how they were chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct HeavySelection {
    pub delta: f64,
    /// Ascending item ids.
    pub items: Vec<usize>,
    /// The guess product exceeded the budget and heavy items were capped to
    /// the `⌈1/ε⌉` largest quantities.
    pub capped: bool,
    /// An explicit limit demoted some heavy items to light.
    pub limited: bool,
}

fn largest(instance: &Instance, ids: &[usize], keep: usize) -> Vec<usize> {
    let mut sorted = ids.to_vec();
    sorted.sort_by_key(|&i| (std::cmp::Reverse(instance.item(i).quantity), i));
    sorted.truncate(keep);
    sorted.sort_unstable();
    sorted
}

fn guess_product(disc: &DiscretizationSet, ids: &[usize]) -> BigUint {
    ids.iter().map(|&i| BigUint::from(disc.set(i).len())).product()
}

pub fn select_heavy(
    instance: &Instance,
    disc: &DiscretizationSet,
    eps: &BigRational,
    limit: Option<usize>,
    config: &SolverConfig,
) -> Result<HeavySelection> {
    let lambda = cycle_length(instance).into_inner();
    let total = instance.total_quantity();
    let mut items: Vec<usize> = (0..instance.len())
        .filter(|&i| is_heavy(instance.item(i).quantity, total, &lambda, eps))
        .collect();
    let mut limited = false;
    if let Some(k) = limit {
        if items.len() > k {
            items = largest(instance, &items, k);
            limited = true;
        }
    }
    let mut capped = false;
    if guess_product(disc, &items) > BigUint::from(config.guess_budget) {
        let keep = ratio::ceil(&(BigRational::one() / eps)).to_usize().unwrap_or(usize::MAX);
        items = largest(instance, &items, keep);
        capped = true;
        let product = guess_product(disc, &items);
        if product > BigUint::from(config.guess_budget) {
            return Err(Error::budget("heavy guess count", product, config.guess_budget));
        }
    }
    Ok(HeavySelection {
        delta: heavy_fraction(&lambda, eps),
        items,
        capped,
        limited,
    })
}

/// One guess: a peak estimate and a shift for every heavy item.
#[derive(Debug, Clone, PartialEq)]
pub struct GuessState {
    pub opt_estimate: BigRational,
    pub heavy_items: Vec<usize>,
    /// Parallel to `heavy_items`.
    pub heavy_shifts: Vec<u64>,
    pub delta: f64,
}

impl GuessState {
    pub fn pins(&self) -> Vec<(usize, u64)> {
        self.heavy_items.iter().copied().zip(self.heavy_shifts.iter().copied()).collect()
    }
}

/// Lazy cartesian product of the heavy items' shift sets, in lexicographic order.
pub struct HeavyGuesses<'a> {
    disc: &'a DiscretizationSet,
    template: GuessState,
    odometer: Option<Vec<usize>>,
}

impl Iterator for HeavyGuesses<'_> {
    type Item = GuessState;

    fn next(&mut self) -> Option<GuessState> {
        let digits = self.odometer.as_mut()?;
        let items = &self.template.heavy_items;
        let mut state = self.template.clone();
        state.heavy_shifts = items
            .iter()
            .zip(digits.iter())
            .map(|(&i, &d)| self.disc.set(i)[d])
            .collect();
        // advance, last item fastest
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                self.odometer = None;
                break;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < self.disc.set(items[pos]).len() {
                break;
            }
            digits[pos] = 0;
        }
        Some(state)
    }
}

pub fn enumerate_heavy_guesses<'a>(
    disc: &'a DiscretizationSet,
    template: &GuessState,
    config: &SolverConfig,
) -> Result<HeavyGuesses<'a>> {
    let count = guess_product(disc, &template.heavy_items);
    if count > BigUint::from(config.guess_budget) {
        return Err(Error::budget("heavy guess count", count, config.guess_budget));
    }
    Ok(HeavyGuesses {
        disc,
        template: template.clone(),
        odometer: Some(vec![0; template.heavy_items.len()]),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpRoundingOptions {
    pub seed: u64,
    pub repeats: u32,
    /// Keep at most this many heavy items (largest quantities first).
    pub heavy_limit: Option<usize>,
}

impl Default for LpRoundingOptions {
    fn default() -> Self {
        LpRoundingOptions {
            seed: 0,
            repeats: 7,
            heavy_limit: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuessLog {
    pub opt_index: usize,
    pub heavy_shifts: Vec<u64>,
    pub status: LpStatus,
}

#[derive(Debug, Clone)]
pub struct LpRoundingOutcome {
    pub shifts: ShiftVector,
    pub peak: PeakResult,
    pub grid: Vec<Level>,
    pub heavy: HeavySelection,
    pub heavy_assignments: u64,
    pub lp_feasible: u64,
    pub lp_infeasible: u64,
    pub candidates: u64,
    pub log: Vec<GuessLog>,
}

struct TaskResult {
    best: Option<(Level, Vec<u64>)>,
    log: Vec<GuessLog>,
    candidates: u64,
}

#[derive(Default)]
struct PeakCache(HashMap<Vec<u64>, Level>);

impl PeakCache {
    fn peak(&mut self, instance: &Instance, shifts: &[u64], config: &SolverConfig) -> Result<Level> {
        if let Some(v) = self.0.get(shifts) {
            return Ok(v.clone());
        }
        let vector = ShiftVector::from_integers(instance, shifts)?;
        let v = peak_scan(instance, &vector, config)?.value;
        self.0.insert(shifts.to_vec(), v.clone());
        Ok(v)
    }
}

fn keep_better(best: &mut Option<(Level, Vec<u64>)>, value: Level, shifts: Vec<u64>) {
    let better = match best {
        None => true,
        Some((bv, bs)) => (&value, &shifts) < (&*bv, &*bs),
    };
    if better {
        *best = Some((value, shifts));
    }
}

#[allow(clippy::too_many_arguments)]
fn run_assignment(
    instance: &Instance,
    disc: &DiscretizationSet,
    grid: &[Level],
    guess: &GuessState,
    assignment_index: u64,
    options: &LpRoundingOptions,
    config: &SolverConfig,
) -> Result<TaskResult> {
    let mut cache = PeakCache::default();
    let mut out = TaskResult {
        best: None,
        log: Vec::new(),
        candidates: 0,
    };
    let fully_pinned = guess.heavy_items.len() == instance.len();
    let pinned_vector = || -> Vec<u64> {
        let mut v = vec![0; instance.len()];
        for (i, s) in guess.pins() {
            v[i] = s;
        }
        v
    };
    let root = RngStream::new(options.seed);
    for (j, opt) in grid.iter().enumerate() {
        let guess_index = assignment_index * grid.len() as u64 + j as u64;
        if fully_pinned {
            // every variable is pinned: the LP holds exactly when the pinned vector's peak fits
            let shifts = pinned_vector();
            let peak = cache.peak(instance, &shifts, config)?;
            let feasible = peak <= *opt;
            out.log.push(GuessLog {
                opt_index: j,
                heavy_shifts: guess.heavy_shifts.clone(),
                status: if feasible { LpStatus::Feasible } else { LpStatus::Infeasible },
            });
            if feasible {
                out.candidates += 1;
                keep_better(&mut out.best, peak, shifts);
                // larger estimates admit the same single vector
                break;
            }
            continue;
        }
        let lp = build_lp(instance, disc, opt, &guess.pins(), config)?;
        let status = match solve_lp(&lp, config)? {
            LpOutcome::Infeasible => LpStatus::Infeasible,
            LpOutcome::Feasible(solution) => {
                let mut rng = root.substream(guess_index);
                for _ in 0..options.repeats.max(1) {
                    let vector = round_solution(instance, &lp, &solution, &mut rng)?;
                    let shifts = vector.integers().expect("discrete shifts");
                    let peak = cache.peak(instance, &shifts, config)?;
                    out.candidates += 1;
                    keep_better(&mut out.best, peak, shifts);
                }
                LpStatus::Feasible
            }
        };
        out.log.push(GuessLog {
            opt_index: j,
            heavy_shifts: guess.heavy_shifts.clone(),
            status,
        });
    }
    Ok(out)
}

/// Runs every (peak estimate × heavy assignment) guess and returns the best rounded vector.
///
/// Deterministic for a given seed, independent of `config.jobs`.
pub fn lp_rounding_solve(
    instance: &Instance,
    eps: &BigRational,
    options: &LpRoundingOptions,
    config: &SolverConfig,
) -> Result<LpRoundingOutcome> {
    let disc = build_discretization(instance, eps)?;
    // fail early on the cycle length rather than once per guess
    crate::peak::bounded_cycle(instance, config.scan_budget)?;
    let grid = opt_estimate_grid(instance, eps)?;
    let heavy = select_heavy(instance, &disc, eps, options.heavy_limit, config)?;
    let template = GuessState {
        opt_estimate: grid[0].clone(),
        heavy_items: heavy.items.clone(),
        heavy_shifts: Vec::new(),
        delta: heavy.delta,
    };
    let assignments: Vec<GuessState> = enumerate_heavy_guesses(&disc, &template, config)?.collect();
    let results: Vec<Result<TaskResult>> = config.install(|| {
        assignments
            .par_iter()
            .enumerate()
            .map(|(a, guess)| run_assignment(instance, &disc, &grid, guess, a as u64, options, config))
            .collect()
    });
    let mut best = None;
    let mut log = Vec::new();
    let mut candidates = 0;
    for r in results {
        let r = r?;
        candidates += r.candidates;
        log.extend(r.log);
        if let Some((v, s)) = r.best {
            keep_better(&mut best, v, s);
        }
    }
    let (_, shifts) = best.ok_or_else(|| Error::Solver("no guess produced a feasible LP".into()))?;
    let shifts = ShiftVector::from_integers(instance, &shifts)?;
    let peak = peak_scan(instance, &shifts, config)?;
    let lp_feasible = log.iter().filter(|g| g.status == LpStatus::Feasible).count() as u64;
    Ok(LpRoundingOutcome {
        shifts,
        peak,
        grid,
        heavy,
        heavy_assignments: assignments.len() as u64,
        lp_infeasible: log.len() as u64 - lp_feasible,
        lp_feasible,
        candidates,
        log,
    })
}
