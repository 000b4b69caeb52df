//! The feasibility LP over discretized shifts, its solution and randomized rounding.

use std::time::Instant;

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, SolveOutcome};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rand::Rng;

use super::DiscretizationSet;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::model::{Instance, ShiftVector};
use crate::peak::bounded_cycle;
use crate::ratio;
use crate::rng::RngStream;

/// Additive tolerance, on rows normalized to a right-hand side of 1.
pub const LP_TOLERANCE: f64 = 1e-9;

/// Variables `x[i][k]` choose shift `blocks[i][k]` for item `i`.
///
/// Rows: for every integer `t` in one cycle, `Σ I_i(blocks[i][k], t) x[i][k] <= budget`;
/// every block sums to 1; pinned items have their pinned variable fixed to 1.
#[derive(Debug, Clone)]
pub struct FeasibilityLp {
    intervals: Vec<u64>,
    quantities: Vec<u64>,
    lambda: u64,
    blocks: Vec<Vec<u64>>,
    pins: Vec<Option<usize>>,
    opt_estimate: BigRational,
}

impl FeasibilityLp {
    pub fn time_rows(&self) -> u64 {
        self.lambda
    }

    pub fn assignment_rows(&self) -> usize {
        self.blocks.len()
    }

    pub fn pin_rows(&self) -> usize {
        self.pins.iter().flatten().count()
    }

    pub fn blocks(&self) -> &[Vec<u64>] {
        &self.blocks
    }

    pub fn pins(&self) -> &[Option<usize>] {
        &self.pins
    }

    pub fn opt_estimate(&self) -> &BigRational {
        &self.opt_estimate
    }

    /// `Λ · I_i(shift, t)`, an integer.
    fn scaled_coefficient(&self, t: u64, i: usize, shift: u64) -> u128 {
        let period = self.intervals[i];
        let phase = (t % period + period - shift % period) % period;
        (self.lambda / period) as u128 * self.quantities[i] as u128 * (period - phase) as u128
    }

    /// The exact coefficient of `x[i][k]` in the row of time `t`.
    pub fn coefficient(&self, t: u64, i: usize, k: usize) -> BigRational {
        BigRational::new(
            BigInt::from(self.scaled_coefficient(t, i, self.blocks[i][k])),
            BigInt::from(self.lambda),
        )
    }

    /// Exact check of every row for a rational assignment.
    pub fn satisfied_by(&self, x: &[Vec<BigRational>]) -> bool {
        if x.len() != self.blocks.len() {
            return false;
        }
        for (i, block) in x.iter().enumerate() {
            if block.len() != self.blocks[i].len() || block.iter().any(|v| !ratio::is_nonnegative(v)) {
                return false;
            }
            if block.iter().sum::<BigRational>() != ratio::int(1) {
                return false;
            }
            if let Some(k) = self.pins[i] {
                if block[k] != ratio::int(1) {
                    return false;
                }
            }
        }
        (0..self.lambda).all(|t| {
            let lhs: BigRational = (0..x.len())
                .flat_map(|i| (0..x[i].len()).map(move |k| (i, k)))
                .map(|(i, k)| self.coefficient(t, i, k) * &x[i][k])
                .sum();
            lhs <= self.opt_estimate
        })
    }
}

/// Builds the LP for one guess of the peak and of the pinned (heavy) shifts.
pub fn build_lp(
    instance: &Instance,
    disc: &DiscretizationSet,
    opt_estimate: &BigRational,
    pinned: &[(usize, u64)],
    config: &SolverConfig,
) -> Result<FeasibilityLp> {
    if disc.sets().len() != instance.len() {
        return Err(Error::input("discretization does not match the instance"));
    }
    let lambda = bounded_cycle(instance, config.scan_budget)?;
    let blocks = disc.sets().to_vec();
    let mut pins = vec![None; instance.len()];
    for &(i, shift) in pinned {
        let k = blocks
            .get(i)
            .and_then(|b| b.iter().position(|&s| s == shift))
            .ok_or_else(|| Error::input(format!("pinned shift {shift} of item {i} is outside its set")))?;
        pins[i] = Some(k);
    }
    Ok(FeasibilityLp {
        intervals: instance.intervals(),
        quantities: instance.quantities(),
        lambda,
        blocks,
        pins,
        opt_estimate: opt_estimate.clone(),
    })
}

/// A block-stochastic assignment: `x[i]` is a distribution over item `i`'s shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    pub x: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Feasible(FractionalSolution),
    Infeasible,
}

/// Solves the LP.
///
/// Pinned items are folded into the right-hand sides and rows that coincide
/// once only free items remain are merged, keeping the tightest bound. An LP
/// with no free items is decided exactly without a solver.
pub fn solve_lp(lp: &FeasibilityLp, config: &SolverConfig) -> Result<LpOutcome> {
    let n = lp.blocks.len();
    let free: Vec<usize> = (0..n).filter(|&i| lp.pins[i].is_none()).collect();
    let pinned_shift = |i: usize| lp.blocks[i][lp.pins[i].expect("pinned")];
    // exact right-hand side, scaled by Λ and by the estimate's denominator
    let denom = lp.opt_estimate.denom().clone();
    let budget = lp.opt_estimate.numer() * BigInt::from(lp.lambda);

    let period = free
        .iter()
        .fold(1u64, |acc, &i| acc.lcm(&lp.intervals[i]));
    let mut pinned_max = vec![0u128; period as usize];
    for t in 0..lp.lambda {
        let load: u128 = (0..n)
            .filter(|&i| lp.pins[i].is_some())
            .map(|i| lp.scaled_coefficient(t, i, pinned_shift(i)))
            .sum();
        let slot = &mut pinned_max[(t % period) as usize];
        *slot = (*slot).max(load);
    }

    let one_hot = |i: usize| -> Vec<f64> {
        let mut v = vec![0.0; lp.blocks[i].len()];
        if let Some(k) = lp.pins[i] {
            v[k] = 1.0;
        }
        v
    };

    if free.is_empty() {
        let worst = BigInt::from(pinned_max[0]) * &denom;
        return Ok(if worst <= budget {
            LpOutcome::Feasible(FractionalSolution {
                x: (0..n).map(one_hot).collect(),
            })
        } else {
            LpOutcome::Infeasible
        });
    }

    let scale = ratio::approx(&lp.opt_estimate) * lp.lambda as f64;
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    problem.set_time_limit(config.lp_time_limit);
    let vars: Vec<Vec<microlp::Variable>> = free
        .iter()
        .map(|&i| (0..lp.blocks[i].len()).map(|_| problem.add_var(0.0, (0.0, 1.0))).collect())
        .collect();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(period as usize);
    for u in 0..period {
        let rhs_exact = BigRational::new(
            &budget - BigInt::from(pinned_max[u as usize]) * &denom,
            denom.clone(),
        );
        let rhs = ratio::approx(&rhs_exact) / scale;
        let coeffs: Vec<f64> = free
            .iter()
            .flat_map(|&i| lp.blocks[i].iter().map(move |&s| (i, s)))
            .map(|(i, s)| lp.scaled_coefficient(u, i, s) as f64 / scale)
            .collect();
        let mut expr = LinearExpr::empty();
        for (var, &c) in vars.iter().flatten().zip(&coeffs) {
            expr.add(*var, c);
        }
        problem.add_constraint(expr, ComparisonOp::Le, rhs);
        rows.push((coeffs, rhs));
    }
    for block in &vars {
        let mut expr = LinearExpr::empty();
        for v in block {
            expr.add(*v, 1.0);
        }
        problem.add_constraint(expr, ComparisonOp::Eq, 1.0);
    }

    let started = Instant::now();
    let solution = match problem.solve() {
        Ok(SolveOutcome::Solution(s)) => s,
        Ok(SolveOutcome::Interrupted(_)) => {
            return Err(Error::budget(
                "lp solve time",
                format!("{:.3}s", started.elapsed().as_secs_f64()),
                format!("{:.3}s", config.lp_time_limit.as_secs_f64()),
            ))
        }
        Err(microlp::Error::Infeasible) => return Ok(LpOutcome::Infeasible),
        Err(e) => return Err(Error::Solver(e.to_string())),
    };
    let values: Vec<f64> = vars.iter().flatten().map(|v| solution.var_value_raw(*v)).collect();

    for (coeffs, rhs) in &rows {
        let lhs: f64 = coeffs.iter().zip(&values).map(|(c, x)| c * x).sum();
        if lhs > rhs + LP_TOLERANCE {
            return Err(Error::Solver(format!(
                "returned point violates a time row by {:e}",
                lhs - rhs
            )));
        }
    }
    let mut x: Vec<Vec<f64>> = (0..n).map(one_hot).collect();
    let mut offset = 0;
    for &i in &free {
        let len = lp.blocks[i].len();
        let block: Vec<f64> = values[offset..offset + len].to_vec();
        offset += len;
        let sum: f64 = block.iter().sum();
        if block.iter().any(|&v| v < -LP_TOLERANCE) || (sum - 1.0).abs() > LP_TOLERANCE {
            return Err(Error::Solver(format!("returned block for item {i} is not a distribution")));
        }
        let clamped: Vec<f64> = block.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        x[i] = clamped.iter().map(|v| v / total).collect();
    }
    Ok(LpOutcome::Feasible(FractionalSolution { x }))
}

/// Independent categorical draw per item; pinned items keep their pin.
pub fn round_solution(
    instance: &Instance,
    lp: &FeasibilityLp,
    solution: &FractionalSolution,
    rng: &mut RngStream,
) -> Result<ShiftVector> {
    let mut shifts = Vec::with_capacity(lp.blocks.len());
    for (i, block) in lp.blocks.iter().enumerate() {
        let k = match lp.pins[i] {
            Some(k) => k,
            None => {
                let u: f64 = rng.gen();
                let probs = &solution.x[i];
                let mut acc = 0.0;
                let mut pick = None;
                for (k, &p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        pick = Some(k);
                        break;
                    }
                }
                // rounding slack: fall back to the last shift with positive mass
                pick.unwrap_or_else(|| probs.iter().rposition(|&p| p > 0.0).unwrap_or(0))
            }
        };
        shifts.push(block[k]);
    }
    ShiftVector::from_integers(instance, &shifts)
}

/// `x[i][k] = 1` exactly where `shifts` picks `blocks[i][k]`.
pub fn indicator_of(lp: &FeasibilityLp, shifts: &[u64]) -> Option<Vec<Vec<BigRational>>> {
    lp.blocks
        .iter()
        .zip(shifts)
        .map(|(block, s)| {
            let k = block.iter().position(|b| b == s)?;
            Some(
                (0..block.len())
                    .map(|j| ratio::int(u32::from(j == k)))
                    .collect(),
            )
        })
        .collect()
}
