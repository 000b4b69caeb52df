//! Makespan minimization on related machines, as used to split one interval class.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ratio;

/// A job-to-machine assignment and its makespan `max_j load_j / speed_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub machine_of: Vec<usize>,
    pub makespan: BigRational,
}

struct Machines {
    /// Speeds over a common denominator.
    speed: Vec<u128>,
    /// Largest admissible load, `⌊(1+ε) · speed⌋` in job units.
    cap: Vec<u128>,
}

/// `a / b < c / d` for nonnegative loads over positive speeds.
fn ratio_lt(a: u128, b: u128, c: u128, d: u128) -> bool {
    a * d < c * b
}

impl Machines {
    fn new(speeds: &[BigRational], eps: &BigRational) -> Result<Self> {
        let denom = speeds.iter().fold(BigInt::from(1), |acc, s| acc.lcm(s.denom()));
        let scaled = |s: &BigRational| -> Result<u128> {
            (s * BigRational::from_integer(denom.clone()))
                .to_integer()
                .to_u64()
                .map(u128::from)
                .ok_or_else(|| Error::input("machine speed is negative or too large"))
        };
        let speed = speeds.iter().map(scaled).collect::<Result<Vec<_>>>()?;
        let cap = speeds
            .iter()
            .map(|s| {
                ratio::floor(&(s * (ratio::int(1) + eps)))
                    .to_u128()
                    .ok_or_else(|| Error::input("machine capacity is negative or too large"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Machines { speed, cap })
    }

    fn makespan(&self, loads: &[u128], original: &[BigRational]) -> BigRational {
        loads
            .iter()
            .zip(original)
            .filter(|(&l, _)| l > 0)
            .map(|(&l, s)| BigRational::from_integer(BigInt::from(l)) / s)
            .max()
            .unwrap_or_else(BigRational::zero)
    }
}

/// Job order: largest first, ties by index.
fn job_order(jobs: &[u64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by_key(|&j| (std::cmp::Reverse(jobs[j]), j));
    order
}

struct Search<'a> {
    jobs: &'a [u64],
    order: Vec<usize>,
    machines: &'a Machines,
    loads: Vec<u128>,
    current: Vec<usize>,
    /// Best makespan so far as (load, speed) of its bottleneck machine.
    best: Option<((u128, u128), Vec<usize>)>,
}

impl Search<'_> {
    fn bottleneck(&self) -> (u128, u128) {
        let mut worst = (0u128, 1u128);
        for (j, &l) in self.loads.iter().enumerate() {
            if l > 0 && ratio_lt(worst.0, worst.1, l, self.machines.speed[j]) {
                worst = (l, self.machines.speed[j]);
            }
        }
        worst
    }

    fn run(&mut self, depth: usize) {
        if depth == self.order.len() {
            let here = self.bottleneck();
            let better = match &self.best {
                None => true,
                Some((b, _)) => ratio_lt(here.0, here.1, b.0, b.1),
            };
            if better {
                self.best = Some((here, self.current.clone()));
            }
            return;
        }
        let job = self.order[depth];
        let size = self.jobs[job] as u128;
        let m = self.machines.speed.len();
        for machine in 0..m {
            let speed = self.machines.speed[machine];
            if speed == 0 || self.loads[machine] + size > self.machines.cap[machine] {
                continue;
            }
            // machines identical in speed, capacity and load give mirror subtrees
            if (0..machine).any(|other| {
                self.machines.speed[other] == speed
                    && self.machines.cap[other] == self.machines.cap[machine]
                    && self.loads[other] == self.loads[machine]
            }) {
                continue;
            }
            let new_load = self.loads[machine] + size;
            if let Some((b, _)) = &self.best {
                if !ratio_lt(new_load, speed, b.0, b.1) {
                    continue;
                }
            }
            self.loads[machine] = new_load;
            self.current[job] = machine;
            self.run(depth + 1);
            self.loads[machine] -= size;
        }
    }
}

/// Exact minimum makespan among assignments that respect every `(1+ε)` capacity.
fn exact(jobs: &[u64], machines: &Machines) -> Option<Vec<usize>> {
    let mut search = Search {
        jobs,
        order: job_order(jobs),
        machines,
        loads: vec![0; machines.speed.len()],
        current: vec![0; jobs.len()],
        best: None,
    };
    search.run(0);
    search.best.map(|(_, a)| a)
}

/// Largest job first onto the machine that would finish it earliest.
fn lpt(jobs: &[u64], machines: &Machines) -> Option<Vec<usize>> {
    let mut loads = vec![0u128; machines.speed.len()];
    let mut out = vec![0; jobs.len()];
    for j in job_order(jobs) {
        let size = jobs[j] as u128;
        let mut pick: Option<usize> = None;
        for (m, &speed) in machines.speed.iter().enumerate() {
            if speed == 0 {
                continue;
            }
            let better = match pick {
                None => true,
                Some(p) => ratio_lt(loads[m] + size, speed, loads[p] + size, machines.speed[p]),
            };
            if better {
                pick = Some(m);
            }
        }
        let m = pick?;
        loads[m] += size;
        if loads[m] > machines.cap[m] {
            return None;
        }
        out[j] = m;
    }
    Some(out)
}

/// Assigns jobs (quantities) to machines (quantity guesses) so that every
/// machine's load stays within `(1+ε)` times its speed.
///
/// Up to `exact_limit` jobs the assignment minimizes the makespan exactly;
/// beyond that, largest-first greedy placement is verified against the same
/// capacities. `None` means no admissible assignment was found, which rejects
/// the guess. Machines of speed zero receive no jobs.
pub fn balance_partition(
    jobs: &[u64],
    speeds: &[BigRational],
    eps: &BigRational,
    exact_limit: usize,
) -> Result<Option<Assignment>> {
    if speeds.is_empty() {
        return Err(Error::input("no machines to balance onto"));
    }
    if speeds.iter().any(|s| !ratio::is_nonnegative(s)) {
        return Err(Error::input("machine speeds must be nonnegative"));
    }
    let machines = Machines::new(speeds, eps)?;
    let found = if jobs.len() <= exact_limit {
        exact(jobs, &machines)
    } else {
        lpt(jobs, &machines)
    };
    Ok(found.map(|machine_of| {
        let mut loads = vec![0u128; speeds.len()];
        for (j, &m) in machine_of.iter().enumerate() {
            loads[m] += jobs[j] as u128;
        }
        Assignment {
            makespan: machines.makespan(&loads, speeds),
            machine_of,
        }
    }))
}
