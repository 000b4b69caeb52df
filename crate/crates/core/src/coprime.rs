//! Scheme for continuous instances with pairwise coprime intervals.
//!
//! Intervals are binned between consecutive terms of a power tower of 4. One
//! light bin splits the items into a small-interval part, solved by the
//! interval scheme after scaling, and a large-interval part whose intervals
//! are so long that any shifts are near-optimal.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::arith::{crt_solve, pairwise_coprime};
use crate::bounds::average_space_bound;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::interval_ptas::interval_ptas_solve;
use crate::model::{total_level, Instance, Level, Mode, ShiftVector};
use crate::peak::{peak_events, scale_intervals, PeakResult};
use crate::ratio::{self, int};

/// Terms wider than this many bits are not materialized.
pub const PSI_BIT_LIMIT: u64 = 4096;

/// One term of the tower; `Beyond` exceeds every representable interval.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Psi {
    Value(BigUint),
    Beyond,
}

impl Psi {
    /// `t < Ψ`.
    fn exceeds(&self, t: u64) -> bool {
        match self {
            Psi::Value(v) => BigUint::from(t) < *v,
            Psi::Beyond => true,
        }
    }
}

impl std::fmt::Display for Psi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Psi::Value(v) => write!(f, "{v}"),
            Psi::Beyond => write!(f, "beyond"),
        }
    }
}

/// `k = ⌈1/ε⌉` for `ε` in `(0, 1]`.
fn inverse(eps: &BigRational) -> Result<u64> {
    ratio::check_eps(eps, true)?;
    ratio::ceil(&(BigRational::one() / eps))
        .to_u64()
        .ok_or_else(|| Error::input("1/ε is too large"))
}

/// `Ψ_0 = 1`, `Ψ_1 = k`, `Ψ_m = 4^{Ψ_{m-1}}`, for `m = 0 ..= upto`.
pub fn psi_sequence(eps: &BigRational, upto: usize) -> Result<Vec<Psi>> {
    let k = inverse(eps)?;
    let mut out = vec![Psi::Value(BigUint::one())];
    if upto >= 1 {
        out.push(Psi::Value(BigUint::from(k)));
    }
    while out.len() <= upto {
        let next = match out.last().expect("nonempty") {
            Psi::Value(prev) => match prev.to_u64() {
                // 4^prev has 2·prev + 1 bits
                Some(p) if p <= (PSI_BIT_LIMIT - 1) / 2 => Psi::Value(BigUint::one() << (2 * p)),
                _ => Psi::Beyond,
            },
            Psi::Beyond => Psi::Beyond,
        };
        out.push(next);
    }
    Ok(out)
}

fn require_coprime(instance: &Instance) -> Result<()> {
    pairwise_coprime(&instance.intervals()).map_err(|(i, j)| {
        Error::input(format!(
            "intervals {} (item {i}) and {} (item {j}) are not coprime",
            instance.item(i).interval,
            instance.item(j).interval
        ))
    })
}

/// Items binned by `T ∈ [Ψ_{m-1}, Ψ_m)`, split around a light bin `m̂`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsiDecomposition {
    /// `Ψ_0 ..= Ψ_{k+1}`.
    psi: Vec<Psi>,
    m_hat: usize,
    bins: Vec<usize>,
    lower: Vec<usize>,
    middle: Vec<usize>,
    upper: Vec<usize>,
    k: u64,
}

impl PsiDecomposition {
    pub fn psi(&self) -> &[Psi] {
        &self.psi
    }

    pub fn m_hat(&self) -> usize {
        self.m_hat
    }

    /// Bin `m` of every item.
    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    /// Items in bins before `m̂`.
    pub fn lower(&self) -> &[usize] {
        &self.lower
    }

    pub fn middle(&self) -> &[usize] {
        &self.middle
    }

    /// Items in bins after `m̂`.
    pub fn upper(&self) -> &[usize] {
        &self.upper
    }

    pub fn effective_eps(&self) -> BigRational {
        ratio::frac(1, self.k)
    }

    /// Item count per bin `1 ..= k+1`, then everything beyond.
    pub fn bin_sizes(&self) -> Vec<usize> {
        let top = self.psi.len();
        (1..=top).map(|m| self.bins.iter().filter(|&&b| b == m).count()).collect()
    }

    /// `LCM(lower) <= ε' · min(upper)`; vacuous when either side is empty.
    pub fn shortness_holds(&self, instance: &Instance) -> bool {
        let Some(lo) = self.upper.iter().map(|&i| instance.item(i).interval).min() else {
            return true;
        };
        if self.lower.is_empty() {
            return true;
        }
        let lcm = crate::arith::lcm_all(self.lower.iter().map(|&i| instance.item(i).interval));
        lcm * BigUint::from(self.k) <= BigUint::from(lo)
    }
}

/// Bins items and picks the smallest `m̂ ∈ [2, k+1]` with `H(S_m̂) <= H_Σ / k`.
pub fn coprime_decompose(instance: &Instance, eps: &BigRational) -> Result<PsiDecomposition> {
    if instance.mode() != Mode::Continuous {
        return Err(Error::input("the coprime scheme expects a continuous instance"));
    }
    require_coprime(instance)?;
    let k = inverse(eps)?;
    let top = k as usize + 1;
    let psi = psi_sequence(eps, top)?;
    // items past Ψ_{k+1} go to bin k+2, which is never chosen
    let bins: Vec<usize> = instance
        .intervals()
        .iter()
        .map(|&t| (1..=top).find(|&m| psi[m].exceeds(t)).unwrap_or(top + 1))
        .collect();
    let total = instance.total_quantity();
    let weight = |m: usize| -> u128 {
        (0..instance.len())
            .filter(|&i| bins[i] == m)
            .map(|i| instance.item(i).quantity as u128)
            .sum()
    };
    let m_hat = (2..=top)
        .find(|&m| weight(m) * k as u128 <= total)
        .expect("k disjoint bins cannot all exceed a 1/k share");
    let pick = |f: &dyn Fn(usize) -> bool| (0..instance.len()).filter(|&i| f(bins[i])).collect::<Vec<_>>();
    Ok(PsiDecomposition {
        lower: pick(&|b| b < m_hat),
        middle: pick(&|b| b == m_hat),
        upper: pick(&|b| b > m_hat),
        psi,
        m_hat,
        bins,
        k,
    })
}

/// A time at which every item's level is nearly full.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub t: BigUint,
    pub level: Level,
}

/// Solves `t ≡ ⌈τ_i⌉ (mod T_i)`; every item ordered within one time unit before `t`.
pub fn coprime_lb_witness(instance: &Instance, shifts: &ShiftVector) -> Result<Witness> {
    require_coprime(instance)?;
    if shifts.len() != instance.len() {
        return Err(Error::input("shift vector does not match the instance"));
    }
    let congruences: Vec<(BigUint, BigUint)> = shifts
        .as_slice()
        .iter()
        .zip(instance.items())
        .map(|(tau, item)| {
            let up = ratio::ceil(tau).to_biguint().expect("shifts are folded to be nonnegative");
            (up, BigUint::from(item.interval))
        })
        .collect();
    let t = crt_solve(&congruences)?;
    let level = total_level(instance, shifts, &ratio::from_biguint(&t))?;
    Ok(Witness { t, level })
}

/// `max(H_Σ/2, (1 - 1/T_min) H_Σ)`, a lower bound on every peak.
pub fn coprime_lower_bound(instance: &Instance) -> Level {
    let hs = int(instance.total_quantity());
    let t_min = instance.min_interval();
    let witness = (int(1) - ratio::frac(1, t_min)) * hs;
    witness.max(average_space_bound(&instance.with_mode(Mode::Continuous)))
}

#[derive(Debug, Clone)]
pub struct CoprimeOutcome {
    pub shifts: ShiftVector,
    pub peak: PeakResult,
    pub decomposition: PsiDecomposition,
    pub witness: Witness,
    pub lower_bound: Level,
}

/// Solves the small-interval part on its scaled discrete copy; everything
/// else gets zero shifts.
pub fn coprime_solve(instance: &Instance, eps: &BigRational, config: &SolverConfig) -> Result<CoprimeOutcome> {
    ratio::check_eps(eps, false)?;
    let decomposition = coprime_decompose(instance, eps)?;
    let k = decomposition.k;
    let eff = decomposition.effective_eps();
    let mut shifts = vec![BigRational::from_integer(0.into()); instance.len()];
    if !decomposition.lower.is_empty() {
        let part = instance.restrict(&decomposition.lower)?;
        let scaled = scale_intervals(&part, k)?;
        let out = interval_ptas_solve(&scaled, &eff, config)?;
        for (pos, &i) in decomposition.lower.iter().enumerate() {
            shifts[i] = &out.shifts.as_slice()[pos] / int(k);
        }
    }
    let shifts = ShiftVector::new(instance, shifts)?;
    let peak = peak_events(instance, &shifts, config)?;
    let witness = coprime_lb_witness(instance, &shifts)?;
    Ok(CoprimeOutcome {
        shifts,
        peak,
        decomposition,
        witness,
        lower_bound: coprime_lower_bound(instance),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::frac;

    fn cont(items: &[(u64, u64)]) -> Instance {
        Instance::continuous(items).unwrap()
    }

    fn value(v: u64) -> Psi {
        Psi::Value(BigUint::from(v))
    }

    #[test]
    fn tower_examples() {
        assert_eq!(
            psi_sequence(&frac(1, 2), 3).unwrap(),
            vec![value(1), value(2), value(16), value(4294967296)]
        );
        assert_eq!(psi_sequence(&int(1), 2).unwrap(), vec![value(1), value(1), value(4)]);
        let long = psi_sequence(&frac(1, 3), 5).unwrap();
        assert_eq!(long[3], Psi::Value(BigUint::one() << 128));
        assert_eq!(long[4], Psi::Beyond);
        assert!(long.windows(2).skip(1).all(|w| w[0] < w[1] || w[1] == Psi::Beyond));
    }

    #[test]
    fn decomposition_example() {
        let d = coprime_decompose(&cont(&[(3, 1), (5, 1)]), &frac(1, 2)).unwrap();
        assert_eq!(d.bins(), &[2, 2]);
        // bin 2 holds everything, so the first light bin is 3
        assert_eq!(d.m_hat(), 3);
        assert_eq!(d.lower(), &[0, 1]);
        assert!(d.middle().is_empty() && d.upper().is_empty());
    }

    #[test]
    fn coprimality_is_validated() {
        assert!(coprime_decompose(&cont(&[(2, 1), (3, 1)]), &frac(1, 2)).is_ok());
        let err = coprime_decompose(&cont(&[(2, 1), (4, 1)]), &frac(1, 2)).unwrap_err();
        assert!(err.to_string().contains("2 (item 0) and 4 (item 1)"));
        assert!(coprime_decompose(&Instance::discrete(&[(2, 1)]).unwrap(), &frac(1, 2)).is_err());
    }

    #[test]
    fn light_bin_exists() {
        let items = [(1, 9), (2, 4), (3, 7), (5, 2), (7, 8), (11, 1), (13, 3), (17, 5), (19, 6), (23, 2), (29, 4)];
        for k in [2u64, 3, 4] {
            let instance = cont(&items);
            let d = coprime_decompose(&instance, &frac(1, k)).unwrap();
            assert!((2..=k as usize + 1).contains(&d.m_hat()));
            assert!(instance.quantity_of(d.middle()) * k as u128 <= instance.total_quantity());
            let mut all: Vec<usize> = [d.lower(), d.middle(), d.upper()].concat();
            all.sort_unstable();
            assert_eq!(all, (0..items.len()).collect::<Vec<_>>());
            assert!(d.shortness_holds(&instance));
        }
    }

    #[test]
    fn witness_example() {
        let instance = cont(&[(3, 1), (5, 1)]);
        let shifts = ShiftVector::new(&instance, vec![frac(1, 5), frac(7, 10)]).unwrap();
        let w = coprime_lb_witness(&instance, &shifts).unwrap();
        assert_eq!(w.t, BigUint::one());
        assert_eq!(w.level, frac(11, 15) + frac(47, 50));
        assert!(w.level >= frac(4, 3));
    }

    #[test]
    fn integer_shifts_align_every_order() {
        let instance = cont(&[(3, 2), (4, 5), (7, 1)]);
        let shifts = ShiftVector::new(&instance, vec![int(2), int(1), int(6)]).unwrap();
        assert_eq!(coprime_lb_witness(&instance, &shifts).unwrap().level, int(8));
    }

    #[test]
    fn solve_examples() {
        let config = SolverConfig::default();
        let eps = frac(1, 2);
        let instance = cont(&[(3, 1), (5, 1)]);
        let out = coprime_solve(&instance, &eps, &config).unwrap();
        assert!(out.peak.value <= &out.lower_bound * (int(1) + int(13) * &eps));
        assert!(out.peak.value >= out.witness.level);

        let single = cont(&[(7, 4)]);
        assert_eq!(coprime_solve(&single, &eps, &config).unwrap().peak.value, int(4));

        // intervals at least 1/ε: the witness bound alone is within the factor
        let long = cont(&[(5, 2), (7, 3), (9, 1)]);
        let out = coprime_solve(&long, &frac(1, 4), &config).unwrap();
        assert!(out.peak.value <= coprime_lower_bound(&long) * (int(1) + int(13) * frac(1, 4)));
    }
}
