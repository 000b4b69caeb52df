//! Peak estimation from uniformly sampled times, on instances with huge cycles.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::primes_from;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::model::{cycle_length, Instance, Level, Mode, ShiftVector};
use crate::ratio;
use crate::rng::RngStream;

/// `n` unit items whose intervals are the `n` smallest primes `>= n`.
pub fn gen_sample_complexity(n: usize, config: &SolverConfig) -> Result<Instance> {
    if n < 2 {
        return Err(Error::input("the sampling instance needs n >= 2"));
    }
    let primes = primes_from(n as u64, n, config)?;
    let items: Vec<(u64, u64)> = primes.into_iter().map(|p| (p, 1)).collect();
    Instance::discrete(&items)
}

/// `m` uniform times in `[0, Λ)`; point `j` comes from substream `j`.
pub fn sample_points(instance: &Instance, m: u64, rng: &RngStream, config: &SolverConfig) -> Vec<BigUint> {
    let lambda = cycle_length(instance).into_inner();
    config.install(|| {
        (0..m)
            .into_par_iter()
            .map(|j| rng.substream(j).gen_biguint_below(&lambda))
            .collect()
    })
}

/// Levels at sampled times, stored exactly as `Λ · I_Σ(τ, X_j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledLevels {
    lambda: BigUint,
    scaled: Vec<BigUint>,
}

impl SampledLevels {
    pub fn len(&self) -> usize {
        self.scaled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scaled.is_empty()
    }

    pub fn level(&self, j: usize) -> Level {
        BigRational::new(BigInt::from(self.scaled[j].clone()), BigInt::from(self.lambda.clone()))
    }

    /// Float value of sample `j`, accurate even when `Λ` exceeds the float range.
    pub fn approx(&self, j: usize) -> f64 {
        let drop = self.lambda.bits().saturating_sub(64);
        let num = (&self.scaled[j] >> drop).to_f64().unwrap_or(f64::NAN);
        let den = (&self.lambda >> drop).to_f64().unwrap_or(f64::NAN);
        num / den
    }

    /// Whether sample `j` is at least `threshold`, compared exactly.
    pub fn at_least(&self, j: usize, threshold: &Level) -> bool {
        match threshold.numer().to_biguint() {
            Some(num) => {
                let den = threshold.denom().to_biguint().expect("positive denominator");
                &self.scaled[j] * den >= num * &self.lambda
            }
            None => true,
        }
    }

    pub fn max(&self) -> Level {
        let best = self.scaled.iter().max().cloned().unwrap_or_default();
        BigRational::new(BigInt::from(best), BigInt::from(self.lambda.clone()))
    }
}

/// `I_Σ(τ, X_j)` at `m` uniform times, never materializing the cycle; every
/// item is reduced modulo its own interval.
pub fn sample_levels(
    instance: &Instance,
    shifts: &ShiftVector,
    m: u64,
    rng: &RngStream,
    config: &SolverConfig,
) -> Result<SampledLevels> {
    if instance.mode() != Mode::Discrete {
        return Err(Error::input("sampling expects a discrete instance"));
    }
    if shifts.len() != instance.len() {
        return Err(Error::input("shift vector does not match the instance"));
    }
    let tau = shifts
        .integers()
        .ok_or_else(|| Error::input("sampling needs integer shifts"))?;
    let lambda = cycle_length(instance).into_inner();
    let weights: Vec<BigUint> = instance
        .items()
        .iter()
        .map(|it| &lambda / it.interval * it.quantity)
        .collect();
    let scaled_level = |x: &BigUint| -> BigUint {
        instance
            .items()
            .iter()
            .zip(&weights)
            .zip(&tau)
            .map(|((it, w), &s)| {
                let period = it.interval;
                let r = (x % period).to_u64().expect("below the interval");
                let elapsed = (r + period - s % period) % period;
                w * (period - elapsed)
            })
            .sum()
    };
    let points = sample_points(instance, m, rng, config);
    let scaled = config.install(|| points.par_iter().map(scaled_level).collect());
    Ok(SampledLevels { lambda, scaled })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingEstimate {
    /// Largest sampled level.
    pub estimate: Level,
    pub samples: u64,
    /// Samples whose level is at least the threshold.
    pub exceed: u64,
    pub threshold: Level,
}

impl SamplingEstimate {
    pub fn exceed_fraction(&self) -> BigRational {
        if self.samples == 0 {
            return BigRational::zero();
        }
        ratio::frac(self.exceed, self.samples)
    }
}

/// Maximum of `I_Σ(τ, X_j)` over `m` uniform times, plus how many samples reach `threshold`.
pub fn sampling_estimate(
    instance: &Instance,
    shifts: &ShiftVector,
    m: u64,
    threshold: &Level,
    rng: &RngStream,
    config: &SolverConfig,
) -> Result<SamplingEstimate> {
    let levels = sample_levels(instance, shifts, m, rng, config)?;
    let exceed = (0..levels.len()).filter(|&j| levels.at_least(j, threshold)).count() as u64;
    Ok(SamplingEstimate {
        estimate: levels.max(),
        samples: m,
        exceed,
        threshold: threshold.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{frac, int};
    use num_traits::Signed;

    #[test]
    fn generator_examples() {
        let cfg = SolverConfig::default();
        let three = gen_sample_complexity(3, &cfg).unwrap();
        assert_eq!(three.intervals(), vec![3, 5, 7]);
        assert_eq!(cycle_length(&three).to_u64(), Some(105));
        assert_eq!(gen_sample_complexity(2, &cfg).unwrap().intervals(), vec![2, 3]);
        assert!(gen_sample_complexity(1, &cfg).is_err());
        let big = gen_sample_complexity(40, &cfg).unwrap();
        assert!(crate::arith::pairwise_coprime(&big.intervals()).is_ok());
        assert!(big.intervals().iter().all(|&t| t >= 40));
    }

    #[test]
    fn estimate_never_exceeds_full_stock() {
        let cfg = SolverConfig::default();
        let instance = gen_sample_complexity(12, &cfg).unwrap();
        let zeros = ShiftVector::zeros(&instance);
        let r = sampling_estimate(&instance, &zeros, 200, &int(6), &RngStream::new(5), &cfg).unwrap();
        assert!(r.estimate <= int(12));
        assert!(r.estimate > int(0));
        assert_eq!(r.samples, 200);
        assert!(r.exceed <= 200);
    }

    #[test]
    fn simultaneous_order_epoch() {
        // with a single item of interval 1 every time is an order epoch
        let cfg = SolverConfig::default();
        let instance = Instance::discrete(&[(1, 3), (1, 4)]).unwrap();
        let zeros = ShiftVector::zeros(&instance);
        let r = sampling_estimate(&instance, &zeros, 1, &int(7), &RngStream::new(1), &cfg).unwrap();
        assert_eq!(r.estimate, int(7));
        assert_eq!(r.exceed, 1);
    }

    #[test]
    fn approximations_track_exact_levels() {
        let cfg = SolverConfig::default();
        let instance = gen_sample_complexity(300, &cfg).unwrap();
        let zeros = ShiftVector::zeros(&instance);
        let levels = sample_levels(&instance, &zeros, 20, &RngStream::new(2), &cfg).unwrap();
        assert!(cycle_length(&instance).value().bits() > 1024);
        for j in 0..levels.len() {
            let exact = levels.level(j);
            let a = levels.approx(j);
            assert!(a.is_finite() && a > 0.0 && a <= 300.0);
            assert!(levels.at_least(j, &exact));
            assert!(!levels.at_least(j, &(exact.clone() + frac(1, 1_000_000))));
            let back = ratio::parse(&format!("{a:.6}")).unwrap();
            assert!((back - exact).abs() < frac(1, 1000));
        }
    }

    #[test]
    fn independent_of_worker_count() {
        let instance = gen_sample_complexity(20, &SolverConfig::default()).unwrap();
        let zeros = ShiftVector::zeros(&instance);
        let t = frac(12, 1);
        let one = sampling_estimate(&instance, &zeros, 300, &t, &RngStream::new(9), &SolverConfig::default()).unwrap();
        let four = sampling_estimate(
            &instance,
            &zeros,
            300,
            &t,
            &RngStream::new(9),
            &SolverConfig { jobs: 4, ..SolverConfig::default() },
        )
        .unwrap();
        assert_eq!(one, four);
    }
}
