//! Universal lower bounds and the random-shift regime.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

use crate::arith;
use crate::error::Result;
use crate::model::{cycle_length, Instance, Level, Mode, ShiftVector};
use crate::ratio::{self, frac, int};
use crate::rng::RngStream;

/// `½ Σ H_i (1 + 1/T_i)` for discrete instances, `H_Σ / 2` for continuous ones.
pub fn average_space_bound(instance: &Instance) -> Level {
    match instance.mode() {
        Mode::Continuous => frac(instance.total_quantity(), 2u32),
        Mode::Discrete => instance
            .items()
            .iter()
            .map(|it| frac(it.quantity, 2u32) * frac(it.interval + 1, it.interval))
            .fold(BigRational::zero(), |acc, v| acc + v),
    }
}

/// Both sides of `ln Λ < (ε²/6) · H_Σ / H_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegimeCheck {
    pub holds: bool,
    /// `Λ`.
    pub lhs: BigUint,
    /// The exponent on the right, exact.
    pub rhs: BigRational,
}

/// Decides whether uniformly random shifts are near-optimal with high probability.
///
/// The comparison is exact; a tie does not hold.
pub fn random_regime_check(instance: &Instance, eps: &BigRational) -> Result<RegimeCheck> {
    ratio::check_eps(eps, false)?;
    let lambda = cycle_length(instance).into_inner();
    let rhs = eps * eps / int(6) * frac(instance.total_quantity(), instance.max_quantity());
    let holds = arith::cmp_ln(&lambda, &rhs) == Ordering::Less;
    Ok(RegimeCheck {
        holds,
        lhs: lambda,
        rhs,
    })
}

/// One uniform draw from `{0, ..., T_i - 1}` per item.
pub fn random_shift_vector(instance: &Instance, rng: &mut RngStream) -> ShiftVector {
    let shifts: Vec<u64> = instance
        .items()
        .iter()
        .map(|it| rng.gen_range(0..it.interval))
        .collect();
    ShiftVector::from_integers(instance, &shifts).expect("draws lie inside each interval")
}
