//! Number theory: LCM, CRT, prime generation and a certified natural-log comparison.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::config::SolverConfig;
use crate::error::{Error, Result};

pub fn lcm_all(values: impl IntoIterator<Item = u64>) -> BigUint {
    values
        .into_iter()
        .fold(BigUint::one(), |acc, v| acc.lcm(&BigUint::from(v)))
}

/// The unique `t` in `[0, Π moduli)` meeting every congruence `t ≡ r (mod m)`.
///
/// Moduli must be pairwise coprime; residues are reduced on the way in.
pub fn crt_solve(congruences: &[(BigUint, BigUint)]) -> Result<BigUint> {
    let mut value = BigInt::zero();
    let mut modulus = BigInt::one();
    for (idx, (r, m)) in congruences.iter().enumerate() {
        if m.is_zero() {
            return Err(Error::input(format!("congruence {idx} has modulus 0")));
        }
        let m = BigInt::from(m.clone());
        let r = BigInt::from(r.clone()).mod_floor(&m);
        let eg = modulus.extended_gcd(&m);
        if !eg.gcd.is_one() {
            return Err(Error::input(format!(
                "modulus {m} of congruence {idx} shares factor {} with an earlier modulus",
                eg.gcd
            )));
        }
        // value + modulus * k ≡ r (mod m), with modulus * eg.x ≡ 1 (mod m)
        let k = ((&r - &value) * &eg.x).mod_floor(&m);
        value += &modulus * k;
        modulus *= m;
        value = value.mod_floor(&modulus);
    }
    Ok(value.to_biguint().expect("reduced residue is nonnegative"))
}

/// Convenience wrapper for machine-sized congruences.
pub fn crt_solve_u64(congruences: &[(u64, u64)]) -> Result<BigUint> {
    let big: Vec<_> = congruences
        .iter()
        .map(|&(r, m)| (BigUint::from(r), BigUint::from(m)))
        .collect();
    crt_solve(&big)
}

pub fn pairwise_coprime(values: &[u64]) -> std::result::Result<(), (usize, usize)> {
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if values[i].gcd(&values[j]) != 1 {
                return Err((i, j));
            }
        }
    }
    Ok(())
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

const MAX_SIEVE: u64 = 1 << 40;
const SEGMENT: u64 = 1 << 18;

fn small_primes(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// All primes in `[lo, hi]`, ascending, by segmented sieve.
pub fn primes_in_range(lo: u64, hi: u64, config: &SolverConfig) -> Result<Vec<u64>> {
    if lo < 2 || lo > hi || hi > MAX_SIEVE {
        return Err(Error::input(format!(
            "prime range [{lo}, {hi}] must satisfy 2 <= lo <= hi <= 2^40"
        )));
    }
    let width = hi - lo + 1;
    if width > config.sieve_budget {
        return Err(Error::budget("sieve width", width, config.sieve_budget));
    }
    let base = small_primes(hi.sqrt());
    let mut out = Vec::new();
    let mut start = lo;
    while start <= hi {
        let end = hi.min(start.saturating_add(SEGMENT - 1));
        let mut composite = vec![false; (end - start + 1) as usize];
        for &p in &base {
            if p * p > end {
                break;
            }
            let first = (p * p).max(start.div_ceil(p) * p);
            let mut j = first;
            while j <= end {
                composite[(j - start) as usize] = true;
                j += p;
            }
        }
        out.extend(
            composite
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(k, _)| start + k as u64),
        );
        if end == hi {
            break;
        }
        start = end + 1;
    }
    Ok(out)
}

/// The `count` smallest primes that are `>= lo`.
pub fn primes_from(lo: u64, count: usize, config: &SolverConfig) -> Result<Vec<u64>> {
    let lo = lo.max(2);
    let mut width = (count as u64).max(16).saturating_mul(16);
    loop {
        let hi = lo.saturating_add(width - 1).min(MAX_SIEVE);
        let found = primes_in_range(lo, hi, config)?;
        if found.len() >= count {
            return Ok(found[..count].to_vec());
        }
        if hi == MAX_SIEVE {
            return Err(Error::input(format!(
                "fewer than {count} primes between {lo} and 2^40"
            )));
        }
        width = width.saturating_mul(2);
    }
}

/// `2^prec · atanh(z)` bracketed as `[lo, hi]`, for rational `0 <= z <= 1/3`.
fn atanh_scaled(zn: &BigInt, zd: &BigInt, prec: u32) -> (BigInt, BigInt) {
    let scale = BigInt::one() << prec;
    let z2n = zn * zn;
    let z2d = zd * zd;
    let mut pn = zn.clone();
    let mut pd = zd.clone();
    let mut lo = BigInt::zero();
    let mut hi = BigInt::zero();
    // each term shrinks by at least 9x, i.e. more than 3 bits
    let terms = prec / 3 + 2;
    for j in 0..terms {
        let k = BigInt::from(2 * j + 1);
        let num = &pn * &scale;
        let den = &pd * &k;
        let (q, r) = num.div_mod_floor(&den);
        hi += if r.is_zero() { q.clone() } else { &q + 1 };
        lo += q;
        pn *= &z2n;
        pd *= &z2d;
    }
    // tail ≤ z^(2J+1) / ((2J+1)(1 - z²)); pn/pd is z^(2J+1) here
    let k = BigInt::from(2 * terms + 1);
    let num = &pn * &scale * &z2d;
    let den = &pd * k * (&z2d - &z2n);
    hi += num.div_ceil(&den);
    (lo, hi)
}

/// `2^prec · ln(a/d)` bracketed, for `1 <= a/d <= 2`.
fn ln_unit_scaled(a: &BigInt, d: &BigInt, prec: u32) -> (BigInt, BigInt) {
    let (lo, hi) = atanh_scaled(&(a - d), &(a + d), prec);
    (lo * 2, hi * 2)
}

/// `2^prec · ln(n)` bracketed as `[lo, hi]`.
fn ln_scaled(n: &BigUint, prec: u32) -> (BigInt, BigInt) {
    let bits = n.bits();
    let exp = BigInt::from(bits - 1);
    let (ln2_lo, ln2_hi) = ln_unit_scaled(&BigInt::from(2), &BigInt::one(), prec);
    let keep = prec as u64 + 8;
    let (m_lo, m_hi, denom) = if bits <= keep {
        let m = BigInt::from(n.clone());
        (m.clone(), m, BigInt::one() << (bits - 1))
    } else {
        let m = BigInt::from(n >> (bits - keep));
        (m.clone(), m + 1, BigInt::one() << (keep - 1))
    };
    let (y_lo, _) = ln_unit_scaled(&m_lo, &denom, prec);
    let (_, y_hi) = ln_unit_scaled(&m_hi, &denom, prec);
    (&exp * ln2_lo + y_lo, &exp * ln2_hi + y_hi)
}

/// Exact comparison of `ln(n)` with a rational, refining precision until decided.
///
/// `ln(n)` is irrational for `n >= 2`, so only `n = 1` against zero compares equal.
pub fn cmp_ln(n: &BigUint, q: &BigRational) -> Ordering {
    assert!(!n.is_zero(), "ln of zero");
    if n.is_one() {
        return BigRational::zero().cmp(q);
    }
    if q.numer().sign() != Sign::Plus {
        return Ordering::Greater;
    }
    let mut prec = 64u32;
    loop {
        let (lo, hi) = ln_scaled(n, prec);
        let target = q * BigRational::from_integer(BigInt::one() << prec);
        if BigRational::from_integer(lo) > target {
            return Ordering::Greater;
        }
        if BigRational::from_integer(hi) < target {
            return Ordering::Less;
        }
        prec *= 2;
    }
}

/// Display-grade `ln(n)`.
pub fn ln_approx(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 53 {
        return n.to_f64().unwrap_or(f64::NAN).ln();
    }
    let shift = bits - 53;
    (n >> shift).to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{frac, int};

    #[test]
    fn crt_examples() {
        assert_eq!(crt_solve_u64(&[(0, 3), (1, 4)]).unwrap(), BigUint::from(9u32));
        assert_eq!(crt_solve_u64(&[(0, 7)]).unwrap(), BigUint::zero());
        assert_eq!(crt_solve_u64(&[(2, 5), (3, 7)]).unwrap(), BigUint::from(17u32));
        assert_eq!(crt_solve_u64(&[]).unwrap(), BigUint::zero());
    }

    #[test]
    fn crt_rejects_shared_factor() {
        assert!(matches!(crt_solve_u64(&[(1, 4), (1, 6)]), Err(Error::Input(_))));
        assert!(crt_solve_u64(&[(1, 0)]).is_err());
    }

    #[test]
    fn prime_examples() {
        let cfg = SolverConfig::default();
        assert_eq!(primes_in_range(2, 10, &cfg).unwrap(), vec![2, 3, 5, 7]);
        assert!(primes_in_range(8, 10, &cfg).unwrap().is_empty());
        assert_eq!(primes_in_range(121, 140, &cfg).unwrap(), vec![127, 131, 137, 139]);
    }

    #[test]
    fn prime_range_validation() {
        let cfg = SolverConfig { sieve_budget: 100, ..SolverConfig::default() };
        assert!(matches!(primes_in_range(2, 1000, &cfg), Err(Error::Budget { .. })));
        assert!(matches!(primes_in_range(1, 10, &cfg), Err(Error::Input(_))));
        assert!(matches!(primes_in_range(10, 9, &cfg), Err(Error::Input(_))));
    }

    #[test]
    fn sieve_matches_miller_rabin_across_segments() {
        let cfg = SolverConfig::default();
        let lo = 1_000_000;
        let hi = lo + 3 * SEGMENT;
        let sieved = primes_in_range(lo, hi, &cfg).unwrap();
        let tested: Vec<u64> = (lo..=hi).filter(|&n| is_prime(n)).collect();
        assert_eq!(sieved, tested);
    }

    #[test]
    fn primes_from_takes_smallest() {
        let cfg = SolverConfig::default();
        assert_eq!(primes_from(3, 3, &cfg).unwrap(), vec![3, 5, 7]);
        assert_eq!(primes_from(2, 2, &cfg).unwrap(), vec![2, 3]);
        assert_eq!(primes_from(500, 500, &cfg).unwrap().len(), 500);
    }

    #[test]
    fn is_prime_large() {
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(18_446_744_073_709_551_559));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn cmp_ln_small_cases() {
        let two = BigUint::from(2u32);
        // ln 2 ≈ 0.693147
        assert_eq!(cmp_ln(&two, &frac(693, 1000)), Ordering::Greater);
        assert_eq!(cmp_ln(&two, &frac(694, 1000)), Ordering::Less);
        assert_eq!(cmp_ln(&BigUint::one(), &int(0)), Ordering::Equal);
        assert_eq!(cmp_ln(&BigUint::one(), &frac(1, 1000)), Ordering::Less);
        assert_eq!(cmp_ln(&BigUint::from(6u32), &frac(33, 10000)), Ordering::Greater);
    }

    #[test]
    fn cmp_ln_tight_bracket() {
        // ln 10 = 2.302585092994045684017991454684...
        let ten = BigUint::from(10u32);
        let below = BigRational::new(
            "2302585092994045684017991454683".parse().unwrap(),
            BigInt::from(10u32).pow(30),
        );
        let above = BigRational::new(
            "2302585092994045684017991454685".parse().unwrap(),
            BigInt::from(10u32).pow(30),
        );
        assert_eq!(cmp_ln(&ten, &below), Ordering::Greater);
        assert_eq!(cmp_ln(&ten, &above), Ordering::Less);
    }

    #[test]
    fn cmp_ln_huge_argument() {
        // ln(2^5000) = 5000 ln 2 ≈ 3465.7359
        let n = BigUint::one() << 5000u32;
        assert_eq!(cmp_ln(&n, &frac(34657, 10)), Ordering::Greater);
        assert_eq!(cmp_ln(&n, &frac(34658, 10)), Ordering::Less);
        let m = (BigUint::one() << 5000u32) - 1u32;
        assert_eq!(cmp_ln(&m, &frac(34657, 10)), Ordering::Greater);
        assert!((ln_approx(&n) - 3465.7359).abs() < 1e-3);
    }
}
