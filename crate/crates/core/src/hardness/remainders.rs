//! Common times at which every item of a unique-divisor system was ordered recently.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::{crt_solve, is_prime};
use crate::error::{Error, Result};

/// Moduli `n_ℓ` with primes `p_ℓ` such that `p_ℓ | n_ℓ` and `p_ℓ ∤ n_k` for `k ≠ ℓ`,
/// plus one integer shift per modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniqueDivisorSystem {
    primes: Vec<u64>,
    moduli: Vec<BigUint>,
    shifts: Vec<BigUint>,
    /// `p_ℓ^{α_ℓ}`, the full power of `p_ℓ` in `n_ℓ`.
    powers: Vec<BigUint>,
}

impl UniqueDivisorSystem {
    pub fn new(primes: Vec<u64>, moduli: Vec<BigUint>, shifts: Vec<BigUint>) -> Result<Self> {
        if primes.len() != moduli.len() || primes.len() != shifts.len() {
            return Err(Error::input("primes, moduli and shifts must have equal length"));
        }
        if primes.is_empty() {
            return Err(Error::input("empty system"));
        }
        let mut powers = Vec::with_capacity(primes.len());
        for (l, (&p, n)) in primes.iter().zip(&moduli).enumerate() {
            if !is_prime(p) {
                return Err(Error::input(format!("{p} is not prime")));
            }
            let p_big = BigUint::from(p);
            if n.is_zero() || !(n % &p_big).is_zero() {
                return Err(Error::input(format!("prime {p} does not divide its modulus {n}")));
            }
            if let Some(k) = moduli.iter().enumerate().position(|(k, m)| k != l && (m % &p_big).is_zero()) {
                return Err(Error::input(format!("prime {p} also divides modulus {} of entry {k}", moduli[k])));
            }
            let mut power = BigUint::one();
            let mut rest = n.clone();
            while (&rest % &p_big).is_zero() {
                rest /= &p_big;
                power *= &p_big;
            }
            powers.push(power);
        }
        let shifts = shifts.iter().zip(&moduli).map(|(s, n)| s % n).collect();
        Ok(UniqueDivisorSystem {
            primes,
            moduli,
            shifts,
            powers,
        })
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn moduli(&self) -> &[BigUint] {
        &self.moduli
    }

    pub fn shifts(&self) -> &[BigUint] {
        &self.shifts
    }

    /// `α_ℓ`.
    pub fn exponents(&self) -> Vec<u32> {
        self.powers
            .iter()
            .zip(&self.primes)
            .map(|(power, &p)| {
                let mut a = 0;
                let mut v = power.clone();
                while v > BigUint::one() {
                    v /= p;
                    a += 1;
                }
                a
            })
            .collect()
    }

    /// `n_ℓ / p_ℓ^{α_ℓ}`, the width of the window of entry `ℓ`.
    pub fn window(&self, l: usize) -> BigUint {
        &self.moduli[l] / &self.powers[l]
    }

    /// `(t - τ_ℓ) mod n_ℓ < n_ℓ / p_ℓ^{α_ℓ}` for every entry.
    pub fn satisfied_by(&self, t: &BigUint) -> bool {
        (0..self.primes.len()).all(|l| {
            let n = &self.moduli[l];
            let elapsed = (t % n + n - &self.shifts[l]) % n;
            elapsed < self.window(l)
        })
    }
}

/// Residue `r_ℓ` mod `p^α` of the multiple of `m = n/p^α` that follows `τ_ℓ` most closely.
fn residue(system: &UniqueDivisorSystem, l: usize) -> BigUint {
    let n = &system.moduli[l];
    let power = &system.powers[l];
    let m = system.window(l);
    // smallest multiple of m at or after τ, wrapped into [0, n)
    let j = Integer::div_ceil(&system.shifts[l], &m) % power;
    let t_lr = (&m * j) % n;
    // t_lr solves t ≡ 0 (mod m), t ≡ t_lr (mod p^α)
    debug_assert!((&t_lr % &m).is_zero());
    t_lr % power
}

/// A `t` in `[0, LCM(n))` with `(t - τ_ℓ) mod n_ℓ < n_ℓ / p_ℓ^{α_ℓ}` for every `ℓ`.
pub fn small_remainders(system: &UniqueDivisorSystem) -> Result<BigUint> {
    let lcm = system.moduli.iter().fold(BigUint::one(), |acc, n| acc.lcm(n));
    let powers_product: BigUint = system.powers.iter().product();
    let rest = &lcm / &powers_product;
    let mut congruences = vec![(BigUint::zero(), rest)];
    for l in 0..system.primes.len() {
        congruences.push((residue(system, l), system.powers[l].clone()));
    }
    let t = crt_solve(&congruences)?;
    debug_assert!(system.satisfied_by(&t));
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    fn scan_oracle(system: &UniqueDivisorSystem) -> Vec<u64> {
        let lcm = system.moduli().iter().fold(BigUint::one(), |a, n| a.lcm(n));
        let lcm: u64 = lcm.try_into().unwrap();
        (0..lcm).filter(|&t| system.satisfied_by(&BigUint::from(t))).collect()
    }

    #[test]
    fn two_prime_powers() {
        let s = UniqueDivisorSystem::new(vec![2, 3], big(&[4, 9]), big(&[1, 2])).unwrap();
        assert_eq!(s.exponents(), vec![2, 2]);
        let t = small_remainders(&s).unwrap();
        // both windows have width 1: t ≡ 1 (mod 4) and t ≡ 2 (mod 9)
        assert_eq!(t, BigUint::from(29u32));
        assert_eq!(scan_oracle(&s), vec![29]);
    }

    #[test]
    fn zero_shifts_give_zero() {
        // 3 divides both 15 and 21, but only the marked primes must be private
        let s = UniqueDivisorSystem::new(vec![5, 7, 2], big(&[15, 21, 22]), big(&[0, 0, 0])).unwrap();
        assert_eq!(small_remainders(&s).unwrap(), BigUint::zero());
    }

    #[test]
    fn violations_name_the_prime() {
        let e = UniqueDivisorSystem::new(vec![3, 5], big(&[6, 15]), big(&[0, 0])).unwrap_err();
        assert!(e.to_string().contains("prime 3"));
        let e = UniqueDivisorSystem::new(vec![4, 5], big(&[8, 5]), big(&[0, 0])).unwrap_err();
        assert!(e.to_string().contains("4 is not prime"));
        let e = UniqueDivisorSystem::new(vec![7], big(&[6]), big(&[0])).unwrap_err();
        assert!(e.to_string().contains("prime 7 does not divide"));
    }

    #[test]
    fn random_systems_meet_every_window() {
        let primes = [2u64, 3, 5, 7, 11, 13];
        let mut state = 11u64;
        let mut next = |m: u64| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) % m
        };
        for _ in 0..300 {
            let l = 1 + next(4) as usize;
            let chosen: Vec<u64> = primes[..l].to_vec();
            // other factors come from primes outside the chosen set
            let moduli: Vec<u64> = chosen
                .iter()
                .map(|&p| {
                    let mut n = p.pow(1 + next(2) as u32);
                    for &f in &[17u64, 19, 23] {
                        if next(2) == 1 && n * f <= 10_000 {
                            n *= f;
                        }
                    }
                    n
                })
                .collect();
            let shifts: Vec<u64> = moduli.iter().map(|&n| next(n)).collect();
            let s = UniqueDivisorSystem::new(chosen.clone(), big(&moduli), big(&shifts)).unwrap();
            let t = small_remainders(&s).unwrap();
            for ((&n, &tau), &p) in moduli.iter().zip(&shifts).zip(&chosen) {
                let mut window = n;
                while window % p == 0 {
                    window /= p;
                }
                let t64: u64 = (&t % BigUint::from(n)).try_into().unwrap();
                assert!((t64 + n - tau) % n < window);
            }
        }
    }
}
