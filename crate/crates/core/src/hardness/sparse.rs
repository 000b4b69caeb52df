//! Families of `q`-subsets of a `q × q` grid with small pairwise intersections,
//! from graphs of low-degree polynomials over `F_q`.

use num_bigint::BigUint;

use crate::arith::is_prime;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseFamily {
    q: u64,
    r: u32,
    subsets: Vec<Vec<usize>>,
}

impl SparseFamily {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// `q²`, the ground set size.
    pub fn ground(&self) -> usize {
        (self.q * self.q) as usize
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    /// Largest intersection over all pairs, or over `limit` pairs in a fixed stride.
    pub fn max_pairwise_intersection(&self, limit: usize) -> usize {
        let n = self.subsets.len();
        let pairs = n * n.saturating_sub(1) / 2;
        let stride = pairs.div_ceil(limit.max(1)).max(1);
        let mut best = 0;
        let mut index = 0usize;
        for a in 0..n {
            for b in a + 1..n {
                if index.is_multiple_of(stride) {
                    best = best.max(intersection(&self.subsets[a], &self.subsets[b]));
                }
                index += 1;
            }
        }
        best
    }
}

/// Size of the intersection of two sorted lists.
pub fn intersection(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Graphs `{x·q + f(x)}` of the first `count` polynomials of degree `< r`,
/// ordered by coefficients with the constant term varying fastest.
pub fn sparse_family(q: u64, r: u32, count: usize) -> Result<SparseFamily> {
    if !is_prime(q) {
        return Err(Error::input(format!("q = {q} must be prime")));
    }
    if r < 2 || r as u64 > q {
        return Err(Error::input(format!("r = {r} must lie in [2, q]")));
    }
    let available = BigUint::from(q).pow(r);
    if BigUint::from(count) > available {
        return Err(Error::input(format!("count {count} exceeds q^r = {available}")));
    }
    let subsets = (0..count)
        .map(|j| {
            let mut rest = j as u64;
            let coeffs: Vec<u64> = (0..r)
                .map(|_| {
                    let c = rest % q;
                    rest /= q;
                    c
                })
                .collect();
            (0..q)
                .map(|x| {
                    // Horner in F_q, highest coefficient first
                    let fx = coeffs.iter().rev().fold(0u64, |acc, &c| ((acc as u128 * x as u128 + c as u128) % q as u128) as u64);
                    (x * q + fx) as usize
                })
                .collect()
        })
        .collect();
    Ok(SparseFamily { q, r, subsets })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive pairwise check by set construction.
    fn max_overlap(sets: &[Vec<usize>]) -> usize {
        let mut best = 0;
        for a in 0..sets.len() {
            for b in a + 1..sets.len() {
                let n = sets[a].iter().filter(|x| sets[b].contains(x)).count();
                best = best.max(n);
            }
        }
        best
    }

    #[test]
    fn small_families() {
        let f = sparse_family(2, 2, 4).unwrap();
        assert_eq!(f.len(), 4);
        assert!(f.subsets().iter().all(|s| s.len() == 2 && s.iter().all(|&x| x < 4)));
        assert!(max_overlap(f.subsets()) <= 1);

        let f = sparse_family(3, 3, 27).unwrap();
        assert!(f.subsets().iter().all(|s| s.len() == 3 && s.iter().all(|&x| x < 9)));
        assert!(max_overlap(f.subsets()) <= 2);
        assert_eq!(f.max_pairwise_intersection(usize::MAX), max_overlap(f.subsets()));
        let mut distinct = f.subsets().to_vec();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 27);
    }

    #[test]
    fn constants_are_disjoint() {
        let f = sparse_family(5, 3, 5).unwrap();
        assert_eq!(max_overlap(f.subsets()), 0);
        let mut all: Vec<usize> = f.subsets().iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..25).collect::<Vec<_>>());
    }

    #[test]
    fn preconditions() {
        assert!(sparse_family(4, 2, 1).is_err());
        assert!(sparse_family(5, 1, 1).is_err());
        assert!(sparse_family(5, 6, 1).is_err());
        assert!(sparse_family(3, 2, 10).is_err());
        assert_eq!(sparse_family(3, 2, 9).unwrap().len(), 9);
    }

    #[test]
    fn larger_prime_stays_sparse() {
        let f = sparse_family(11, 3, 300).unwrap();
        assert!(f.max_pairwise_intersection(10_000) <= 2);
        assert!(max_overlap(&f.subsets()[..120]) <= 2);
    }
}
