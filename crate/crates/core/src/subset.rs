//! Small helpers for finite subsets: sorted vectors for general ground sets
//! and `u64` bitmasks where the ground set is known to be tiny.

use itertools::Itertools;

/// Sorted, deduplicated copy of `xs`.
pub fn normalize(xs: &[usize]) -> Vec<usize> {
    let mut v = xs.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// All `r`-subsets of `items`, in lexicographic order of positions.
pub fn subsets_of_size(items: &[usize], r: usize) -> impl Iterator<Item = Vec<usize>> + '_ {
    items.iter().copied().combinations(r)
}

/// All `r`-subsets of `[0, n)`, lexicographic.
pub fn range_subsets(n: usize, r: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n).combinations(r)
}

pub fn is_sorted_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    'outer: for x in small {
        for y in it.by_ref() {
            if y == x {
                continue 'outer;
            }
            if y > x {
                return false;
            }
        }
        return false;
    }
    true
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

pub fn mask_of(xs: &[usize]) -> u64 {
    xs.iter().fold(0u64, |m, &x| m | (1u64 << x))
}

pub fn elements(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        out.push(i);
        m &= m - 1;
    }
    out
}

/// Submasks of `mask` with exactly `r` bits, in increasing numeric order.
pub fn submasks_of_size(mask: u64, r: usize) -> Vec<u64> {
    let elems = elements(mask);
    elems
        .iter()
        .copied()
        .combinations(r)
        .map(|c| mask_of(&c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(9, 3), 84);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(0, 0), 1);
    }

    #[test]
    fn sorted_containment() {
        assert!(is_sorted_subset(&[1, 3], &[0, 1, 2, 3]));
        assert!(!is_sorted_subset(&[1, 4], &[0, 1, 2, 3]));
        assert!(is_sorted_subset(&[], &[0]));
    }

    #[test]
    fn masks_roundtrip() {
        let m = mask_of(&[0, 3, 5]);
        assert_eq!(elements(m), vec![0, 3, 5]);
        assert_eq!(submasks_of_size(m, 2).len(), 3);
    }
}
