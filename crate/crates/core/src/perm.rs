//! Permutations stored as image arrays, `perm[k] = sigma(k)`.

use crate::partitions::Partition;

pub fn identity(n: usize) -> Vec<u32> {
    (0..n as u32).collect()
}

pub fn is_permutation(perm: &[u32]) -> bool {
    let mut seen = vec![false; perm.len()];
    for &x in perm {
        match seen.get_mut(x as usize) {
            Some(s) if !*s => *s = true,
            _ => return false,
        }
    }
    true
}

pub fn fixed_points(perm: &[u32]) -> usize {
    perm.iter()
        .enumerate()
        .filter(|&(k, &x)| k as u32 == x)
        .count()
}

pub fn cycle_type(perm: &[u32]) -> Partition {
    let mut seen = vec![false; perm.len()];
    let mut lengths = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = perm[k] as usize;
            len += 1;
        }
        lengths.push(len);
    }
    Partition::from_cycle_lengths(lengths)
}

/// `+1` for even permutations, `-1` for odd ones.
pub fn sign(perm: &[u32]) -> i32 {
    let ct = cycle_type(perm);
    ct.sign()
}

/// Rank in lexicographic order of image arrays (Lehmer code), `0..n!`.
pub fn rank(perm: &[u32]) -> usize {
    let n = perm.len();
    let mut used = 0u64;
    let mut r = 0usize;
    for (pos, &x) in perm.iter().enumerate() {
        let smaller_unused = (0..x).filter(|&y| used & (1 << y) == 0).count();
        r = r * (n - pos) + smaller_unused;
        used |= 1 << x;
    }
    r
}

pub fn unrank(n: usize, mut r: usize) -> Vec<u32> {
    let mut radices = vec![0usize; n];
    for pos in (0..n).rev() {
        let base = n - pos;
        radices[pos] = r % base;
        r /= base;
    }
    let mut avail: Vec<u32> = (0..n as u32).collect();
    radices.into_iter().map(|d| avail.remove(d)).collect()
}

/// All permutations of `0..n` in rank order.
pub fn all_permutations(n: usize) -> Vec<Vec<u32>> {
    let total: usize = (1..=n).product();
    (0..total).map(|r| unrank(n, r)).collect()
}
