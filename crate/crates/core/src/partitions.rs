//! Integer partitions of `n`.
//!
//! A [`Partition`] plays two roles: it labels a conjugacy class of the
//! symmetric group (as a cycle type) and it labels an irreducible
//! representation. Partitions of a fixed `n` are ordered lexicographically
//! on their descending part lists, largest first, and [`PartitionSpace`]
//! gives O(#parts) ranking into that order so dense vectors can be indexed
//! by partition without a hash map.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::combin::factorial;
use crate::error::{invalid, Error, Result};

/// Largest `n` accepted by [`enumerate_partitions`].
pub const ENUMERATION_CAP: usize = 80;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    /// Builds a partition from parts given in non-increasing order.
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.contains(&0) {
            return invalid("partition parts must be positive");
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return invalid("partition parts must be non-increasing");
        }
        Ok(Self { parts })
    }

    /// Builds a cycle type from cycle lengths in any order. Zero lengths are dropped.
    pub fn from_cycle_lengths(mut lengths: Vec<u32>) -> Self {
        lengths.retain(|&l| l > 0);
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        Self { parts: lengths }
    }

    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    /// The one-row partition `(n)`.
    pub fn row(n: usize) -> Self {
        if n == 0 {
            Self::empty()
        } else {
            Self {
                parts: vec![n as u32],
            }
        }
    }

    /// The one-column partition `(1, ..., 1)`.
    pub fn column(n: usize) -> Self {
        Self { parts: vec![1; n] }
    }

    pub(crate) fn from_parts_unchecked(parts: Vec<u32>) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        Self { parts }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().map(|&p| p as usize).sum()
    }

    /// Number of parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// The first (largest) part, or 0 for the empty partition.
    pub fn first(&self) -> usize {
        self.parts.first().copied().unwrap_or(0) as usize
    }

    /// Young-diagram transpose.
    pub fn conjugate(&self) -> Partition {
        let width = self.first();
        let mut out = Vec::with_capacity(width);
        for col in 0..width as u32 {
            let height = self.parts.iter().take_while(|&&p| p > col).count();
            out.push(height as u32);
        }
        Partition { parts: out }
    }

    /// Drops the first row, giving a partition of `n - first()`.
    pub fn truncate(&self) -> Partition {
        Partition {
            parts: self.parts.iter().skip(1).copied().collect(),
        }
    }

    /// Hook lengths of every cell, row by row.
    pub fn hook_lengths(&self) -> Vec<u32> {
        let conj = self.conjugate();
        let mut hooks = Vec::with_capacity(self.n());
        for (i, &row) in self.parts.iter().enumerate() {
            for j in 0..row as usize {
                let arm = row - j as u32 - 1;
                let leg = conj.parts[j] - i as u32 - 1;
                hooks.push(arm + leg + 1);
            }
        }
        hooks
    }

    /// Dimension of the irreducible representation, `n! / prod(hooks)`.
    pub fn dimension(&self) -> BigUint {
        let denom = self
            .hook_lengths()
            .into_iter()
            .fold(BigUint::one(), |acc, h| acc * h);
        factorial(self.n()) / denom
    }

    /// Floating-point dimension, accurate to a few ulps for every `n` in range.
    pub fn dimension_f64(&self) -> f64 {
        let mut hooks = self.hook_lengths();
        hooks.sort_unstable();
        // pair the i-th smallest hook with i+1 so every factor stays near 1
        hooks
            .iter()
            .enumerate()
            .fold(1.0, |acc, (i, &h)| acc * ((i + 1) as f64 / h as f64))
    }

    /// `z_lambda = prod_k k^{m_k} m_k!`, the centralizer order of the class.
    pub fn centralizer_order(&self) -> BigUint {
        let mut z = BigUint::one();
        for (len, mult) in self.multiplicities() {
            for m in 1..=mult as u64 {
                z *= len as u64 * m;
            }
        }
        z
    }

    /// Number of permutations with this cycle type, `n! / z_lambda`.
    pub fn class_size(&self) -> BigUint {
        factorial(self.n()) / self.centralizer_order()
    }

    pub fn class_size_f64(&self) -> f64 {
        let mut acc = 1.0;
        let mut k = self.n();
        for (len, mult) in self.multiplicities() {
            for m in 1..=mult {
                for _ in 0..len {
                    acc *= k as f64;
                    k -= 1;
                }
                acc /= (len * m) as f64;
            }
        }
        acc
    }

    /// Number of parts equal to 1, i.e. fixed points of a permutation of this cycle type.
    pub fn fixed_point_count(&self) -> usize {
        self.parts.iter().rev().take_while(|&&p| p == 1).count()
    }

    /// `(part length, multiplicity)` pairs in descending length order.
    pub fn multiplicities(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((len, m)) if *len == p as usize => *m += 1,
                _ => out.push((p as usize, 1)),
            }
        }
        out
    }

    /// Sign of any permutation with this cycle type.
    pub fn sign(&self) -> i32 {
        if (self.n() - self.len()).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Partition::empty());
        }
        let parts = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::InvalidArgument(format!("bad part {p:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All partitions of `n`, lexicographically descending: `(n)` first, `(1^n)` last.
pub fn enumerate_partitions(n: usize) -> Result<Vec<Partition>> {
    if n == 0 || n > ENUMERATION_CAP {
        return invalid(format!(
            "partition enumeration requires 1 <= n <= {ENUMERATION_CAP}, got {n}"
        ));
    }
    Ok(generate(n))
}

fn generate(n: usize) -> Vec<Partition> {
    fn rec(rest: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition::from_parts_unchecked(prefix.clone()));
            return;
        }
        for first in (1..=max.min(rest)).rev() {
            prefix.push(first);
            rec(rest - first, first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n as u32, n as u32, &mut Vec::with_capacity(n), &mut out);
    out
}

/// The partitions of a fixed `n` in canonical order, with constant-time-per-part ranking.
#[derive(Debug, Clone)]
pub struct PartitionSpace {
    n: usize,
    partitions: Vec<Partition>,
    // bounded[m][k] = number of partitions of m with every part <= k
    bounded: Vec<Vec<u64>>,
    // later[r][k] = sum over first part f in k..=r of bounded[r - f][f]
    later: Vec<Vec<u64>>,
}

impl PartitionSpace {
    pub fn new(n: usize) -> Result<Self> {
        let partitions = enumerate_partitions(n)?;
        let mut bounded = vec![vec![0u64; n + 1]; n + 1];
        bounded[0].fill(1);
        for m in 1..=n {
            for k in 1..=n {
                let without_k = bounded[m][k - 1];
                let with_k = if k <= m { bounded[m - k][k] } else { 0 };
                bounded[m][k] = without_k + with_k;
            }
        }
        debug_assert_eq!(bounded[n][n] as usize, partitions.len());
        let mut later = vec![vec![0u64; n + 2]; n + 1];
        for r in 0..=n {
            for k in (1..=r).rev() {
                later[r][k] = later[r][k + 1] + bounded[r - k][k];
            }
        }
        Ok(Self {
            n,
            partitions,
            bounded,
            later,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn get(&self, index: usize) -> &Partition {
        &self.partitions[index]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Partition> {
        self.partitions.iter()
    }

    /// Position of a descending part list in canonical order, `None` if it is not a partition of `n`.
    pub fn rank(&self, parts: &[u32]) -> Option<usize> {
        let total: usize = parts.iter().map(|&p| p as usize).sum();
        if total != self.n || parts.windows(2).any(|w| w[0] < w[1]) || parts.contains(&0) {
            return None;
        }
        let mut rank = 0u64;
        let mut rest = self.n;
        let mut max = self.n;
        for &p in parts {
            let p = p as usize;
            // partitions of `rest` (parts <= max) whose first part exceeds p come earlier
            let top = max.min(rest);
            if top > p {
                rank += self.later[rest][p + 1] - self.later[rest][top + 1];
            }
            rest -= p;
            max = p;
        }
        Some(rank as usize)
    }

    pub fn index_of(&self, lambda: &Partition) -> Option<usize> {
        self.rank(lambda.parts())
    }

    /// Number of partitions of `m <= n` with all parts at most `k`.
    pub fn count_bounded(&self, m: usize, k: usize) -> u64 {
        self.bounded[m][k.min(self.n)]
    }
}

impl<'a> IntoIterator for &'a PartitionSpace {
    type Item = &'a Partition;
    type IntoIter = std::slice::Iter<'a, Partition>;

    fn into_iter(self) -> Self::IntoIter {
        self.partitions.iter()
    }
}
