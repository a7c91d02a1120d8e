//! Laws on the symmetric group that are constant on conjugacy classes, stored
//! as dense vectors over cycle types in canonical partition order.

use std::io::Write;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::combin::{factorial, kahan_sum};
use crate::error::{invalid, Result};
use crate::partitions::{Partition, PartitionSpace};

/// Floating-point class distribution: `probs[i]` is the total mass of the
/// conjugacy class labelled by `space.get(i)`.
#[derive(Debug, Clone)]
pub struct ClassDistribution {
    space: Arc<PartitionSpace>,
    probs: Vec<f64>,
}

impl ClassDistribution {
    pub fn new(space: Arc<PartitionSpace>, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != space.len() {
            return invalid(format!(
                "class distribution has {} entries, expected p({}) = {}",
                probs.len(),
                space.n(),
                space.len()
            ));
        }
        if probs.iter().any(|&p| p.is_nan() || p < 0.0) {
            return invalid("class probabilities must be non-negative");
        }
        Ok(Self { space, probs })
    }

    pub(crate) fn from_raw(space: Arc<PartitionSpace>, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), space.len());
        Self { space, probs }
    }

    /// Point mass on the class of the identity.
    pub fn identity(space: Arc<PartitionSpace>) -> Self {
        let mut probs = vec![0.0; space.len()];
        *probs.last_mut().expect("non-empty space") = 1.0;
        Self { space, probs }
    }

    /// Uniform measure on `S_n` pushed to cycle types: `1 / z_lambda`.
    pub fn uniform(space: Arc<PartitionSpace>) -> Self {
        let probs = space.iter().map(inverse_centralizer_f64).collect();
        Self { space, probs }
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn space(&self) -> &Arc<PartitionSpace> {
        &self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, lambda: &Partition) -> f64 {
        self.space.index_of(lambda).map_or(0.0, |i| self.probs[i])
    }

    pub fn total_mass(&self) -> f64 {
        kahan_sum(self.probs.iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Partition, f64)> {
        self.space.iter().zip(self.probs.iter().copied())
    }

    /// Law of the number of fixed points, indexed `0..=n`.
    pub fn fixed_point_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n() + 1];
        for (lambda, p) in self.iter() {
            out[lambda.fixed_point_count()] += p;
        }
        out
    }

    /// `sum_lambda sign(lambda) P(lambda)`, the Fourier coefficient at the sign representation.
    pub fn sign_moment(&self) -> f64 {
        kahan_sum(self.iter().map(|(l, p)| l.sign() as f64 * p))
    }

    /// `n! * sum_sigma f(sigma) g(sigma)` for the per-permutation densities of two class laws.
    pub fn scaled_inner_product(&self, other: &ClassDistribution) -> Result<f64> {
        if self.n() != other.n() {
            return invalid("inner product of class distributions over different n");
        }
        // per-permutation density is P(lambda) / class_size, so the n!-scaled product is
        // P_a P_b z_lambda
        Ok(kahan_sum(self.space.iter().enumerate().map(
            |(i, lambda)| self.probs[i] * other.probs[i] / inverse_centralizer_f64(lambda),
        )))
    }

    /// CSV with header `partition,class_size,probability`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "partition,class_size,probability")?;
        for (lambda, p) in self.iter() {
            writeln!(out, "\"{}\",{},{:e}", lambda, lambda.class_size(), p)?;
        }
        Ok(())
    }
}

/// `1 / z_lambda = class_size / n!` in floating point without forming `n!`.
pub fn inverse_centralizer_f64(lambda: &Partition) -> f64 {
    let mut acc = 1.0;
    for (len, mult) in lambda.multiplicities() {
        for m in 1..=mult {
            acc /= (len * m) as f64;
        }
    }
    acc
}

/// Exact class distribution with a shared denominator.
#[derive(Debug, Clone)]
pub struct ExactClassDistribution {
    space: Arc<PartitionSpace>,
    numerators: Vec<BigUint>,
    denominator: BigUint,
}

impl ExactClassDistribution {
    pub fn new(
        space: Arc<PartitionSpace>,
        numerators: Vec<BigUint>,
        denominator: BigUint,
    ) -> Result<Self> {
        if numerators.len() != space.len() {
            return invalid("numerator vector length does not match the partition space");
        }
        if denominator.is_zero() {
            return invalid("zero denominator");
        }
        Ok(Self {
            space,
            numerators,
            denominator,
        })
    }

    pub fn identity(space: Arc<PartitionSpace>) -> Self {
        let mut numerators = vec![BigUint::zero(); space.len()];
        *numerators.last_mut().expect("non-empty space") = BigUint::from(1u32);
        Self {
            space,
            numerators,
            denominator: BigUint::from(1u32),
        }
    }

    pub fn uniform(space: Arc<PartitionSpace>) -> Self {
        let numerators = space.iter().map(Partition::class_size).collect();
        let denominator = factorial(space.n());
        Self {
            space,
            numerators,
            denominator,
        }
    }

    pub fn space(&self) -> &Arc<PartitionSpace> {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn numerators(&self) -> &[BigUint] {
        &self.numerators
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    pub fn prob(&self, index: usize) -> BigRational {
        BigRational::new(
            self.numerators[index].clone().into(),
            self.denominator.clone().into(),
        )
    }

    pub fn probs(&self) -> Vec<BigRational> {
        (0..self.numerators.len()).map(|i| self.prob(i)).collect()
    }

    pub fn total_mass(&self) -> BigRational {
        let sum: BigUint = self.numerators.iter().sum();
        BigRational::new(sum.into(), self.denominator.clone().into())
    }

    pub fn to_f64(&self) -> ClassDistribution {
        let probs = self
            .probs()
            .iter()
            .map(|q| q.to_f64().unwrap_or(f64::NAN))
            .collect();
        ClassDistribution::from_raw(self.space.clone(), probs)
    }
}

impl PartialEq for ExactClassDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.n() == other.n()
            && self
                .numerators
                .iter()
                .zip(&other.numerators)
                .all(|(a, b)| a * &other.denominator == b * &self.denominator)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_sums_to_one() {
        for n in 1..=12 {
            let space = Arc::new(PartitionSpace::new(n).unwrap());
            let u = ClassDistribution::uniform(space.clone());
            assert!((u.total_mass() - 1.0).abs() < 1e-14);
            let e = ExactClassDistribution::uniform(space);
            assert_eq!(e.total_mass(), BigRational::from_integer(1.into()));
        }
    }

    #[test]
    fn identity_sits_on_last_partition() {
        let space = Arc::new(PartitionSpace::new(5).unwrap());
        let id = ClassDistribution::identity(space);
        assert_eq!(id.prob(&Partition::column(5)), 1.0);
        assert_eq!(id.fixed_point_marginal()[5], 1.0);
        assert_eq!(id.sign_moment(), 1.0);
    }

    #[test]
    fn rejects_bad_vectors() {
        let space = Arc::new(PartitionSpace::new(3).unwrap());
        assert!(ClassDistribution::new(space.clone(), vec![1.0]).is_err());
        assert!(ClassDistribution::new(space, vec![1.0, -0.5, 0.5]).is_err());
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let space = Arc::new(PartitionSpace::new(3).unwrap());
        let mut buf = Vec::new();
        ClassDistribution::uniform(space)
            .write_csv(&mut buf)
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "partition,class_size,probability");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("\"2,1\",3,"));
    }
}
