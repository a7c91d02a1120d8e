//! Scalar Fourier coefficients of class measures and the L² route to total variation.
//!
//! Every law here is a class function, so its transform at the irreducible
//! `lambda` is a scalar multiple of the identity. The walk at time `t` has
//! scalar `a_lambda^t`; the fixed-`M` planted measure `xi_M` has scalar
//! `d_{lambda*} C(M, n - lambda_1) / d_lambda` (zero when `lambda_1 < n - M`),
//! obtained by counting semistandard tableaux of content `(n-M, 1^M)`.
//! Cauchy-Schwarz plus Plancherel then bounds the total variation distance:
//! `4 d_TV^2 <= sum_lambda d_lambda^2 (a - b)^2`.

use std::io::Write;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Pow, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::characters::pn_eigenvalue_numerator;
use crate::combin::{binomial, binomial_f64, tree_sum};
use crate::error::{invalid, Error, Result};
use crate::measures::{log_squared_floor, mu_cap, truncated_poisson_weights, WalkTime};
use crate::partitions::{Partition, PartitionSpace};

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralEntries {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

/// One scalar per irreducible, in canonical partition order.
#[derive(Debug, Clone)]
pub struct SpectralVector {
    space: Arc<PartitionSpace>,
    entries: SpectralEntries,
}

impl SpectralVector {
    pub fn space(&self) -> &Arc<PartitionSpace> {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn entries(&self) -> &SpectralEntries {
        &self.entries
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.entries, SpectralEntries::Exact(_))
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn get_f64(&self, index: usize) -> f64 {
        match &self.entries {
            SpectralEntries::Exact(v) => v[index].to_f64().unwrap_or(f64::NAN),
            SpectralEntries::Float(v) => v[index],
        }
    }

    pub fn entry(&self, lambda: &Partition) -> Option<f64> {
        self.space.index_of(lambda).map(|i| self.get_f64(i))
    }

    pub fn exact_entry(&self, lambda: &Partition) -> Option<&BigRational> {
        match &self.entries {
            SpectralEntries::Exact(v) => self.space.index_of(lambda).map(|i| &v[i]),
            SpectralEntries::Float(_) => None,
        }
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.get_f64(i)).collect()
    }

    /// CSV with header `partition,d_lambda,eigenvalue`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "partition,d_lambda,eigenvalue")?;
        for (i, lambda) in self.space.iter().enumerate() {
            writeln!(
                out,
                "\"{}\",{},{:e}",
                lambda,
                lambda.dimension(),
                self.get_f64(i)
            )?;
        }
        Ok(())
    }
}

/// Exact walk spectrum `a_lambda^t`.
pub fn walk_spectrum_exact(space: &Arc<PartitionSpace>, t: u64) -> Result<SpectralVector> {
    let n = space.n();
    if n < 2 {
        return invalid("walk spectrum needs n >= 2");
    }
    let denom = BigInt::from((n * n) as u64).pow(t);
    let entries = space
        .iter()
        .map(|lambda| {
            let num = BigInt::from(pn_eigenvalue_numerator(lambda)).pow(t);
            BigRational::new(num, denom.clone())
        })
        .collect();
    Ok(SpectralVector {
        space: space.clone(),
        entries: SpectralEntries::Exact(entries),
    })
}

/// Floating-point walk spectrum `a_lambda^t`.
pub fn walk_spectrum(space: &Arc<PartitionSpace>, t: u64) -> Result<SpectralVector> {
    let n = space.n();
    if n < 2 {
        return invalid("walk spectrum needs n >= 2");
    }
    let nn = (n * n) as f64;
    let entries = space
        .iter()
        .map(|lambda| powu(pn_eigenvalue_numerator(lambda) as f64 / nn, t))
        .collect();
    Ok(SpectralVector {
        space: space.clone(),
        entries: SpectralEntries::Float(entries),
    })
}

fn powu(x: f64, t: u64) -> f64 {
    if t <= i32::MAX as u64 {
        x.powi(t as i32)
    } else {
        x.powf(t as f64)
    }
}

fn check_xi(lambda: &Partition, m: usize, n: usize) -> Result<()> {
    if lambda.n() != n {
        return invalid(format!("partition {lambda} is not a partition of {n}"));
    }
    if 3 * m > n {
        return Err(Error::OutOfValidityRange { n, m });
    }
    Ok(())
}

/// Exact scalar transform of `xi_M` at `lambda`.
pub fn xi_spectrum_entry_exact(lambda: &Partition, m: usize, n: usize) -> Result<BigRational> {
    check_xi(lambda, m, n)?;
    let x = n - lambda.first();
    if x > m {
        return Ok(BigRational::zero());
    }
    let num = lambda.truncate().dimension() * binomial(m, x);
    Ok(BigRational::new(num.into(), lambda.dimension().into()))
}

pub fn xi_spectrum_entry(lambda: &Partition, m: usize, n: usize) -> Result<f64> {
    check_xi(lambda, m, n)?;
    let x = n - lambda.first();
    if x > m {
        return Ok(0.0);
    }
    Ok(lambda.truncate().dimension_f64() * binomial_f64(m, x) / lambda.dimension_f64())
}

/// Transform of the planted measure with Poisson truncation at `cap <= n/3`.
pub fn mu_spectrum_with_cap(
    space: &Arc<PartitionSpace>,
    time: &WalkTime,
    cap: usize,
) -> Result<SpectralVector> {
    let n = space.n();
    if 3 * cap > n {
        return Err(Error::OutOfValidityRange { n, m: cap });
    }
    let w = truncated_poisson_weights(time.gamma(), cap);
    let entries = space
        .partitions()
        .par_iter()
        .map(|lambda| {
            let x = n - lambda.first();
            if x > cap {
                return 0.0;
            }
            let ratio = lambda.truncate().dimension_f64() / lambda.dimension_f64();
            let mix: f64 = crate::combin::kahan_sum((x..=cap).map(|l| w[l] * binomial_f64(l, x)));
            ratio * mix
        })
        .collect();
    Ok(SpectralVector {
        space: space.clone(),
        entries: SpectralEntries::Float(entries),
    })
}

/// Transform of the planted measure at the default cap `min(floor((ln n)^2), floor(n/3))`.
pub fn mu_spectrum(space: &Arc<PartitionSpace>, time: &WalkTime) -> Result<SpectralVector> {
    mu_spectrum_with_cap(space, time, mu_cap(space.n()))
}

/// Per-`n` cache of `d_lambda^2` and step eigenvalues, so sweeps over
/// `t` do not recompute dimensions.
#[derive(Debug, Clone)]
pub struct SpectralTable {
    space: Arc<PartitionSpace>,
    dim_sq: Vec<f64>,
    eigen: Vec<f64>,
}

impl SpectralTable {
    pub fn new(space: Arc<PartitionSpace>) -> Result<Self> {
        let n = space.n();
        if n < 2 {
            return invalid("spectral table needs n >= 2");
        }
        let nn = (n * n) as f64;
        let (dim_sq, eigen) = space
            .partitions()
            .par_iter()
            .map(|lambda| {
                let d = lambda.dimension_f64();
                (d * d, pn_eigenvalue_numerator(lambda) as f64 / nn)
            })
            .unzip();
        Ok(Self {
            space,
            dim_sq,
            eigen,
        })
    }

    pub fn space(&self) -> &Arc<PartitionSpace> {
        &self.space
    }

    pub fn dim_sq(&self) -> &[f64] {
        &self.dim_sq
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen
    }

    /// `sum_{lambda != (n)} d_lambda^2 (a_lambda^t - mu_lambda)^2`.
    pub fn l2_distance_sq(&self, t: u64, other: &SpectralVector) -> Result<f64> {
        if other.n() != self.space.n() {
            return invalid("spectral vectors over different n");
        }
        let terms: Vec<f64> = (1..self.dim_sq.len())
            .into_par_iter()
            .map(|i| {
                let diff = powu(self.eigen[i], t) - other.get_f64(i);
                self.dim_sq[i] * diff * diff
            })
            .collect();
        Ok(tree_sum(&terms))
    }

    /// `1/2 sqrt(sum_{lambda != (n)} d^2 (a^t - mu)^2)` against the planted measure at `cap`.
    pub fn plancherel_tv_bound(&self, time: &WalkTime, cap: usize) -> Result<f64> {
        let mu = mu_spectrum_with_cap(&self.space, time, cap)?;
        Ok(0.5 * self.l2_distance_sq(time.t, &mu)?.sqrt())
    }

    /// `sum_{lambda_1 < n - (ln n)^2} d_lambda^2 |a_lambda|^{2t}`.
    pub fn tail_sum(&self, t: u64) -> f64 {
        let n = self.space.n();
        let max_gap = log_squared_floor(n);
        if max_gap >= n {
            return 0.0;
        }
        let terms: Vec<f64> = self
            .space
            .partitions()
            .par_iter()
            .enumerate()
            .map(|(i, lambda)| {
                if n - lambda.first() > max_gap {
                    self.dim_sq[i] * powu(self.eigen[i] * self.eigen[i], t)
                } else {
                    0.0
                }
            })
            .collect();
        tree_sum(&terms)
    }
}

pub fn plancherel_tv_bound(space: &Arc<PartitionSpace>, time: &WalkTime) -> Result<f64> {
    SpectralTable::new(space.clone())?.plancherel_tv_bound(time, mu_cap(space.n()))
}

pub fn tail_sum(space: &Arc<PartitionSpace>, t: u64) -> Result<f64> {
    Ok(SpectralTable::new(space.clone())?.tail_sum(t))
}

/// `sum_lambda d_lambda^2 a_lambda^{2t}`, exact. Equals `n! sum_sigma P[X_t = sigma]^2`.
pub fn walk_l2_mass_exact(space: &Arc<PartitionSpace>, t: u64) -> Result<BigRational> {
    let n = space.n();
    if n < 2 {
        return invalid("walk spectrum needs n >= 2");
    }
    let mut num = BigInt::zero();
    for lambda in space.iter() {
        let d: BigUint = lambda.dimension();
        let a = BigInt::from(pn_eigenvalue_numerator(lambda)).pow(2 * t);
        num += BigInt::from(&d * &d) * a;
    }
    Ok(BigRational::new(
        num,
        BigInt::from((n * n) as u64).pow(2 * t),
    ))
}
