//! Closed-form reference measures and touch-event probabilities.
//!
//! Times are measured relative to the cutoff `floor(n ln n / 2)`: a
//! [`WalkTime`] with offset `t'` sits at step `floor(n ln n / 2) + t'` and
//! carries intensity `gamma = exp(-2 t' / n)`. The planted-fixed-point measure
//! draws `M` from a Poisson(`gamma`) law truncated at `cap`, fixes a uniform
//! `M`-subset, and permutes the remaining points uniformly.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Pow, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::combin::{binomial, derangements, factorial, kahan_sum, KahanSum};
use crate::distribution::{inverse_centralizer_f64, ClassDistribution};
use crate::error::{invalid, Result};
use crate::partitions::PartitionSpace;

/// Largest `n` for which the float probability helpers route through exact rationals.
pub const EXACT_N_MAX: usize = 64;

/// `floor(n ln n / 2)`, natural log.
pub fn cutoff_time(n: usize) -> u64 {
    if n <= 1 {
        return 0;
    }
    let nf = n as f64;
    (nf * nf.ln() / 2.0).floor() as u64
}

pub fn gamma(n: usize, t_prime: i64) -> f64 {
    (-2.0 * t_prime as f64 / n as f64).exp()
}

/// A step count expressed both absolutely and as an offset from cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct WalkTime {
    pub n: usize,
    pub t: u64,
    pub t_prime: i64,
}

impl WalkTime {
    pub fn from_offset(n: usize, t_prime: i64) -> Result<Self> {
        if n == 0 {
            return invalid("n must be at least 1");
        }
        let t = cutoff_time(n) as i64 + t_prime;
        if t < 0 {
            return invalid(format!(
                "t' = {t_prime} puts the walk before time 0 (cutoff is {})",
                cutoff_time(n)
            ));
        }
        Ok(Self {
            n,
            t: t as u64,
            t_prime,
        })
    }

    pub fn from_steps(n: usize, t: u64) -> Result<Self> {
        if n == 0 {
            return invalid("n must be at least 1");
        }
        Ok(Self {
            n,
            t,
            t_prime: t as i64 - cutoff_time(n) as i64,
        })
    }

    pub fn gamma(&self) -> f64 {
        gamma(self.n, self.t_prime)
    }
}

/// Default truncation for the planted measure: `min(floor((ln n)^2), n)`.
pub fn default_nu_cap(n: usize) -> usize {
    log_squared_floor(n).min(n)
}

/// Truncation used for the spectral comparison measure: `min(floor((ln n)^2), floor(n/3))`.
pub fn mu_cap(n: usize) -> usize {
    log_squared_floor(n).min(n / 3)
}

pub fn log_squared_floor(n: usize) -> usize {
    if n <= 1 {
        return 0;
    }
    let l = (n as f64).ln();
    (l * l).floor() as usize
}

/// Poisson(`gamma`) masses on `0..=cap`, renormalized to sum to one.
pub fn truncated_poisson_weights(gamma: f64, cap: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(cap + 1);
    // unnormalized gamma^k / k!; the common e^{-gamma} cancels
    let mut term = 1.0;
    w.push(term);
    for k in 1..=cap {
        term *= gamma / k as f64;
        w.push(term);
    }
    let total = kahan_sum(w.iter().copied());
    w.iter_mut().for_each(|x| *x /= total);
    w
}

pub fn truncated_poisson_pmf(gamma: f64, cap: usize, x: usize) -> Result<f64> {
    if x > cap {
        return invalid(format!("x = {x} exceeds the truncation cap {cap}"));
    }
    if gamma.is_nan() || gamma < 0.0 {
        return invalid("gamma must be non-negative");
    }
    Ok(truncated_poisson_weights(gamma, cap)[x])
}

/// Probability the planted measure assigns to one permutation with `f` fixed points.
pub fn nu_pmf_by_fixed_count(n: usize, time: &WalkTime, f: usize, cap: usize) -> Result<f64> {
    if f > n {
        return invalid(format!("fixed-point count {f} exceeds n = {n}"));
    }
    let w = truncated_poisson_weights(time.gamma(), cap);
    // w_r * C(f, r) / (C(n, r) (n - r)!) = w_r * f!/(f-r)! / n!
    let mut falling = 1.0;
    let mut acc = KahanSum::new();
    for (r, &wr) in w.iter().enumerate().take(f.min(cap) + 1) {
        if r > 0 {
            falling *= (f + 1 - r) as f64;
        }
        acc.add(wr * falling);
    }
    let log_nfact = crate::combin::ln_factorial(n);
    Ok(acc.value() * (-log_nfact).exp())
}

/// Class law of the planted measure with Poisson truncation at `cap`.
pub fn nu_class_distribution(
    space: &Arc<PartitionSpace>,
    time: &WalkTime,
    cap: usize,
) -> ClassDistribution {
    let n = space.n();
    let w = truncated_poisson_weights(time.gamma(), cap.min(n));
    // sum_r w_r f!/(f-r)!, indexed by f
    let falling_mix: Vec<f64> = (0..=n)
        .map(|f| {
            let mut falling = 1.0;
            let mut acc = KahanSum::new();
            for (r, &wr) in w.iter().enumerate().take(f.min(w.len() - 1) + 1) {
                if r > 0 {
                    falling *= (f + 1 - r) as f64;
                }
                acc.add(wr * falling);
            }
            acc.value()
        })
        .collect();
    let probs = space
        .iter()
        .map(|lambda| inverse_centralizer_f64(lambda) * falling_mix[lambda.fixed_point_count()])
        .collect();
    ClassDistribution::from_raw(space.clone(), probs)
}

/// One draw from the planted measure, as an array `perm[k] = sigma(k)`.
pub fn sample_nu<R: Rng + ?Sized>(n: usize, time: &WalkTime, cap: usize, rng: &mut R) -> Vec<u32> {
    let w = truncated_poisson_weights(time.gamma(), cap.min(n));
    sample_planted(n, &w, rng)
}

pub(crate) fn sample_planted<R: Rng + ?Sized>(n: usize, weights: &[f64], rng: &mut R) -> Vec<u32> {
    let u: f64 = rng.random();
    let mut m = weights.len() - 1;
    let mut cum = 0.0;
    for (k, &wk) in weights.iter().enumerate() {
        cum += wk;
        if u < cum {
            m = k;
            break;
        }
    }
    let mut labels: Vec<u32> = (0..n as u32).collect();
    labels.shuffle(rng);
    // labels[..m] is a uniform m-subset; permute the complement uniformly
    let mut sources = labels[m..].to_vec();
    sources.sort_unstable();
    let mut targets = sources.clone();
    targets.shuffle(rng);
    let mut perm: Vec<u32> = (0..n as u32).collect();
    for (src, dst) in sources.into_iter().zip(targets) {
        perm[src as usize] = dst;
    }
    perm
}

/// Probability that a uniform permutation of `n` has exactly `k` fixed points.
pub fn uniform_fixed_point_law(n: usize, k: usize) -> Result<BigRational> {
    if k > n {
        return invalid(format!("k = {k} exceeds n = {n}"));
    }
    let d = derangements(n - k);
    Ok(BigRational::new(
        BigInt::from(d[n - k].clone()),
        BigInt::from(factorial(k) * factorial(n - k)),
    ))
}

/// The whole fixed-point law of a uniform permutation, `0..=n`, in floating point.
pub fn uniform_fixed_point_law_f64(n: usize) -> Vec<f64> {
    // D_m / m! = sum_{j <= m} (-1)^j / j!
    let mut derange_ratio = vec![0.0; n + 1];
    let mut term = 1.0;
    let mut acc = 0.0;
    for (m, slot) in derange_ratio.iter_mut().enumerate() {
        if m > 0 {
            term *= -1.0 / m as f64;
        }
        acc += term;
        *slot = acc;
    }
    let mut kfact = 1.0;
    (0..=n)
        .map(|k| {
            if k > 0 {
                kfact *= k as f64;
            }
            derange_ratio[n - k] / kfact
        })
        .collect()
}

/// `P[G(T)] = ((n - |T|)/n)^{2t}`, exact.
pub fn prob_untouched_superset_exact(n: usize, t: u64, size_t: usize) -> Result<BigRational> {
    if size_t > n || n == 0 {
        return invalid(format!(
            "|T| = {size_t} must lie in 0..=n with n >= 1 (n = {n})"
        ));
    }
    let base = BigRational::new(BigInt::from(n - size_t), BigInt::from(n));
    Ok(Pow::pow(base, 2 * t))
}

pub fn prob_untouched_superset(n: usize, t: u64, size_t: usize) -> Result<f64> {
    if size_t > n || n == 0 {
        return invalid(format!(
            "|T| = {size_t} must lie in 0..=n with n >= 1 (n = {n})"
        ));
    }
    Ok(((n - size_t) as f64 / n as f64).powf(2.0 * t as f64))
}

/// `P[F(M)]` by inclusion-exclusion, exact:
/// `sum_{s=0}^{n-M} (-1)^s C(n-M, s) ((n-M-s)/n)^{2t}`.
pub fn prob_untouched_exactly_exact(n: usize, t: u64, m: usize) -> Result<BigRational> {
    bonferroni_partial_exact(n, t, m, n - m.min(n))
}

/// Inclusion-exclusion truncated after the `s = depth` term. Even depths
/// overestimate `P[F(M)]` and odd depths underestimate it.
pub fn bonferroni_partial_exact(n: usize, t: u64, m: usize, depth: usize) -> Result<BigRational> {
    if m > n || n == 0 {
        return invalid(format!("M = {m} must lie in 0..=n with n >= 1 (n = {n})"));
    }
    let free = n - m;
    let denom = BigInt::from(BigUint::from(n).pow(2 * t));
    let mut num = BigInt::zero();
    for s in 0..=depth.min(free) {
        let term =
            BigInt::from(binomial(free, s)) * BigInt::from(BigUint::from(free - s).pow(2 * t));
        if s % 2 == 0 {
            num += term;
        } else {
            num -= term;
        }
    }
    Ok(BigRational::new(num, denom))
}

pub fn prob_untouched_exactly(n: usize, t: u64, m: usize) -> Result<f64> {
    if m > n || n == 0 {
        return invalid(format!("M = {m} must lie in 0..=n with n >= 1 (n = {n})"));
    }
    if n <= EXACT_N_MAX {
        return Ok(prob_untouched_exactly_exact(n, t, m)?
            .to_f64()
            .unwrap_or(0.0));
    }
    let free = n - m;
    let mut acc = KahanSum::new();
    let mut binom = 1.0;
    for s in 0..=free {
        if s > 0 {
            binom *= (free + 1 - s) as f64 / s as f64;
        }
        let term = binom * ((free - s) as f64 / n as f64).powf(2.0 * t as f64);
        acc.add(if s % 2 == 0 { term } else { -term });
    }
    Ok(acc.value().clamp(0.0, 1.0))
}

/// Exact expected hitting time `E[tau] = sum_{t >= 0} P[tau > t]`, with the series cut
/// once the summand drops below `tol`.
pub fn expected_hitting_time(n: usize, tol: f64) -> Result<f64> {
    if n < 2 {
        return invalid("hitting time needs n >= 2");
    }
    let mut acc = KahanSum::new();
    let mut t = 0u64;
    loop {
        let tail = 1.0 - prob_untouched_exactly(n, t, 0)?;
        acc.add(tail);
        if t > n as u64 && tail < tol {
            break;
        }
        t += 1;
    }
    Ok(acc.value())
}

/// `d_TV(Pois(a), Pois(b))`, summed until both remaining tails are below `1e-14`.
pub fn poisson_tv(a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0) || !a.is_finite() || !b.is_finite() {
        return invalid("Poisson means must be finite and non-negative");
    }
    let mut pa = (-a).exp();
    let mut pb = (-b).exp();
    let (mut cum_a, mut cum_b) = (0.0, 0.0);
    let mut acc = KahanSum::new();
    let mut k = 0usize;
    loop {
        acc.add((pa - pb).abs());
        cum_a += pa;
        cum_b += pb;
        k += 1;
        let past_modes = k as f64 > a.max(b);
        if past_modes && 1.0 - cum_a < 1e-14 && 1.0 - cum_b < 1e-14 {
            break;
        }
        if k > 100_000 {
            break;
        }
        pa *= a / k as f64;
        pb *= b / k as f64;
    }
    Ok((0.5 * acc.value()).clamp(0.0, 1.0))
}
