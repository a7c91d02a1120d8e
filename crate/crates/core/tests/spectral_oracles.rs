use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use rtwalk::characters::pn_eigenvalue;
use rtwalk::combin::factorial;
use rtwalk::distribution::inverse_centralizer_f64;
use rtwalk::exact_oracle::{full_group_convolution, ClassKernel};
use rtwalk::measures::{mu_cap, nu_class_distribution, WalkTime};
use rtwalk::spectral::{mu_spectrum, walk_l2_mass_exact, xi_spectrum_entry_exact, SpectralTable};
use rtwalk::{perm, ClassDistribution, Partition, PartitionSpace};

fn space(n: usize) -> Arc<PartitionSpace> {
    Arc::new(PartitionSpace::new(n).unwrap())
}

fn rat(x: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

#[test]
fn parseval_holds_exactly() {
    for n in 2..=6 {
        let s = space(n);
        for t in 0..=12 {
            let f = full_group_convolution(n, t).unwrap();
            let lhs = rat(factorial(n)) * f.sum_of_squares();
            assert_eq!(lhs, walk_l2_mass_exact(&s, t).unwrap(), "n = {n}, t = {t}");
        }
    }
}

#[test]
fn standard_and_sign_coefficients_match_eigenvalues() {
    for n in 2..=6 {
        for t in 0..=10 {
            let f = full_group_convolution(n, t).unwrap();
            let mut standard = BigRational::zero();
            let mut sign = BigRational::zero();
            for (r, num) in f.numerators().iter().enumerate() {
                let p = perm::unrank(n, r);
                let prob = BigRational::new(num.clone().into(), f.denominator().clone().into());
                let chi_std = perm::fixed_points(&p) as i64 - 1;
                standard += &prob * BigRational::from_integer(chi_std.into());
                sign += &prob * BigRational::from_integer(perm::sign(&p).into());
            }
            let d_std = BigRational::from_integer(((n - 1) as i64).into());
            let a_std = pn_eigenvalue(&Partition::new(vec![n as u32 - 1, 1]).unwrap(), n).unwrap();
            let a_sign = pn_eigenvalue(&Partition::column(n), n).unwrap();
            assert_eq!(standard / d_std, a_std.pow(t as u32), "n = {n}, t = {t}");
            assert_eq!(sign, a_sign.pow(t as u32));
        }
    }
}

/// Standard Young tableaux, counted by corner removal.
fn syt(parts: &[u32], memo: &mut HashMap<Vec<u32>, BigUint>) -> BigUint {
    if parts.is_empty() {
        return BigUint::one();
    }
    if let Some(v) = memo.get(parts) {
        return v.clone();
    }
    let mut total = BigUint::zero();
    for r in 0..parts.len() {
        if r + 1 == parts.len() || parts[r + 1] < parts[r] {
            let mut smaller = parts.to_vec();
            smaller[r] -= 1;
            if smaller[r] == 0 {
                smaller.pop();
            }
            total += syt(&smaller, memo);
        }
    }
    memo.insert(parts.to_vec(), total.clone());
    total
}

/// Sub-diagrams `nu` of `lambda` with `|nu| = size` such that `lambda / nu` is a horizontal strip.
fn horizontal_strip_inner(lambda: &[u32], size: usize) -> Vec<Vec<u32>> {
    fn rec(
        lambda: &[u32],
        row: usize,
        remaining: usize,
        cur: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if row == lambda.len() {
            if remaining == 0 {
                let mut nu = cur.clone();
                while nu.last() == Some(&0) {
                    nu.pop();
                }
                out.push(nu);
            }
            return;
        }
        // nu_r in [lambda_{r+1}, lambda_r]
        let lo = lambda.get(row + 1).copied().unwrap_or(0);
        for v in lo..=lambda[row] {
            if (v as usize) <= remaining {
                cur.push(v);
                rec(lambda, row + 1, remaining - v as usize, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(lambda, 0, size, &mut Vec::new(), &mut out);
    out
}

/// `K_{lambda, (1^m, n - m)}`: semistandard tableaux with `m` distinct small
/// entries followed by `n - m` copies of the largest.
fn kostka_hook_content(
    lambda: &Partition,
    m: usize,
    memo: &mut HashMap<Vec<u32>, BigUint>,
) -> BigUint {
    horizontal_strip_inner(lambda.parts(), m)
        .into_iter()
        .map(|nu| syt(&nu, memo))
        .sum()
}

#[test]
fn planted_transform_matches_kostka_count() {
    let mut memo = HashMap::new();
    for n in 3..=12 {
        for m in 0..=n / 3 {
            for lambda in space(n).iter() {
                let k = kostka_hook_content(lambda, m, &mut memo);
                let expected = BigRational::new(k.into(), lambda.dimension().into());
                assert_eq!(
                    xi_spectrum_entry_exact(lambda, m, n).unwrap(),
                    expected,
                    "{lambda:?}, m = {m}"
                );
            }
        }
    }
}

#[test]
fn l2_distance_matches_physical_space() {
    for n in [6usize, 9, 12] {
        let s = space(n);
        let kernel = ClassKernel::new(s.clone()).unwrap();
        let table = SpectralTable::new(s.clone()).unwrap();
        for t_prime in [-(n as i64) / 2, 0, n as i64] {
            let time = WalkTime::from_offset(n, t_prime).unwrap();
            let x = kernel.evolve(&ClassDistribution::identity(s.clone()), time.t);
            let mu = nu_class_distribution(&s, &time, mu_cap(n));
            // n! sum_sigma (f - g)^2 over class masses
            let physical: f64 = s
                .iter()
                .zip(x.probs().iter().zip(mu.probs()))
                .map(|(lambda, (a, b))| (a - b) * (a - b) / inverse_centralizer_f64(lambda))
                .sum();
            let spectral = table
                .l2_distance_sq(time.t, &mu_spectrum(&s, &time).unwrap())
                .unwrap();
            assert!(
                (physical - spectral).abs() <= 1e-9 * physical.max(1e-12),
                "n = {n}, t' = {t_prime}: {physical} vs {spectral}"
            );
        }
    }
}

#[test]
fn bound_dominates_exact_distance_on_a_sweep() {
    for n in [8usize, 15, 25] {
        let s = space(n);
        let kernel = ClassKernel::new(s.clone()).unwrap();
        let table = SpectralTable::new(s.clone()).unwrap();
        for t_prime in (-(n as i64)..=2 * n as i64).step_by(n / 4) {
            let time = WalkTime::from_offset(n, t_prime).unwrap();
            let x = kernel.evolve(&ClassDistribution::identity(s.clone()), time.t);
            let mu = nu_class_distribution(&s, &time, mu_cap(n));
            let tv = rtwalk::exact_oracle::exact_tv(&x, &mu).unwrap();
            let bound = table.plancherel_tv_bound(&time, mu_cap(n)).unwrap();
            assert!(
                bound + 1e-9 >= tv,
                "n = {n}, t' = {t_prime}: {bound} < {tv}"
            );
        }
    }
}
