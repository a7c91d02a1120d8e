//! Character ratios at a transposition and the Fourier eigenvalue of one walk step.
//!
//! For `lambda ⊢ n` the normalized character at a transposition is
//! `sum_i [C(lambda_i, 2) - C(lambda'_i, 2)] / C(n, 2)`, and the step law
//! (identity with probability `1/n`, each transposition with `2/n^2`) acts on
//! the irreducible `lambda` as the scalar `1/n + (n-1)/n * ratio`. That scalar
//! simplifies to `(n + 2 s) / n^2` with `s` the content sum of the diagram, so
//! every eigenvalue is an integer over `n^2`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{invalid, Result};
use crate::partitions::Partition;

/// `chi_lambda(tau) / d_lambda` for a transposition `tau`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterRatio {
    value: BigRational,
}

impl CharacterRatio {
    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

/// `sum_i C(lambda_i, 2) - C(lambda'_i, 2)`, equal to the sum of cell contents `j - i`.
pub fn content_sum(lambda: &Partition) -> i64 {
    lambda
        .parts()
        .iter()
        .enumerate()
        .map(|(row, &len)| {
            let len = len as i64;
            let row = row as i64;
            len * (len - 1) / 2 - row * len
        })
        .sum()
}

pub fn transposition_character_ratio(lambda: &Partition) -> Result<CharacterRatio> {
    let n = lambda.n();
    if n < 2 {
        return invalid(format!(
            "character ratio at a transposition needs n >= 2, got {n}"
        ));
    }
    let pairs = (n * (n - 1) / 2) as i64;
    Ok(CharacterRatio {
        value: BigRational::new(BigInt::from(content_sum(lambda)), BigInt::from(pairs)),
    })
}

/// Numerator of the step eigenvalue over the common denominator `n^2`.
pub fn pn_eigenvalue_numerator(lambda: &Partition) -> i64 {
    lambda.n() as i64 + 2 * content_sum(lambda)
}

fn check_n(lambda: &Partition, n: usize) -> Result<()> {
    if n < 2 {
        return invalid(format!("step eigenvalue needs n >= 2, got {n}"));
    }
    if lambda.n() != n {
        return invalid(format!("partition {lambda} is not a partition of {n}"));
    }
    Ok(())
}

/// Exact scalar `a_lambda` with `P_n^(lambda) = a_lambda * Id`.
pub fn pn_eigenvalue(lambda: &Partition, n: usize) -> Result<BigRational> {
    check_n(lambda, n)?;
    Ok(BigRational::new(
        BigInt::from(pn_eigenvalue_numerator(lambda)),
        BigInt::from((n * n) as i64),
    ))
}

pub fn pn_eigenvalue_f64(lambda: &Partition, n: usize) -> Result<f64> {
    check_n(lambda, n)?;
    Ok(pn_eigenvalue_numerator(lambda) as f64 / (n * n) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn ratio_examples() {
        for n in 2..10 {
            assert!(transposition_character_ratio(&Partition::row(n))
                .unwrap()
                .value()
                .is_one());
            assert_eq!(
                *transposition_character_ratio(&Partition::column(n))
                    .unwrap()
                    .value(),
                q(-1, 1)
            );
        }
        let four = transposition_character_ratio(&p(&[3, 1])).unwrap();
        assert_eq!(*four.value(), q(1, 3));
        // standard representation: (fix(tau) - 1) / (n - 1)
        for n in 3..12u32 {
            let r = transposition_character_ratio(&p(&[n - 1, 1])).unwrap();
            assert_eq!(*r.value(), q(n as i64 - 3, n as i64 - 1));
        }
        assert!(transposition_character_ratio(&p(&[1])).is_err());
        assert!(transposition_character_ratio(&p(&[2, 2]))
            .unwrap()
            .value()
            .is_zero());
    }

    #[test]
    fn eigenvalue_examples() {
        assert!(pn_eigenvalue(&Partition::row(7), 7).unwrap().is_one());
        assert_eq!(pn_eigenvalue(&Partition::column(4), 4).unwrap(), q(-1, 2));
        assert_eq!(pn_eigenvalue(&p(&[3, 1]), 4).unwrap(), q(1, 2));
        assert!(pn_eigenvalue(&p(&[1]), 1).is_err());
        assert!(pn_eigenvalue(&p(&[2, 1]), 4).is_err());
        assert_eq!(pn_eigenvalue_f64(&p(&[3, 1]), 4).unwrap(), 0.5);
    }
}
