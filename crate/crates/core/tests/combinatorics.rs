use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rtwalk::combin::factorial;
use rtwalk::{enumerate_partitions, Partition, PartitionSpace};

/// Euler's pentagonal recurrence.
fn partition_counts(max: usize) -> Vec<i128> {
    let mut p = vec![0i128; max + 1];
    p[0] = 1;
    for n in 1..=max {
        let mut k = 1i64;
        loop {
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > n {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            p[n] += sign * p[n - g1];
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= n {
                p[n] += sign * p[n - g2];
            }
            k += 1;
        }
    }
    p
}

/// Standard Young tableaux by removing corners.
fn syt_count(parts: &[u32], memo: &mut HashMap<Vec<u32>, BigUint>) -> BigUint {
    if parts.is_empty() {
        return BigUint::one();
    }
    if let Some(v) = memo.get(parts) {
        return v.clone();
    }
    let mut total = BigUint::zero();
    for r in 0..parts.len() {
        let is_corner = r + 1 == parts.len() || parts[r + 1] < parts[r];
        if is_corner {
            let mut smaller = parts.to_vec();
            smaller[r] -= 1;
            if smaller[r] == 0 {
                smaller.pop();
            }
            total += syt_count(&smaller, memo);
        }
    }
    memo.insert(parts.to_vec(), total.clone());
    total
}

#[test]
fn partition_counts_match_pentagonal_recurrence() {
    let p = partition_counts(60);
    for (n, &count) in p.iter().enumerate().skip(1) {
        assert_eq!(
            PartitionSpace::new(n).unwrap().len() as i128,
            count,
            "p({n})"
        );
    }
    assert_eq!(p[60], 966_467);
}

#[test]
fn enumeration_is_strictly_descending_and_valid() {
    for n in 1..=25 {
        let parts = enumerate_partitions(n).unwrap();
        assert_eq!(parts[0], Partition::row(n));
        assert_eq!(*parts.last().unwrap(), Partition::column(n));
        for w in parts.windows(2) {
            assert!(w[0].parts() > w[1].parts());
        }
        for p in &parts {
            assert_eq!(p.n(), n);
        }
    }
}

#[test]
fn sum_of_squared_dimensions_is_n_factorial() {
    for n in 1..=30 {
        let s: BigUint = PartitionSpace::new(n)
            .unwrap()
            .iter()
            .map(|l| {
                let d = l.dimension();
                &d * &d
            })
            .sum();
        assert_eq!(s, factorial(n), "n = {n}");
    }
}

#[test]
fn class_sizes_sum_to_n_factorial() {
    for n in 1..=30 {
        let s: BigUint = PartitionSpace::new(n)
            .unwrap()
            .iter()
            .map(|l| l.class_size())
            .sum();
        assert_eq!(s, factorial(n));
    }
}

#[test]
fn hook_formula_matches_branching_rule() {
    let mut memo = HashMap::new();
    for n in 1..=16 {
        for lambda in PartitionSpace::new(n).unwrap().iter() {
            assert_eq!(
                lambda.dimension(),
                syt_count(lambda.parts(), &mut memo),
                "{lambda:?}"
            );
        }
    }
}

fn partition_strategy() -> impl Strategy<Value = Partition> {
    prop::collection::vec(1u32..12, 1..10).prop_map(Partition::from_cycle_lengths)
}

proptest! {
    #[test]
    fn conjugation_is_an_involution(p in partition_strategy()) {
        prop_assert_eq!(p.conjugate().conjugate(), p.clone());
        prop_assert_eq!(p.conjugate().n(), p.n());
        prop_assert_eq!(p.conjugate().dimension(), p.dimension());
    }

    #[test]
    fn float_dimension_tracks_exact(p in partition_strategy()) {
        let exact: f64 = p.dimension().to_string().parse().unwrap();
        prop_assert!((p.dimension_f64() / exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn display_round_trips(p in partition_strategy()) {
        let back: Partition = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn rank_agrees_with_enumeration_order(n in 1usize..22, seed in 0usize..1000) {
        let space = PartitionSpace::new(n).unwrap();
        let idx = seed % space.len();
        let lambda = space.get(idx);
        prop_assert_eq!(space.rank(lambda.parts()), Some(idx));
    }
}
