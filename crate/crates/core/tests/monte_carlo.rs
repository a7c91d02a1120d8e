//! Statistical checks of the simulator against exact laws. All runs use fixed
//! seeds, so each assertion is deterministic.

use std::sync::Arc;

use rtwalk::exact_oracle::{exact_tv, ClassKernel};
use rtwalk::graph::{giant_event_frequency, run_giant_batch};
use rtwalk::measures::{
    cutoff_time, default_nu_cap, expected_hitting_time, nu_class_distribution,
    uniform_fixed_point_law_f64, WalkTime,
};
use rtwalk::simulator::{
    chi_square_goodness_of_fit, par_replicas, run_coupled_marking, run_fixed_time,
    run_fixed_time_conditioned, run_hitting_batch, run_marking, run_until_all_touched,
    tv_lower_bound_via_statistic, MarkingScheme,
};
use rtwalk::{perm, ClassDistribution, PartitionSpace};

fn space(n: usize) -> Arc<PartitionSpace> {
    Arc::new(PartitionSpace::new(n).unwrap())
}

fn within_sigmas(hits: u64, trials: u64, p: f64, sigmas: f64) -> bool {
    let freq = hits as f64 / trials as f64;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    (freq - p).abs() <= sigmas * se
}

#[test]
fn single_card_untouched_probability() {
    let (n, t, reps) = (10usize, 15u64, 200_000u64);
    let hits: u64 = par_replicas(101, reps, |_, rng| {
        !run_fixed_time(n, t, rng).is_touched(0) as u64
    })
    .into_iter()
    .sum();
    let p = ((n as f64 - 1.0) / n as f64).powi(2 * t as i32);
    assert!(within_sigmas(hits, reps, p, 4.0), "{hits} / {reps} vs {p}");
}

#[test]
fn mean_hitting_time() {
    let n = 20;
    let batch = run_hitting_batch(n, 20_000, 102).unwrap();
    let exact = expected_hitting_time(n, 1e-12).unwrap();
    assert!(
        (batch.mean_tau() / exact - 1.0).abs() <= 0.05,
        "{} vs {exact}",
        batch.mean_tau()
    );
    assert!(batch.records.iter().all(|r| r.fixed_before_tau >= 1));
}

#[test]
fn class_histogram_matches_exact_law() {
    let (n, t, reps) = (6usize, 10u64, 1_000_000u64);
    let s = space(n);
    let exact = ClassKernel::new(s.clone())
        .unwrap()
        .evolve(&ClassDistribution::identity(s.clone()), t);
    let classes = par_replicas(103, reps, |_, rng| {
        let w = run_fixed_time(n, t, rng);
        s.index_of(&perm::cycle_type(w.perm())).unwrap()
    });
    let mut counts = vec![0u64; s.len()];
    for c in classes {
        counts[c] += 1;
    }
    for (i, &c) in counts.iter().enumerate() {
        assert!(
            within_sigmas(c, reps, exact.probs()[i], 4.0),
            "class {:?}",
            s.get(i)
        );
    }
}

#[test]
fn fixed_points_at_cutoff_follow_the_planted_measure() {
    let n = 40;
    let time = WalkTime::from_offset(n, 0).unwrap();
    let s = space(n);
    let x = ClassKernel::new(s.clone())
        .unwrap()
        .evolve(&ClassDistribution::identity(s.clone()), time.t);
    let nu = nu_class_distribution(&s, &time, default_nu_cap(n));
    let budget = exact_tv(&x, &nu).unwrap();
    let samples = par_replicas(104, 100_000, |_, rng| {
        run_fixed_time(n, time.t, rng).fixed_point_count()
    });
    let stat =
        tv_lower_bound_via_statistic(&samples, |&f| f, &nu.fixed_point_marginal(), 100, 1).unwrap();
    assert!(
        stat.value <= budget + 0.01,
        "{} vs budget {budget}",
        stat.value
    );
}

#[test]
fn stopped_law_for_three_cards_by_simulation() {
    let reps = 10_000_000u64;
    let ranks = par_replicas(105, reps, |_, rng| {
        perm::rank(&run_until_all_touched(3, rng).unwrap().x_tau) as u8
    });
    let mut counts = [0u64; 6];
    for r in ranks {
        counts[r as usize] += 1;
    }
    let golden = [
        1.0 / 20.0,
        5.0 / 36.0,
        5.0 / 36.0,
        4.0 / 15.0,
        4.0 / 15.0,
        5.0 / 36.0,
    ];
    for (r, (&c, &p)) in counts.iter().zip(&golden).enumerate() {
        assert!(within_sigmas(c, reps, p, 4.0), "{:?}", perm::unrank(3, r));
    }
}

#[test]
fn walk_avoiding_two_cards_is_the_smaller_walk() {
    let (n, t) = (6usize, 4u64);
    let s4 = space(4);
    let exact = ClassKernel::new(s4.clone())
        .unwrap()
        .evolve(&ClassDistribution::identity(s4.clone()), t);
    let classes = par_replicas(106, 40_000, |_, rng| {
        let w = run_fixed_time_conditioned(
            n,
            t,
            |w| !w.is_touched(4) && !w.is_touched(5),
            100_000,
            rng,
        )
        .unwrap();
        assert_eq!(&w.perm()[4..], &[4, 5]);
        s4.index_of(&perm::cycle_type(&w.perm()[..4])).unwrap()
    });
    let mut counts = vec![0u64; s4.len()];
    for c in classes {
        counts[c] += 1;
    }
    let report = chi_square_goodness_of_fit(&counts, exact.probs()).unwrap();
    assert!(report.p_value > 1e-3, "{report:?}");
}

/// Law on `S_m` of `m` cards after `t` steps, conditioned on every card being touched.
fn conditioned_on_all_touched(m: usize, t: u64) -> Vec<f64> {
    let total: usize = (1..=m).product();
    let masks = 1usize << m;
    let mut cur = vec![0.0; total * masks];
    cur[0] = 1.0;
    for _ in 0..t {
        let mut next = vec![0.0; total * masks];
        for r in 0..total {
            let p = perm::unrank(m, r);
            for mask in 0..masks {
                let w = cur[r * masks + mask];
                if w == 0.0 {
                    continue;
                }
                for i in 0..m {
                    for j in 0..m {
                        let mut q = p.clone();
                        q.swap(i, j);
                        next[perm::rank(&q) * masks + (mask | 1 << i | 1 << j)] +=
                            w / (m * m) as f64;
                    }
                }
            }
        }
        cur = next;
    }
    let full: Vec<f64> = (0..total).map(|r| cur[r * masks + masks - 1]).collect();
    let z: f64 = full.iter().sum();
    full.into_iter().map(|x| x / z).collect()
}

#[test]
fn exactly_one_untouched_card_leaves_a_near_uniform_rest() {
    let (n, t) = (6usize, 6u64);
    let law = conditioned_on_all_touched(5, t);
    let ranks = par_replicas(107, 100_000, |_, rng| {
        let w = run_fixed_time_conditioned(n, t, |w| w.untouched() == [0], 100_000, rng).unwrap();
        let rest: Vec<u32> = w.perm()[1..].iter().map(|&x| x - 1).collect();
        perm::rank(&rest)
    });
    let mut counts = vec![0u64; 120];
    for r in ranks {
        counts[r] += 1;
    }
    let report = chi_square_goodness_of_fit(&counts, &law).unwrap();
    assert!(report.p_value > 1e-3, "{report:?}");
    // the conditioned law itself approaches uniform on S_5
    let tv_at = |t: u64| -> f64 {
        0.5 * conditioned_on_all_touched(5, t)
            .iter()
            .map(|p| (p - 1.0 / 120.0).abs())
            .sum::<f64>()
    };
    let sweep: Vec<f64> = [6, 10, 15, 20, 30].into_iter().map(tv_at).collect();
    for w in sweep.windows(2) {
        assert!(w[1] < w[0], "{sweep:?}");
    }
    assert!(sweep[4] < 0.01, "{sweep:?}");
}

#[test]
fn q_marking_is_uniform_with_partial_marks() {
    let n = 6;
    let reps = 300_000;
    let runs = par_replicas(108, reps, |_, rng| {
        run_marking(n, Some(4), MarkingScheme::Q, rng).unwrap()
    });
    let mut counts = vec![0u64; 720];
    let mut regular = 0;
    for r in &runs {
        counts[perm::rank(&r.perm)] += 1;
        regular += (!r.q_fallback) as u64;
    }
    assert!(regular > 0 && regular < reps);
    let report = chi_square_goodness_of_fit(&counts, &vec![1.0 / 720.0; 720]).unwrap();
    assert!(report.p_value > 1e-3, "{report:?}");
}

#[test]
fn coupling_failure_is_rare_at_n_100() {
    let n = 100;
    let reps = 20_000;
    let fails = par_replicas(109, reps, |_, rng| {
        !run_coupled_marking(n, None, rng).unwrap().agree() as u64
    })
    .into_iter()
    .sum::<u64>();
    assert!(
        (fails as f64 / reps as f64) < 5.0 / n as f64,
        "{fails} failures"
    );
}

#[test]
fn statistic_distance_of_reference_samples_is_small() {
    use rand::seq::SliceRandom;
    let n = 50;
    let samples = par_replicas(110, 20_000, |_, rng| {
        let mut p = perm::identity(n);
        p.shuffle(rng);
        perm::fixed_points(&p)
    });
    let stat =
        tv_lower_bound_via_statistic(&samples, |&f| f, &uniform_fixed_point_law_f64(n), 200, 2)
            .unwrap();
    assert!(stat.value < 0.02, "{stat:?}");
    assert!(!stat.low_sample_warning);
}

#[test]
fn largest_component_at_time_n() {
    // 2n i.i.d. endpoints give about n edges: Erdos-Renyi with mean degree 2,
    // giant fraction b solving b = 1 - exp(-2b)
    let n = 2000;
    let records = run_giant_batch(n, n as u64, 200, 111).unwrap();
    let mean = records
        .iter()
        .map(|r| r.largest_component as f64)
        .sum::<f64>()
        / (200.0 * n as f64);
    let mut b: f64 = 0.5;
    for _ in 0..200 {
        b = 1.0 - (-2.0 * b).exp();
    }
    assert!((mean - b).abs() < 0.03, "{mean} vs {b}");
}

#[test]
fn giant_event_late_and_at_cutoff() {
    let n = 50;
    let late = (2.0 * n as f64 * (n as f64).ln()) as u64;
    assert!(giant_event_frequency(n, late, 100_000, 112).unwrap() <= 1e-3);
    let n = 200;
    let freq = giant_event_frequency(n, cutoff_time(n), 20_000, 113).unwrap();
    assert!(freq < 0.1, "{freq}");
}

#[test]
fn restricted_walk_fixed_points_look_uniform() {
    let n = 100;
    let records = run_giant_batch(n, cutoff_time(n), 100_000, 114).unwrap();
    let stat = tv_lower_bound_via_statistic(
        &records,
        |r| r.restricted_fixed_points,
        &uniform_fixed_point_law_f64(n),
        100,
        3,
    )
    .unwrap();
    assert!(stat.value <= 0.05, "{stat:?}");
}

#[test]
fn batches_do_not_depend_on_thread_count() {
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let a = one.install(|| run_hitting_batch(30, 2_000, 115).unwrap());
    let b = four.install(|| run_hitting_batch(30, 2_000, 115).unwrap());
    assert_eq!(a, b);
}
