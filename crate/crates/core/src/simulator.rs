//! Monte-Carlo engine for the random transposition walk.
//!
//! Each step draws an ordered pair `(i, j)` i.i.d. uniform on `0..n` and
//! right-multiplies the current permutation by the transposition `(i j)`,
//! which for an image array is a swap of entries `i` and `j`. Both indices
//! count as touched, including when `i == j`.
//!
//! Replica `r` of a batch with seed `s` always uses the ChaCha8 stream
//! `(s, r)`, so batch output does not depend on the number of worker threads.

use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Error, Result};
use crate::perm;

/// Version tag written into every serialized batch record.
pub const SCHEMA_VERSION: u32 = 1;

/// Sample count below which statistic-based TV estimates carry a warning.
pub const MIN_STATISTIC_SAMPLES: usize = 10_000;

/// Deterministic generator for replica `replica` of a batch seeded with `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Runs `f` once per replica in parallel, each with its own stream, and returns the
/// results in replica order.
pub fn par_replicas<T, F>(seed: u64, replicas: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> T + Sync + Send,
{
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r);
            f(r, &mut rng)
        })
        .collect()
}

#[inline]
pub fn draw_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    (rng.random_range(0..n), rng.random_range(0..n))
}

/// Permutation, touched set and step counter of one walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkState {
    perm: Vec<u32>,
    touched: Vec<u64>,
    untouched: usize,
    fixed: usize,
    step: u64,
    swaps: u64,
}

impl WalkState {
    pub fn new(n: usize) -> Self {
        Self {
            perm: perm::identity(n),
            touched: vec![0; n.div_ceil(64)],
            untouched: n,
            fixed: n,
            step: 0,
            swaps: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[u32] {
        &self.perm
    }

    pub fn into_perm(self) -> Vec<u32> {
        self.perm
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Number of steps with `i != j`.
    pub fn swap_count(&self) -> u64 {
        self.swaps
    }

    pub fn fixed_point_count(&self) -> usize {
        self.fixed
    }

    #[inline]
    pub fn is_touched(&self, k: usize) -> bool {
        self.touched[k >> 6] >> (k & 63) & 1 == 1
    }

    pub fn untouched_count(&self) -> usize {
        self.untouched
    }

    pub fn all_touched(&self) -> bool {
        self.untouched == 0
    }

    pub fn untouched(&self) -> Vec<usize> {
        (0..self.n()).filter(|&k| !self.is_touched(k)).collect()
    }

    #[inline]
    fn touch(&mut self, k: usize) {
        let word = &mut self.touched[k >> 6];
        let bit = 1u64 << (k & 63);
        if *word & bit == 0 {
            *word |= bit;
            self.untouched -= 1;
        }
    }

    /// Applies the step with hands `(i, j)`.
    #[inline]
    pub fn apply_pair(&mut self, i: usize, j: usize) {
        self.touch(i);
        self.touch(j);
        self.step += 1;
        if i != j {
            let p = &mut self.perm;
            let before = (p[i] as usize == i) as usize + (p[j] as usize == j) as usize;
            p.swap(i, j);
            let after = (p[i] as usize == i) as usize + (p[j] as usize == j) as usize;
            self.fixed = self.fixed + after - before;
            self.swaps += 1;
        }
        debug_assert!(self.n() > 8 || self.small_invariants_hold());
    }

    #[inline]
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> (usize, usize) {
        let (i, j) = draw_pair(self.n(), rng);
        self.apply_pair(i, j);
        (i, j)
    }

    pub fn run<R: Rng + ?Sized>(&mut self, steps: u64, rng: &mut R) {
        for _ in 0..steps {
            self.step(rng);
        }
    }

    /// Allocation-free bijection and parity check for `n <= 64`.
    fn small_invariants_hold(&self) -> bool {
        let p = &self.perm;
        let seen = p.iter().fold(0u64, |acc, &x| acc | 1 << x);
        let inversions: usize = (0..p.len())
            .map(|a| (a + 1..p.len()).filter(|&b| p[a] > p[b]).count())
            .sum();
        seen.count_ones() as usize == p.len() && inversions % 2 == (self.swaps % 2) as usize
    }

    /// Full O(n) consistency check of the cached counters.
    pub fn check_invariants(&self) -> Result<()> {
        if !perm::is_permutation(&self.perm) {
            return Err(Error::Internal("state is not a permutation".into()));
        }
        let expected_sign = if self.swaps.is_multiple_of(2) { 1 } else { -1 };
        if perm::sign(&self.perm) != expected_sign {
            return Err(Error::Internal("sign does not match swap parity".into()));
        }
        if perm::fixed_points(&self.perm) != self.fixed {
            return Err(Error::Internal("cached fixed-point count is stale".into()));
        }
        if self.untouched().len() != self.untouched {
            return Err(Error::Internal("cached untouched count is stale".into()));
        }
        Ok(())
    }
}

/// Outcome of one walk run until every index has been touched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HittingRecord {
    pub tau: u64,
    pub x_tau: Vec<u32>,
    pub fixed_at_tau: usize,
    /// Fixed points of the state one step before `tau`.
    pub fixed_before_tau: usize,
}

pub fn run_until_all_touched<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<HittingRecord> {
    if n < 2 {
        return invalid("hitting time needs n >= 2");
    }
    let mut state = WalkState::new(n);
    let mut fixed_before = n;
    while !state.all_touched() {
        fixed_before = state.fixed_point_count();
        state.step(rng);
    }
    Ok(HittingRecord {
        tau: state.step_count(),
        fixed_at_tau: state.fixed_point_count(),
        fixed_before_tau: fixed_before,
        x_tau: state.into_perm(),
    })
}

pub fn run_fixed_time<R: Rng + ?Sized>(n: usize, t: u64, rng: &mut R) -> WalkState {
    let mut state = WalkState::new(n);
    state.run(t, rng);
    state
}

/// Runs fresh walks of `t` steps until one satisfies `accept`, giving up after `budget` attempts.
pub fn run_fixed_time_conditioned<R, F>(
    n: usize,
    t: u64,
    accept: F,
    budget: u64,
    rng: &mut R,
) -> Result<WalkState>
where
    R: Rng + ?Sized,
    F: Fn(&WalkState) -> bool,
{
    for _ in 0..budget {
        let state = run_fixed_time(n, t, rng);
        if accept(&state) {
            return Ok(state);
        }
    }
    Err(Error::RejectionBudgetExhausted { attempts: budget })
}

/// Step law used after the marking time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MarkingScheme {
    /// Identity mass reweighted toward the untouched set; drives process `Z` and `kappa_m`.
    Q,
    /// The walk's own step law; drives process `Y` and `tau_m`.
    P,
}

impl FromStr for MarkingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "q" | "qn" | "q_n" => Ok(Self::Q),
            "p" | "pn" | "p_n" => Ok(Self::P),
            _ => Err(Error::InvalidArgument(format!(
                "unknown marking scheme {s:?} (expected q or p)"
            ))),
        }
    }
}

/// `floor(n ln n / 2) - n ln ln n / 4 + 2 n ln ln ln n`, floored and clamped at 0.
/// The flag reports whether the clamp was applied.
pub fn marking_time(n: usize) -> (u64, bool) {
    let nf = n as f64;
    let ln = nf.ln();
    let raw = (nf * ln / 2.0).floor() - nf * ln.ln() / 4.0 + 2.0 * nf * ln.ln().ln();
    if raw.is_finite() && raw > 0.0 {
        (raw.floor() as u64, false)
    } else {
        (0, true)
    }
}

#[derive(Debug, Clone)]
struct Marks {
    marked: Vec<bool>,
    remaining: usize,
}

impl Marks {
    fn from_touched(state: &WalkState) -> Self {
        let marked: Vec<bool> = (0..state.n()).map(|k| state.is_touched(k)).collect();
        Self {
            remaining: state.untouched_count(),
            marked,
        }
    }

    #[inline]
    fn update(&mut self, i: usize, j: usize) {
        let (mi, mj) = (self.marked[i], self.marked[j]);
        if i == j {
            if !mi {
                self.marked[i] = true;
                self.remaining -= 1;
            }
        } else if mi != mj {
            let v = if mi { j } else { i };
            self.marked[v] = true;
            self.remaining -= 1;
        }
    }

    fn done(&self) -> bool {
        self.remaining == 0
    }
}

/// Draws a `Q` move. `untouched` is the untouched set at the marking time, of size `s`.
///
/// With `2s <= n` the law is `(ii)` with mass `2/n^2` for `i` untouched,
/// `(jj)` with mass `(n - 2s) / (n^2 (n - s))` otherwise, and `2/n^2` per
/// transposition. It is realised from the ordered pair `(i, j)`: a diagonal
/// pair outside the untouched set is redirected to a uniform untouched `i'`
/// with probability `s / (n - s)`. With `2s > n` that law has negative mass,
/// and moves are drawn uniformly from the `n (n + 1) / 2` unordered pairs
/// with replacement instead.
fn q_move<R: Rng + ?Sized>(
    ordered: (usize, usize),
    untouched: &[usize],
    in_untouched: &[bool],
    rng: &mut R,
) -> (usize, usize) {
    let n = in_untouched.len();
    let s = untouched.len();
    if 2 * s > n {
        return unordered_with_replacement(n, rng);
    }
    let (i, j) = ordered;
    if i == j && !in_untouched[i] && s > 0 && rng.random_bool(s as f64 / (n - s) as f64) {
        let k = untouched[rng.random_range(0..s)];
        return (k, k);
    }
    (i, j)
}

fn unordered_with_replacement<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.random_range(0..n);
    let b = rng.random_range(0..=n);
    if b == n {
        (a, a)
    } else {
        (a, b)
    }
}

/// One marking run from the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkingOutcome {
    pub scheme: MarkingScheme,
    pub t_star: u64,
    pub t_star_clamped: bool,
    pub untouched_at_t_star: usize,
    /// Whether `Q` moves used the unordered-pair law because `2s > n`.
    pub q_fallback: bool,
    /// `kappa_m` for `Q`, `tau_m` for `P`; absolute time.
    pub time: u64,
    /// `Z` or `Y` at that time.
    pub perm: Vec<u32>,
}

/// Walks to `t_star` (default [`marking_time`]), marks every touched index, then
/// runs process `Z` (scheme `Q`) or `Y` (scheme `P`) until all indices are marked.
pub fn run_marking<R: Rng + ?Sized>(
    n: usize,
    t_star: Option<u64>,
    scheme: MarkingScheme,
    rng: &mut R,
) -> Result<MarkingOutcome> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let (t_star, clamped) = t_star.map_or_else(|| marking_time(n), |t| (t, false));
    let walk = run_fixed_time(n, t_star, rng);
    let untouched = walk.untouched();
    let in_untouched: Vec<bool> = (0..n).map(|k| !walk.is_touched(k)).collect();
    let mut marks = Marks::from_touched(&walk);
    let mut state = match scheme {
        MarkingScheme::P => walk.perm().to_vec(),
        MarkingScheme::Q => uniform_on_marked(&marks.marked, rng),
    };
    let mut time = t_star;
    while !marks.done() {
        let ordered = draw_pair(n, rng);
        let (i, j) = match scheme {
            MarkingScheme::P => ordered,
            MarkingScheme::Q => q_move(ordered, &untouched, &in_untouched, rng),
        };
        state.swap(i, j);
        marks.update(i, j);
        time += 1;
    }
    Ok(MarkingOutcome {
        scheme,
        t_star,
        t_star_clamped: clamped,
        untouched_at_t_star: untouched.len(),
        q_fallback: scheme == MarkingScheme::Q && 2 * untouched.len() > n,
        time,
        perm: state,
    })
}

/// Uniform permutation of the marked indices that fixes every unmarked index.
fn uniform_on_marked<R: Rng + ?Sized>(marked: &[bool], rng: &mut R) -> Vec<u32> {
    let support: Vec<u32> = (0..marked.len() as u32)
        .filter(|&k| marked[k as usize])
        .collect();
    let mut images = support.clone();
    images.shuffle(rng);
    let mut p = perm::identity(marked.len());
    for (src, dst) in support.into_iter().zip(images) {
        p[src as usize] = dst;
    }
    p
}

/// Processes `Z` and `Y` driven by shared randomness after a common marking time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoupledMarking {
    pub t_star: u64,
    pub t_star_clamped: bool,
    pub untouched_at_t_star: usize,
    pub q_fallback: bool,
    pub kappa_m: u64,
    pub tau_m: u64,
    pub z: Vec<u32>,
    pub y: Vec<u32>,
}

impl CoupledMarking {
    pub fn agree(&self) -> bool {
        self.kappa_m == self.tau_m
    }
}

/// Runs both marking processes from one walk prefix. Each step draws one ordered pair;
/// `Y` uses it as is and `Z` uses its `Q` redirection, so the two move sequences
/// differ only on redirected diagonal steps. Under the fallback law (`2s > n`) the
/// `Z` moves are drawn independently.
pub fn run_coupled_marking<R: Rng + ?Sized>(
    n: usize,
    t_star: Option<u64>,
    rng: &mut R,
) -> Result<CoupledMarking> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let (t_star, clamped) = t_star.map_or_else(|| marking_time(n), |t| (t, false));
    let walk = run_fixed_time(n, t_star, rng);
    let untouched = walk.untouched();
    let in_untouched: Vec<bool> = (0..n).map(|k| !walk.is_touched(k)).collect();
    let mut y_marks = Marks::from_touched(&walk);
    let mut z_marks = y_marks.clone();
    let mut y = walk.perm().to_vec();
    let mut z = uniform_on_marked(&z_marks.marked, rng);
    let (mut tau_m, mut kappa_m) = (t_star, t_star);
    let mut time = t_star;
    while !(y_marks.done() && z_marks.done()) {
        time += 1;
        let ordered = draw_pair(n, rng);
        let q = q_move(ordered, &untouched, &in_untouched, rng);
        if !y_marks.done() {
            y.swap(ordered.0, ordered.1);
            y_marks.update(ordered.0, ordered.1);
            tau_m = time;
        }
        if !z_marks.done() {
            z.swap(q.0, q.1);
            z_marks.update(q.0, q.1);
            kappa_m = time;
        }
    }
    Ok(CoupledMarking {
        t_star,
        t_star_clamped: clamped,
        untouched_at_t_star: untouched.len(),
        q_fallback: 2 * untouched.len() > n,
        kappa_m,
        tau_m,
        z,
        y,
    })
}

/// Plug-in total variation between a statistic's empirical law and a reference law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticTv {
    pub value: f64,
    /// Half-width of a 95% percentile bootstrap interval.
    pub ci_half_width: f64,
    pub samples: usize,
    /// Set when fewer than [`MIN_STATISTIC_SAMPLES`] samples were supplied.
    pub low_sample_warning: bool,
}

impl StatisticTv {
    /// `value - ci_half_width`, floored at 0.
    pub fn lower(&self) -> f64 {
        (self.value - self.ci_half_width).max(0.0)
    }
}

fn histogram_tv(counts: &[u64], total: u64, reference: &[f64]) -> f64 {
    let len = counts.len().max(reference.len());
    let inv = 1.0 / total as f64;
    0.5 * (0..len)
        .map(|k| {
            let e = counts.get(k).map_or(0.0, |&c| c as f64 * inv);
            let r = reference.get(k).copied().unwrap_or(0.0);
            (e - r).abs()
        })
        .sum::<f64>()
}

/// TV between the law of `statistic(sample)` and `reference` (indexed by statistic
/// value). By the data-processing inequality this lower-bounds the TV of the
/// underlying laws, up to sampling error. The bootstrap uses `bootstrap_reps`
/// resamples from a generator seeded with `bootstrap_seed`.
pub fn tv_lower_bound_via_statistic<T, F>(
    samples: &[T],
    statistic: F,
    reference: &[f64],
    bootstrap_reps: usize,
    bootstrap_seed: u64,
) -> Result<StatisticTv>
where
    T: Sync,
    F: Fn(&T) -> usize + Sync,
{
    if samples.is_empty() {
        return invalid("no samples");
    }
    let values: Vec<usize> = samples.par_iter().map(&statistic).collect();
    let len = values
        .iter()
        .max()
        .map_or(0, |m| m + 1)
        .max(reference.len());
    let mut counts = vec![0u64; len];
    for &v in &values {
        counts[v] += 1;
    }
    let total = values.len() as u64;
    let value = histogram_tv(&counts, total, reference);
    let mut boot: Vec<f64> = (0..bootstrap_reps as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = replica_rng(bootstrap_seed, b);
            let mut c = vec![0u64; len];
            for _ in 0..values.len() {
                c[values[rng.random_range(0..values.len())]] += 1;
            }
            histogram_tv(&c, total, reference)
        })
        .collect();
    let ci_half_width = if boot.len() >= 2 {
        boot.sort_by(f64::total_cmp);
        let q = |p: f64| boot[((boot.len() - 1) as f64 * p).round() as usize];
        (q(0.975) - q(0.025)) / 2.0
    } else {
        0.0
    };
    Ok(StatisticTv {
        value,
        ci_half_width,
        samples: values.len(),
        low_sample_warning: values.len() < MIN_STATISTIC_SAMPLES,
    })
}

/// Pearson goodness-of-fit against a uniform law on `counts.len()` cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

pub fn chi_square_uniform(counts: &[u64]) -> Result<ChiSquareReport> {
    let k = counts.len().max(1);
    chi_square_goodness_of_fit(counts, &vec![1.0 / k as f64; counts.len()])
}

/// Pearson goodness-of-fit of `counts` against cell probabilities `expected`. Cells with
/// zero expected mass must be empty and are not counted as degrees of freedom.
pub fn chi_square_goodness_of_fit(counts: &[u64], expected: &[f64]) -> Result<ChiSquareReport> {
    if counts.len() != expected.len() {
        return invalid("counts and expected probabilities differ in length");
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return invalid("chi-square test on empty counts");
    }
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for (&c, &p) in counts.iter().zip(expected) {
        if p > 0.0 {
            let e = p * total as f64;
            let d = c as f64 - e;
            statistic += d * d / e;
            cells += 1;
        } else if c > 0 {
            return Ok(ChiSquareReport {
                statistic: f64::INFINITY,
                dof: cells,
                p_value: 0.0,
            });
        }
    }
    if cells < 2 {
        return invalid("chi-square test needs at least two cells");
    }
    let dof = cells - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(ChiSquareReport {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

/// Counts of `Z_{kappa_m}` over all of `S_n` plus marking-time histograms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroderReport {
    pub n: usize,
    pub replicas: u64,
    pub seed: u64,
    pub t_star: u64,
    pub t_star_clamped: bool,
    pub counts: Vec<u64>,
    pub chi_square: ChiSquareReport,
    pub kappa_histogram: BTreeMap<u64, u64>,
    pub tau_m_histogram: BTreeMap<u64, u64>,
    pub disagreements: u64,
}

/// Largest `n` for which [`broder_uniformity`] tabulates all of `S_n`.
pub const BRODER_N_MAX: usize = 8;

pub fn broder_uniformity(n: usize, replicas: u64, seed: u64) -> Result<BroderReport> {
    if !(2..=BRODER_N_MAX).contains(&n) {
        return Err(Error::TooLarge(format!(
            "uniformity test tabulates S_n for 2 <= n <= {BRODER_N_MAX}"
        )));
    }
    if replicas == 0 {
        return invalid("replicas must be positive");
    }
    let (t_star, clamped) = marking_time(n);
    let runs = par_replicas(seed, replicas, |_, rng| run_coupled_marking(n, None, rng));
    let total: usize = (1..=n).product();
    let mut counts = vec![0u64; total];
    let mut kappa_histogram = BTreeMap::new();
    let mut tau_m_histogram = BTreeMap::new();
    let mut disagreements = 0;
    for run in runs {
        let run = run?;
        counts[perm::rank(&run.z)] += 1;
        *kappa_histogram.entry(run.kappa_m).or_insert(0) += 1;
        *tau_m_histogram.entry(run.tau_m).or_insert(0) += 1;
        disagreements += u64::from(!run.agree());
    }
    Ok(BroderReport {
        n,
        replicas,
        seed,
        t_star,
        t_star_clamped: clamped,
        chi_square: chi_square_uniform(&counts)?,
        counts,
        kappa_histogram,
        tau_m_histogram,
        disagreements,
    })
}

/// Per-replica record of a hitting-time batch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicaRecord {
    pub schema: u32,
    pub replica: u64,
    pub tau: u64,
    pub fixed_at_tau: usize,
    pub fixed_before_tau: usize,
    /// Cycle type of `X_tau`, recorded for `n <= CYCLE_TYPE_N_MAX`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_type: Option<String>,
}

pub const CYCLE_TYPE_N_MAX: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub schema: u32,
    pub n: usize,
    pub seed: u64,
    pub replicas: u64,
    pub records: Vec<ReplicaRecord>,
    pub tau_histogram: BTreeMap<u64, u64>,
    pub fixed_at_tau_histogram: Vec<u64>,
    pub fixed_before_tau_histogram: Vec<u64>,
}

pub fn run_hitting_batch(n: usize, replicas: u64, seed: u64) -> Result<BatchResult> {
    if n < 2 {
        return invalid("hitting time needs n >= 2");
    }
    if replicas == 0 {
        return invalid("replicas must be positive");
    }
    let records = par_replicas(seed, replicas, |r, rng| {
        let rec = run_until_all_touched(n, rng).expect("n >= 2 checked");
        ReplicaRecord {
            schema: SCHEMA_VERSION,
            replica: r,
            tau: rec.tau,
            fixed_at_tau: rec.fixed_at_tau,
            fixed_before_tau: rec.fixed_before_tau,
            cycle_type: (n <= CYCLE_TYPE_N_MAX).then(|| perm::cycle_type(&rec.x_tau).to_string()),
        }
    });
    let mut tau_histogram = BTreeMap::new();
    let mut at = vec![0u64; n + 1];
    let mut before = vec![0u64; n + 1];
    for r in &records {
        *tau_histogram.entry(r.tau).or_insert(0) += 1;
        at[r.fixed_at_tau] += 1;
        before[r.fixed_before_tau] += 1;
    }
    Ok(BatchResult {
        schema: SCHEMA_VERSION,
        n,
        seed,
        replicas,
        records,
        tau_histogram,
        fixed_at_tau_histogram: at,
        fixed_before_tau_histogram: before,
    })
}

impl BatchResult {
    /// One JSON object per replica.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Aggregate CSV with header `statistic,value,count`.
    pub fn write_aggregate_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "statistic,value,count")?;
        for (t, c) in &self.tau_histogram {
            writeln!(out, "tau,{t},{c}")?;
        }
        for (k, c) in self.fixed_at_tau_histogram.iter().enumerate() {
            writeln!(out, "fixed_at_tau,{k},{c}")?;
        }
        for (k, c) in self.fixed_before_tau_histogram.iter().enumerate() {
            writeln!(out, "fixed_before_tau,{k},{c}")?;
        }
        Ok(())
    }

    pub fn mean_tau(&self) -> f64 {
        self.records.iter().map(|r| r.tau as f64).sum::<f64>() / self.records.len() as f64
    }
}
