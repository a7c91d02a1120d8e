//! Exact laws of the walk.
//!
//! Three independent routes:
//! * [`full_group_convolution`] pushes mass over all `n!` permutations (n <= 6);
//! * [`ClassKernel`] evolves the cycle-type distribution with an explicit
//!   merge/split kernel, exact or in floating point, for `n` up to ~60;
//! * [`exact_stopped_distribution`] runs a dynamic program over
//!   (permutation, touched set) pairs to get the law of the walk at the first
//!   time every card has been touched (n <= 6).
//!
//! One step picks an ordered pair `(i, j)` uniformly from `n^2`. Out of those
//! pairs, `n` leave a permutation of type `lambda` unchanged, a pair split
//! across two cycles of lengths `a` and `b` merges them into one of length
//! `a + b`, and a pair inside a cycle of length `c` at distance `d` splits it
//! into cycles of lengths `d` and `c - d`. Kernel weights are integer pair
//! counts over `n^2`.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::combin::kahan_sum;
use crate::distribution::{ClassDistribution, ExactClassDistribution};
use crate::error::{invalid, Error, Result};
use crate::partitions::{Partition, PartitionSpace};
use crate::perm;

/// Largest `n` handled by the permutation-level routes.
pub const GROUP_N_MAX: usize = 6;
/// Largest `t` accepted by [`full_group_convolution`].
pub const GROUP_T_MAX: u64 = 64;

/// Exact law on all `n!` permutations, indexed by [`perm::rank`], with a shared denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupDistribution {
    n: usize,
    numerators: Vec<BigUint>,
    denominator: BigUint,
}

impl GroupDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn numerators(&self) -> &[BigUint] {
        &self.numerators
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    pub fn prob(&self, perm: &[u32]) -> BigRational {
        let idx = perm::rank(perm);
        BigRational::new(
            self.numerators[idx].clone().into(),
            self.denominator.clone().into(),
        )
    }

    pub fn total_mass(&self) -> BigRational {
        let s: BigUint = self.numerators.iter().sum();
        BigRational::new(s.into(), self.denominator.clone().into())
    }

    /// `sum_sigma P(sigma)^2`, exact.
    pub fn sum_of_squares(&self) -> BigRational {
        let s: BigUint = self.numerators.iter().map(|x| x * x).sum();
        BigRational::new(s.into(), (&self.denominator * &self.denominator).into())
    }

    /// Pushes the law forward to cycle types.
    pub fn class_marginal(&self, space: &Arc<PartitionSpace>) -> Result<ExactClassDistribution> {
        if space.n() != self.n {
            return invalid("partition space does not match n");
        }
        let mut nums = vec![BigUint::zero(); space.len()];
        for (r, num) in self.numerators.iter().enumerate() {
            if num.is_zero() {
                continue;
            }
            let ct = perm::cycle_type(&perm::unrank(self.n, r));
            let idx = space.index_of(&ct).expect("cycle type is a partition of n");
            nums[idx] += num;
        }
        ExactClassDistribution::new(space.clone(), nums, self.denominator.clone())
    }
}

fn check_group_n(n: usize) -> Result<()> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    if n > GROUP_N_MAX {
        return Err(Error::TooLarge(format!(
            "permutation-level computation supports n <= {GROUP_N_MAX}, got {n}"
        )));
    }
    Ok(())
}

/// `swap_table[r * n * n + i * n + j]` = rank of `sigma` with entries `i`, `j` swapped.
fn swap_table(n: usize) -> Vec<u16> {
    let perms = perm::all_permutations(n);
    let mut table = Vec::with_capacity(perms.len() * n * n);
    for p in &perms {
        for i in 0..n {
            for j in 0..n {
                let mut q = p.clone();
                q.swap(i, j);
                table.push(perm::rank(&q) as u16);
            }
        }
    }
    table
}

/// Exact law of `X_t`, the walk after `t` steps from the identity.
pub fn full_group_convolution(n: usize, t: u64) -> Result<GroupDistribution> {
    check_group_n(n)?;
    if t > GROUP_T_MAX {
        return Err(Error::TooLarge(format!(
            "t <= {GROUP_T_MAX} required, got {t}"
        )));
    }
    let total: usize = (1..=n).product();
    let table = swap_table(n);
    let mut cur = vec![BigUint::zero(); total];
    cur[0] = BigUint::one();
    let nn = (n * n) as u32;
    for _ in 0..t {
        let mut next = vec![BigUint::zero(); total];
        for (r, mass) in cur.iter().enumerate() {
            if mass.is_zero() {
                continue;
            }
            // i == j: n ordered pairs fix the permutation
            next[r] += mass * n as u32;
            for i in 0..n {
                for j in (i + 1)..n {
                    let q = table[r * n * n + i * n + j] as usize;
                    next[q] += mass * 2u32;
                }
            }
        }
        cur = next;
    }
    Ok(GroupDistribution {
        n,
        numerators: cur,
        denominator: BigUint::from(nn).pow(t),
    })
}

/// Writes `parts` with one copy of each value in `remove` dropped and the values in
/// `add` inserted, keeping descending order.
fn edit_parts(parts: &[u32], remove: &[u32], add: &[u32], buf: &mut Vec<u32>) {
    buf.clear();
    let mut pending = remove;
    for &p in parts {
        if let Some(pos) = pending.iter().position(|&r| r == p) {
            if pending.len() == 2 {
                pending = if pos == 0 { &remove[1..] } else { &remove[..1] };
            } else {
                pending = &[];
            }
            continue;
        }
        buf.push(p);
    }
    for &v in add {
        let at = buf.partition_point(|&x| x >= v);
        buf.insert(at, v);
    }
}

/// Calls `f(target_parts, count)` for every cycle type reachable in one step from the
/// descending part list `parts`, with the number of ordered pairs (out of `n^2`) leading
/// there. Targets are distinct.
fn for_each_transition(parts: &[u32], buf: &mut Vec<u32>, mut f: impl FnMut(&[u32], u32)) {
    let n: u32 = parts.iter().sum();
    if n == 0 {
        return;
    }
    f(parts, n);
    let mut mults: Vec<(u32, u32)> = Vec::new();
    for &p in parts {
        match mults.last_mut() {
            Some((v, m)) if *v == p => *m += 1,
            _ => mults.push((p, 1)),
        }
    }
    // merges
    for (ia, &(a, ma)) in mults.iter().enumerate() {
        if ma >= 2 {
            edit_parts(parts, &[a, a], &[2 * a], buf);
            f(buf, ma * a * (ma - 1) * a);
        }
        for &(b, mb) in &mults[ia + 1..] {
            edit_parts(parts, &[a, b], &[a + b], buf);
            f(buf, 2 * ma * a * mb * b);
        }
    }
    // splits
    for &(c, mc) in &mults {
        for d in 1..=c / 2 {
            edit_parts(parts, &[c], &[c - d, d], buf);
            f(buf, if 2 * d == c { mc * c } else { 2 * mc * c });
        }
    }
}

/// Ordered-pair counts out of `n^2` for one step from cycle type `lambda`.
pub fn cycle_type_transitions(lambda: &Partition) -> Vec<(Partition, u32)> {
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(lambda.len() + 1);
    for_each_transition(lambda.parts(), &mut buf, |parts, c| {
        out.push((Partition::from_parts_unchecked(parts.to_vec()), c));
    });
    out
}

/// One-step law from cycle type `lambda`, as exact probabilities.
pub fn cycle_type_kernel(lambda: &Partition) -> Result<Vec<(Partition, BigRational)>> {
    let n = lambda.n();
    if n == 0 {
        return invalid("cycle type must be a partition of n >= 1");
    }
    let nn = BigRational::from_integer(((n * n) as u64).into());
    Ok(cycle_type_transitions(lambda)
        .into_iter()
        .map(|(mu, c)| (mu, BigRational::from_integer(c.into()) / &nn))
        .collect())
}

/// Sparse cycle-type kernel over one partition space, stored by incoming edges so a
/// step is a deterministic parallel gather.
#[derive(Debug, Clone)]
pub struct ClassKernel {
    space: Arc<PartitionSpace>,
    row_ptr: Vec<u64>,
    sources: Vec<u32>,
    counts: Vec<u16>,
}

impl ClassKernel {
    pub fn new(space: Arc<PartitionSpace>) -> Result<Self> {
        kernel_self_test()?;
        let n = space.n();
        if n * n > u16::MAX as usize {
            return Err(Error::TooLarge(format!(
                "kernel counts overflow at n = {n}"
            )));
        }
        let len = space.len();
        let out_edges: Vec<Vec<(u32, u16)>> = space
            .partitions()
            .par_iter()
            .map_init(Vec::new, |buf, lambda| {
                let mut edges = Vec::new();
                for_each_transition(lambda.parts(), buf, |parts, c| {
                    let idx = space.rank(parts).expect("kernel target in space");
                    edges.push((idx as u32, c as u16));
                });
                edges
            })
            .collect();
        let mut row_ptr = vec![0u64; len + 1];
        for edges in &out_edges {
            for &(tgt, _) in edges {
                row_ptr[tgt as usize + 1] += 1;
            }
        }
        for i in 0..len {
            row_ptr[i + 1] += row_ptr[i];
        }
        let nnz = row_ptr[len] as usize;
        let mut cursor = row_ptr[..len].to_vec();
        let mut sources = vec![0u32; nnz];
        let mut counts = vec![0u16; nnz];
        // filling in source order leaves every row sorted by source
        for (src, edges) in out_edges.into_iter().enumerate() {
            for (tgt, c) in edges {
                let pos = cursor[tgt as usize] as usize;
                cursor[tgt as usize] += 1;
                sources[pos] = src as u32;
                counts[pos] = c;
            }
        }
        Ok(Self {
            space,
            row_ptr,
            sources,
            counts,
        })
    }

    pub fn space(&self) -> &Arc<PartitionSpace> {
        &self.space
    }

    pub fn nnz(&self) -> usize {
        self.sources.len()
    }

    fn row(&self, target: usize) -> (&[u32], &[u16]) {
        let (a, b) = (
            self.row_ptr[target] as usize,
            self.row_ptr[target + 1] as usize,
        );
        (&self.sources[a..b], &self.counts[a..b])
    }

    pub fn step(&self, dist: &ClassDistribution) -> ClassDistribution {
        let n = self.space.n();
        let inv = 1.0 / (n * n) as f64;
        let cur = dist.probs();
        let next: Vec<f64> = (0..self.space.len())
            .into_par_iter()
            .map(|tgt| {
                let (src, cnt) = self.row(tgt);
                let mut acc = 0.0;
                for (&s, &c) in src.iter().zip(cnt) {
                    acc += c as f64 * cur[s as usize];
                }
                acc * inv
            })
            .collect();
        ClassDistribution::from_raw(self.space.clone(), next)
    }

    pub fn step_exact(&self, dist: &ExactClassDistribution) -> ExactClassDistribution {
        let n = self.space.n();
        let cur = dist.numerators();
        let next: Vec<BigUint> = (0..self.space.len())
            .into_par_iter()
            .map(|tgt| {
                let (src, cnt) = self.row(tgt);
                let mut acc = BigUint::zero();
                for (&s, &c) in src.iter().zip(cnt) {
                    acc += &cur[s as usize] * c as u32;
                }
                acc
            })
            .collect();
        let denom = dist.denominator() * ((n * n) as u64);
        ExactClassDistribution::new(self.space.clone(), next, denom).expect("shape preserved")
    }

    /// Applies `steps` kernel steps in floating point.
    pub fn evolve(&self, dist: &ClassDistribution, steps: u64) -> ClassDistribution {
        let mut cur = dist.clone();
        for _ in 0..steps {
            cur = self.step(&cur);
        }
        cur
    }

    pub fn evolve_exact(
        &self,
        dist: &ExactClassDistribution,
        steps: u64,
    ) -> ExactClassDistribution {
        let mut cur = dist.clone();
        for _ in 0..steps {
            cur = self.step_exact(&cur);
        }
        cur
    }

    /// The class distribution of `X_t` for each `t` in `times` (any order), in one pass.
    pub fn evolve_to_times(&self, times: &[u64]) -> BTreeMap<u64, ClassDistribution> {
        let mut wanted: Vec<u64> = times.to_vec();
        wanted.sort_unstable();
        wanted.dedup();
        let mut out = BTreeMap::new();
        let mut cur = ClassDistribution::identity(self.space.clone());
        let mut now = 0u64;
        for t in wanted {
            cur = self.evolve(&cur, t - now);
            now = t;
            out.insert(t, cur.clone());
        }
        out
    }
}

/// CSV time series with header `step,partition,probability`, one row per cycle type per
/// recorded step.
pub fn write_time_series_csv<W: std::io::Write>(
    snapshots: &BTreeMap<u64, ClassDistribution>,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "step,partition,probability")?;
    for (step, dist) in snapshots {
        for (lambda, p) in dist.iter() {
            writeln!(out, "{step},\"{lambda}\",{p:e}")?;
        }
    }
    Ok(())
}

/// Iterated kernel steps, building the kernel for `dist`'s partition space.
pub fn evolve_class(dist: &ClassDistribution, steps: u64) -> Result<ClassDistribution> {
    let kernel = ClassKernel::new(dist.space().clone())?;
    Ok(kernel.evolve(dist, steps))
}

pub fn evolve_class_exact(
    dist: &ExactClassDistribution,
    steps: u64,
) -> Result<ExactClassDistribution> {
    let kernel = ClassKernel::new(dist.space().clone())?;
    Ok(kernel.evolve_exact(dist, steps))
}

static SELF_TEST: OnceLock<std::result::Result<(), String>> = OnceLock::new();

/// Checks the merge/split counts against brute-force single steps over all of `S_n`,
/// `n = 1..=6`. Runs once per process.
pub fn kernel_self_test() -> Result<()> {
    SELF_TEST
        .get_or_init(|| {
            for n in 1..=GROUP_N_MAX {
                let space = PartitionSpace::new(n).map_err(|e| e.to_string())?;
                for lambda in space.iter() {
                    let brute = brute_force_class_step(lambda);
                    let mut derived: BTreeMap<Partition, u32> = BTreeMap::new();
                    for (mu, c) in cycle_type_transitions(lambda) {
                        *derived.entry(mu).or_default() += c;
                    }
                    if brute != derived {
                        return Err(format!(
                            "cycle-type kernel disagrees with brute force at {lambda:?}"
                        ));
                    }
                }
            }
            Ok(())
        })
        .clone()
        .map_err(Error::Internal)
}

/// Ordered-pair counts from one representative of `lambda`, by direct enumeration.
fn brute_force_class_step(lambda: &Partition) -> BTreeMap<Partition, u32> {
    let n = lambda.n();
    // canonical representative: consecutive cycles
    let mut rep = vec![0u32; n];
    let mut start = 0usize;
    for &len in lambda.parts() {
        let len = len as usize;
        for k in 0..len {
            rep[start + k] = (start + (k + 1) % len) as u32;
        }
        start += len;
    }
    let mut out = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            let mut q = rep.clone();
            q.swap(i, j);
            *out.entry(perm::cycle_type(&q)).or_insert(0u32) += 1;
        }
    }
    out
}

/// `1/2 sum |a - b|` over cycle types.
pub fn exact_tv(a: &ClassDistribution, b: &ClassDistribution) -> Result<f64> {
    if a.n() != b.n() {
        return invalid(format!(
            "distributions over different n ({} vs {})",
            a.n(),
            b.n()
        ));
    }
    Ok(0.5 * kahan_sum(a.probs().iter().zip(b.probs()).map(|(x, y)| (x - y).abs())))
}

pub fn exact_tv_rational(
    a: &ExactClassDistribution,
    b: &ExactClassDistribution,
) -> Result<BigRational> {
    if a.n() != b.n() {
        return invalid("distributions over different n");
    }
    let mut acc = BigRational::zero();
    for (x, y) in a.probs().into_iter().zip(b.probs()) {
        acc += (x - y).abs();
    }
    Ok(acc / BigRational::from_integer(2.into()))
}

/// Law of the walk at the first time every card has been touched.
#[derive(Debug, Clone)]
pub struct StoppedDistribution {
    pub n: usize,
    /// Absorbed mass per permutation, indexed by [`perm::rank`].
    pub probs: Vec<f64>,
    /// Live (not yet absorbed) mass when the iteration stopped.
    pub residual: f64,
    pub steps: u64,
    /// Ratio of live mass over the last step, an empirical geometric decay rate.
    pub decay_rate: f64,
}

impl StoppedDistribution {
    pub fn prob(&self, perm: &[u32]) -> f64 {
        self.probs[perm::rank(perm)]
    }

    /// Total variation to uniform, counting the residual mass as fully mismatched.
    pub fn tv_to_uniform_bounds(&self) -> (f64, f64) {
        let u = 1.0 / self.probs.len() as f64;
        let tv = 0.5 * kahan_sum(self.probs.iter().map(|p| (p - u).abs()));
        ((tv - self.residual).max(0.0), tv + self.residual)
    }
}

/// Dynamic program over (permutation, touched mask) states until live mass `<= epsilon`.
pub fn exact_stopped_distribution(n: usize, epsilon: f64) -> Result<StoppedDistribution> {
    check_group_n(n)?;
    if epsilon.is_nan() || epsilon <= 0.0 {
        return invalid("epsilon must be positive");
    }
    let total: usize = (1..=n).product();
    let masks = 1usize << n;
    let full = masks - 1;
    let table = swap_table(n);
    let inv = 1.0 / (n * n) as f64;
    let mut live = vec![0.0f64; total * masks];
    live[0] = 1.0;
    let mut absorbed = vec![0.0f64; total];
    let mut live_mass = 1.0;
    let mut steps = 0u64;
    let mut decay_rate = 1.0;
    const MAX_STEPS: u64 = 1_000_000;
    while live_mass > epsilon {
        if steps >= MAX_STEPS {
            return Err(Error::Internal(
                "stopped-distribution iteration did not converge".into(),
            ));
        }
        let mut next = vec![0.0f64; total * masks];
        for r in 0..total {
            for mask in 0..masks {
                let mass = live[r * masks + mask];
                if mass == 0.0 {
                    continue;
                }
                let w = mass * inv;
                for i in 0..n {
                    for j in 0..n {
                        let q = table[r * n * n + i * n + j] as usize;
                        let m2 = mask | (1 << i) | (1 << j);
                        if m2 == full {
                            absorbed[q] += w;
                        } else {
                            next[q * masks + m2] += w;
                        }
                    }
                }
            }
        }
        live = next;
        let new_live = kahan_sum(live.iter().copied());
        decay_rate = if live_mass > 0.0 {
            new_live / live_mass
        } else {
            0.0
        };
        live_mass = new_live;
        steps += 1;
        let conserved = kahan_sum(absorbed.iter().copied()) + live_mass;
        if (conserved - 1.0).abs() > 1e-12 {
            return Err(Error::Internal(format!("mass not conserved: {conserved}")));
        }
    }
    Ok(StoppedDistribution {
        n,
        probs: absorbed,
        residual: live_mass,
        steps,
        decay_rate,
    })
}

/// Exact rational version of the stopped dynamic program, run for a fixed number of
/// steps. Returns absorbed numerators, live numerator total, and the denominator
/// `n^{2 steps}`; `absorbed + live == denominator` holds exactly.
pub fn exact_stopped_rational(n: usize, steps: u64) -> Result<(Vec<BigUint>, BigUint, BigUint)> {
    check_group_n(n)?;
    let total: usize = (1..=n).product();
    let masks = 1usize << n;
    let full = masks - 1;
    let table = swap_table(n);
    let mut live = vec![BigUint::zero(); total * masks];
    live[0] = BigUint::one();
    let mut absorbed = vec![BigUint::zero(); total];
    for _ in 0..steps {
        let mut next = vec![BigUint::zero(); total * masks];
        for a in absorbed.iter_mut() {
            *a *= (n * n) as u32;
        }
        for r in 0..total {
            for mask in 0..masks {
                let mass = &live[r * masks + mask];
                if mass.is_zero() {
                    continue;
                }
                for i in 0..n {
                    for j in 0..n {
                        let q = table[r * n * n + i * n + j] as usize;
                        let m2 = mask | (1 << i) | (1 << j);
                        if m2 == full {
                            absorbed[q] += mass;
                        } else {
                            next[q * masks + m2] += mass;
                        }
                    }
                }
            }
        }
        live = next;
    }
    let live_total: BigUint = live.iter().sum();
    let denom = BigUint::from((n * n) as u64).pow(steps);
    Ok((absorbed, live_total, denom))
}

/// Convenience: f64 view of a rational, for reports.
pub fn ratio_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize) -> Arc<PartitionSpace> {
        Arc::new(PartitionSpace::new(n).unwrap())
    }

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn convolution_small_cases() {
        let zero = full_group_convolution(4, 0).unwrap();
        assert!(zero.prob(&perm::identity(4)).is_one());
        assert!(zero.total_mass().is_one());
        let two = full_group_convolution(2, 1).unwrap();
        assert_eq!(two.prob(&[0, 1]), q(1, 2));
        assert_eq!(two.prob(&[1, 0]), q(1, 2));
        assert!(matches!(
            full_group_convolution(7, 1),
            Err(Error::TooLarge(_))
        ));
        assert!(matches!(
            full_group_convolution(3, 65),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn kernel_examples() {
        let k = cycle_type_kernel(&p(&[1, 1])).unwrap();
        assert_eq!(k, vec![(p(&[1, 1]), q(1, 2)), (p(&[2]), q(1, 2))]);
        let k = cycle_type_kernel(&p(&[1, 1, 1])).unwrap();
        assert_eq!(k, vec![(p(&[1, 1, 1]), q(1, 3)), (p(&[2, 1]), q(2, 3))]);
        for n in 1..=12 {
            for lambda in space(n).iter() {
                let total: u32 = cycle_type_transitions(lambda).iter().map(|(_, c)| c).sum();
                assert_eq!(total as usize, n * n, "{lambda:?}");
            }
        }
    }

    #[test]
    fn self_test_passes() {
        kernel_self_test().unwrap();
    }

    #[test]
    fn kernel_matches_one_brute_force_step_from_every_type() {
        for n in 1..=GROUP_N_MAX {
            let s = space(n);
            for lambda in s.iter() {
                let mut derived = BTreeMap::new();
                for (mu, c) in cycle_type_transitions(lambda) {
                    *derived.entry(mu).or_insert(0u32) += c;
                }
                assert_eq!(derived, brute_force_class_step(lambda));
            }
        }
    }

    #[test]
    fn tv_examples() {
        let s = space(5);
        let u = ClassDistribution::uniform(s.clone());
        assert_eq!(exact_tv(&u, &u).unwrap(), 0.0);
        let id = ClassDistribution::identity(s.clone());
        let mut other = vec![0.0; s.len()];
        other[0] = 1.0;
        let five_cycle = ClassDistribution::new(s.clone(), other).unwrap();
        assert_eq!(exact_tv(&id, &five_cycle).unwrap(), 1.0);
        // X_1 at n = 2 is uniform
        let s2 = space(2);
        let x1 = evolve_class_exact(&ExactClassDistribution::identity(s2.clone()), 1).unwrap();
        let tv = exact_tv_rational(&x1, &ExactClassDistribution::uniform(s2)).unwrap();
        assert!(tv.is_zero());
        assert!(exact_tv(&u, &ClassDistribution::uniform(space(4))).is_err());
    }

    #[test]
    fn stopped_distribution_n2() {
        let sd = exact_stopped_distribution(2, 1e-12).unwrap();
        assert!((sd.prob(&[0, 1]) - 1.0 / 6.0).abs() < 1e-12);
        assert!((sd.prob(&[1, 0]) - 5.0 / 6.0).abs() < 1e-12);
        assert!(sd.residual <= 1e-12);
        assert!(exact_stopped_distribution(2, 0.0).is_err());
        assert!(matches!(
            exact_stopped_distribution(7, 1e-3),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn stopped_rational_conserves_mass_exactly() {
        for n in 2..=3 {
            for steps in 0..8 {
                let (abs, live, denom) = exact_stopped_rational(n, steps).unwrap();
                let s: BigUint = abs.iter().sum::<BigUint>() + live;
                assert_eq!(s, denom);
            }
        }
    }

    #[test]
    fn evolve_to_times_matches_direct_evolution() {
        let s = space(7);
        let k = ClassKernel::new(s.clone()).unwrap();
        let snaps = k.evolve_to_times(&[5, 0, 3]);
        assert_eq!(snaps.len(), 3);
        let direct = k.evolve(&ClassDistribution::identity(s), 5);
        assert_eq!(snaps[&5].probs(), direct.probs());
    }
}
