//! Cross-oracle identities checked by `rtwalk validate`.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Pow, Zero};

use rtwalk::characters::pn_eigenvalue;
use rtwalk::combin::factorial;
use rtwalk::distribution::inverse_centralizer_f64;
use rtwalk::exact_oracle::{
    exact_stopped_rational, exact_tv, exact_tv_rational, full_group_convolution, ClassKernel,
    GROUP_N_MAX,
};
use rtwalk::measures::{mu_cap, nu_class_distribution, WalkTime};
use rtwalk::spectral::{mu_spectrum, walk_l2_mass_exact, SpectralTable};
use rtwalk::{ClassDistribution, ExactClassDistribution, Partition, PartitionSpace};

const CONVOLUTION_T_MAX: u64 = 20;
const PARSEVAL_T_MAX: u64 = 12;
const STOPPED_STEPS: u64 = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Option<String>,
}

type Outcome = std::result::Result<(), String>;
type NamedCheck<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rat(x: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn kernel_matches_convolution(space: &Arc<PartitionSpace>, kernel: &ClassKernel) -> Outcome {
    let mut cur = ExactClassDistribution::identity(space.clone());
    for t in 0..=CONVOLUTION_T_MAX {
        let brute = full_group_convolution(space.n(), t)
            .map_err(err)?
            .class_marginal(space)
            .map_err(err)?;
        if !exact_tv_rational(&cur, &brute).map_err(err)?.is_zero() {
            return Err(format!("class laws differ at t = {t}"));
        }
        cur = kernel.step_exact(&cur);
    }
    Ok(())
}

fn parseval(space: &Arc<PartitionSpace>) -> Outcome {
    for t in 0..=PARSEVAL_T_MAX {
        let lhs = rat(factorial(space.n()))
            * full_group_convolution(space.n(), t)
                .map_err(err)?
                .sum_of_squares();
        let rhs = walk_l2_mass_exact(space, t).map_err(err)?;
        if lhs != rhs {
            return Err(format!("t = {t}: {lhs} != {rhs}"));
        }
    }
    Ok(())
}

fn sign_moment(space: &Arc<PartitionSpace>, kernel: &ClassKernel) -> Outcome {
    let a = pn_eigenvalue(&Partition::column(space.n()), space.n()).map_err(err)?;
    let mut cur = ExactClassDistribution::identity(space.clone());
    for t in 0..=PARSEVAL_T_MAX as u32 {
        let moment = space
            .iter()
            .zip(cur.probs())
            .fold(BigRational::zero(), |acc, (l, p)| {
                acc + p * BigRational::from_integer(l.sign().into())
            });
        if moment != a.clone().pow(t) {
            return Err(format!("t = {t}: {moment}"));
        }
        cur = kernel.step_exact(&cur);
    }
    Ok(())
}

fn dimension_and_class_sums(space: &Arc<PartitionSpace>) -> Outcome {
    let nf = factorial(space.n());
    let dims: BigUint = space.iter().map(|l| l.dimension().pow(2u32)).sum();
    let classes: BigUint = space.iter().map(Partition::class_size).sum();
    if dims != nf {
        return Err(format!("sum of squared dimensions is {dims}"));
    }
    if classes != nf {
        return Err(format!("class sizes sum to {classes}"));
    }
    Ok(())
}

fn stopped_mass(n: usize) -> Outcome {
    let (absorbed, live, denom) = exact_stopped_rational(n, STOPPED_STEPS).map_err(err)?;
    let total: BigUint = absorbed.iter().sum::<BigUint>() + live;
    if total != denom {
        return Err(format!("mass {total} / {denom}"));
    }
    Ok(())
}

fn l2_dual_route(
    space: &Arc<PartitionSpace>,
    kernel: &ClassKernel,
    table: &SpectralTable,
) -> Outcome {
    let n = space.n();
    for t_prime in [0, n as i64] {
        let time = WalkTime::from_offset(n, t_prime).map_err(err)?;
        let x = kernel.evolve(&ClassDistribution::identity(space.clone()), time.t);
        let mu = nu_class_distribution(space, &time, mu_cap(n));
        let physical: f64 = space
            .iter()
            .zip(x.probs().iter().zip(mu.probs()))
            .map(|(l, (a, b))| (a - b) * (a - b) / inverse_centralizer_f64(l))
            .sum();
        let spectral = table
            .l2_distance_sq(time.t, &mu_spectrum(space, &time).map_err(err)?)
            .map_err(err)?;
        if (physical - spectral).abs() > 1e-9 * physical.max(1e-12) {
            return Err(format!("t' = {t_prime}: {physical} vs {spectral}"));
        }
    }
    Ok(())
}

fn bound_dominates(
    space: &Arc<PartitionSpace>,
    kernel: &ClassKernel,
    table: &SpectralTable,
) -> Outcome {
    let n = space.n();
    for t_prime in [-(n as i64) / 2, 0, n as i64] {
        let Ok(time) = WalkTime::from_offset(n, t_prime) else {
            continue;
        };
        let x = kernel.evolve(&ClassDistribution::identity(space.clone()), time.t);
        let tv = exact_tv(&x, &nu_class_distribution(space, &time, mu_cap(n))).map_err(err)?;
        let bound = table.plancherel_tv_bound(&time, mu_cap(n)).map_err(err)?;
        if bound + 1e-9 < tv {
            return Err(format!("t' = {t_prime}: bound {bound} < {tv}"));
        }
    }
    Ok(())
}

fn monotone_to_uniform(space: &Arc<PartitionSpace>, kernel: &ClassKernel) -> Outcome {
    let n = space.n() as f64;
    let horizon = (2.0 * n * n.ln()) as u64;
    let u = ClassDistribution::uniform(space.clone());
    let mut cur = ClassDistribution::identity(space.clone());
    let mut prev = exact_tv(&cur, &u).map_err(err)?;
    for t in 1..=horizon {
        cur = kernel.step(&cur);
        let tv = exact_tv(&cur, &u).map_err(err)?;
        if tv > prev + 1e-12 {
            return Err(format!("t = {t}: {tv} > {prev}"));
        }
        prev = tv;
    }
    Ok(())
}

/// Runs every identity for `2 <= n <= n_max`, reporting each result to `report`.
/// Stops at the first failure; the returned list ends with it.
pub fn run_validation<F: FnMut(&Check)>(n_max: usize, mut report: F) -> Vec<Check> {
    let mut done = Vec::new();
    let mut record = |name: String, outcome: Outcome, done: &mut Vec<Check>| -> bool {
        let c = Check {
            name,
            passed: outcome.is_ok(),
            detail: outcome.err(),
        };
        report(&c);
        let ok = c.passed;
        done.push(c);
        ok
    };
    for n in 2..=n_max {
        let space = match PartitionSpace::new(n) {
            Ok(s) => Arc::new(s),
            Err(e) => {
                record(format!("n = {n}: partition space"), Err(err(e)), &mut done);
                return done;
            }
        };
        let built = ClassKernel::new(space.clone())
            .and_then(|k| Ok((k, SpectralTable::new(space.clone())?)));
        let (kernel, table) = match built {
            Ok(kt) => kt,
            Err(e) => {
                record(
                    format!("n = {n}: kernel and spectral table"),
                    Err(err(e)),
                    &mut done,
                );
                return done;
            }
        };
        let mut checks: Vec<NamedCheck> = vec![
            (
                "sum of d^2 and class sizes equal n!",
                Box::new(|| dimension_and_class_sums(&space)),
            ),
            (
                "L2 distance: physical = spectral",
                Box::new(|| l2_dual_route(&space, &kernel, &table)),
            ),
            (
                "Plancherel bound >= exact TV",
                Box::new(|| bound_dominates(&space, &kernel, &table)),
            ),
            (
                "TV to uniform non-increasing",
                Box::new(|| monotone_to_uniform(&space, &kernel)),
            ),
        ];
        if n <= GROUP_N_MAX {
            checks.push((
                "kernel = group convolution",
                Box::new(|| kernel_matches_convolution(&space, &kernel)),
            ));
            checks.push(("Parseval", Box::new(|| parseval(&space))));
            checks.push((
                "sign moment = eigenvalue power",
                Box::new(|| sign_moment(&space, &kernel)),
            ));
            checks.push(("stopped DP conserves mass", Box::new(|| stopped_mass(n))));
        }
        for (name, check) in checks {
            if !record(format!("n = {n}: {name}"), check(), &mut done) {
                return done;
            }
        }
    }
    done
}
