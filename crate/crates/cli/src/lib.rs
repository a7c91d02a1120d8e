//! Experiment driver for the random transposition walk.
//!
//! Every subcommand writes a table (CSV with a header row, or JSON lines) to
//! `--out` or standard output. Human-readable summaries go to standard error.
//! Exit codes: 0 success, 1 usage error, 2 failed validation or failed
//! statistical test.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rtwalk::exact_oracle::{exact_tv, ClassKernel};
use rtwalk::graph::run_giant_batch;
use rtwalk::measures::{
    default_nu_cap, expected_hitting_time, mu_cap, nu_class_distribution, poisson_tv,
    uniform_fixed_point_law_f64, WalkTime,
};
use rtwalk::simulator::{
    broder_uniformity, run_hitting_batch, tv_lower_bound_via_statistic, BRODER_N_MAX,
};
use rtwalk::spectral::SpectralTable;
use rtwalk::{ClassDistribution, PartitionSpace};

mod validate;

pub use validate::{run_validation, Check};

/// Largest `n` accepted by the exact-evolution subcommands.
pub const EXACT_N_LIMIT: usize = 60;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;

const TIME_HELP: &str =
    "Times: --t is an absolute step count; --t-prime is the offset in steps from \
cutoff, t = floor(n ln(n) / 2) + t', with the natural logarithm. A sweep is a comma-separated list \
of values or inclusive ranges start:end[:step], e.g. -40:40:10,100.";

#[derive(Debug, Parser)]
#[command(name = "rtwalk", version, about = "Random transposition walk experiments", after_help = TIME_HELP)]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on this value.
    #[arg(long, global = true, env = "RTWALK_THREADS")]
    pub threads: Option<usize>,

    /// Output format for tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write the table to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact d_TV(X_t, nu_t) and d_TV(X_t, U) from the cycle-type kernel, with the Poisson profile.
    #[command(after_help = TIME_HELP)]
    ExactTv(ExactTvArgs),
    /// Plancherel upper bound on d_TV(X_t, mu_t) and the spectral tail sum.
    #[command(after_help = TIME_HELP)]
    L2Bound(L2BoundArgs),
    /// Simulate the first time every card is touched; per-replica records plus a summary.
    SimulateTau(SimulateTauArgs),
    /// Chi-square test of the marking-scheme output against uniform on S_n.
    Broder(BroderArgs),
    /// Giant-component event frequency and fixed points of the walk restricted to it.
    #[command(after_help = TIME_HELP)]
    Giant(GiantArgs),
    /// Check cross-oracle identities up to n_max.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct TimeSweep {
    /// Offsets from cutoff, in steps (natural-log convention).
    #[arg(long = "t-prime", value_name = "SWEEP", allow_hyphen_values = true)]
    pub t_prime: Option<String>,
    /// Absolute step counts.
    #[arg(long, value_name = "SWEEP")]
    pub t: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExactTvArgs {
    /// Number of cards (at most 60).
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub time: TimeSweep,
    /// Poisson truncation for nu_t (default min(floor(ln(n)^2), n)).
    #[arg(long)]
    pub cap: Option<usize>,
}

#[derive(Debug, Args)]
pub struct L2BoundArgs {
    /// Number of cards.
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub time: TimeSweep,
    /// Poisson truncation for mu_t, at most n/3 (default min(floor(ln(n)^2), floor(n/3))).
    #[arg(long)]
    pub cap: Option<usize>,
    /// Also compute the exact d_TV(X_t, mu_t) (n <= 60).
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args)]
pub struct SimulateTauArgs {
    /// Number of cards.
    #[arg(long)]
    pub n: usize,
    /// Independent replicas.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub replicas: u64,
    /// Base seed; replica r uses stream r.
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BroderArgs {
    /// Number of cards (2 to 8).
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub replicas: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GiantArgs {
    /// Number of cards.
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub time: TimeSweep,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub replicas: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Largest n to check (permutation-level identities stop at 6).
    #[arg(long = "n-max", default_value_t = 6)]
    pub n_max: usize,
}

/// Failure modes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Other(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Other(_) => EXIT_USAGE,
            CliError::Validation(_) => EXIT_VALIDATION,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Other(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl From<rtwalk::Error> for CliError {
    fn from(e: rtwalk::Error) -> Self {
        match e {
            rtwalk::Error::Internal(_) | rtwalk::Error::RejectionBudgetExhausted { .. } => {
                CliError::Other(e.into())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Other(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses a sweep such as `-40:40:10,100` into its values, in order.
pub fn parse_sweep(text: &str) -> CliResult<Vec<i64>> {
    let bad = |m: &str| CliError::Usage(format!("invalid sweep {text:?}: {m}"));
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let fields: Vec<&str> = item.split(':').collect();
        let num = |s: &str| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| bad(&format!("{s:?} is not an integer")))
        };
        match fields.as_slice() {
            [v] => out.push(num(v)?),
            [a, b] | [a, b, _] => {
                let (start, end) = (num(a)?, num(b)?);
                let step = if fields.len() == 3 {
                    num(fields[2])?
                } else {
                    1
                };
                if step <= 0 {
                    return Err(bad("step must be positive"));
                }
                if end < start {
                    return Err(bad("range end is below its start"));
                }
                out.extend((start..=end).step_by(step as usize));
            }
            _ => return Err(bad("expected value or start:end[:step]")),
        }
    }
    if out.is_empty() {
        return Err(bad("no values"));
    }
    Ok(out)
}

fn resolve_times(n: usize, sweep: &TimeSweep) -> CliResult<Vec<WalkTime>> {
    match (&sweep.t_prime, &sweep.t) {
        (Some(tp), None) => parse_sweep(tp)?
            .into_iter()
            .map(|v| WalkTime::from_offset(n, v).map_err(CliError::from))
            .collect(),
        (None, Some(t)) => parse_sweep(t)?
            .into_iter()
            .map(|v| {
                let t = u64::try_from(v)
                    .map_err(|_| CliError::Usage(format!("negative step count {v}")))?;
                WalkTime::from_steps(n, t).map_err(CliError::from)
            })
            .collect(),
        _ => Err(CliError::Usage(
            "give exactly one of --t or --t-prime".into(),
        )),
    }
}

fn check_exact_n(n: usize) -> CliResult<()> {
    if n < 2 {
        return Err(CliError::Usage("n must be at least 2".into()));
    }
    if n > EXACT_N_LIMIT {
        return Err(CliError::Usage(format!(
            "exact evolution supports n <= {EXACT_N_LIMIT}; use `simulate-tau` or `giant` for larger n"
        )));
    }
    Ok(())
}

fn write_rows<T: Serialize, W: Write>(rows: &[T], format: Format, out: W) -> CliResult<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            for r in rows {
                serde_json::to_writer(&mut out, r)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactTvRow {
    pub n: usize,
    pub t_prime: i64,
    pub t: u64,
    pub tv_nu: f64,
    pub tv_uniform: f64,
    pub poisson_profile: f64,
}

pub fn exact_tv_table(args: &ExactTvArgs) -> CliResult<Vec<ExactTvRow>> {
    check_exact_n(args.n)?;
    let n = args.n;
    let times = resolve_times(n, &args.time)?;
    let cap = args.cap.unwrap_or_else(|| default_nu_cap(n));
    if cap > n {
        return Err(CliError::Usage(format!("cap {cap} exceeds n = {n}")));
    }
    let space = Arc::new(PartitionSpace::new(n)?);
    let kernel = ClassKernel::new(space.clone())?;
    let snaps = kernel.evolve_to_times(&times.iter().map(|w| w.t).collect::<Vec<_>>());
    let uniform = ClassDistribution::uniform(space.clone());
    times
        .iter()
        .map(|time| {
            let x = &snaps[&time.t];
            let nu = nu_class_distribution(&space, time, cap);
            Ok(ExactTvRow {
                n,
                t_prime: time.t_prime,
                t: time.t,
                tv_nu: exact_tv(x, &nu)?,
                tv_uniform: exact_tv(x, &uniform)?,
                poisson_profile: poisson_tv(1.0 + time.gamma(), 1.0)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct L2BoundRow {
    pub n: usize,
    pub t_prime: i64,
    pub t: u64,
    pub plancherel_tv_bound: f64,
    pub tail_sum: f64,
    pub exact_tv_mu: Option<f64>,
}

pub fn l2_bound_table(args: &L2BoundArgs) -> CliResult<Vec<L2BoundRow>> {
    let n = args.n;
    if n < 2 {
        return Err(CliError::Usage("n must be at least 2".into()));
    }
    if args.exact {
        check_exact_n(n)?;
    }
    let times = resolve_times(n, &args.time)?;
    let cap = args.cap.unwrap_or_else(|| mu_cap(n));
    let space = Arc::new(PartitionSpace::new(n)?);
    let table = SpectralTable::new(space.clone())?;
    let snaps = if args.exact {
        let kernel = ClassKernel::new(space.clone())?;
        Some(kernel.evolve_to_times(&times.iter().map(|w| w.t).collect::<Vec<_>>()))
    } else {
        None
    };
    times
        .iter()
        .map(|time| {
            let exact_tv_mu = match &snaps {
                Some(s) => Some(exact_tv(
                    &s[&time.t],
                    &nu_class_distribution(&space, time, cap),
                )?),
                None => None,
            };
            Ok(L2BoundRow {
                n,
                t_prime: time.t_prime,
                t: time.t,
                plancherel_tv_bound: table.plancherel_tv_bound(time, cap)?,
                tail_sum: table.tail_sum(time.t),
                exact_tv_mu,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct TauSummary {
    pub n: usize,
    pub replicas: u64,
    pub seed: u64,
    pub mean_tau: f64,
    pub exact_mean_tau: f64,
    pub identity_frequency: f64,
    pub statistic_tv_at_tau: f64,
    pub statistic_tv_at_tau_ci: f64,
    pub statistic_tv_before_tau: f64,
    pub statistic_tv_before_tau_ci: f64,
    pub low_sample_warning: bool,
}

fn simulate_tau<W: Write>(
    args: &SimulateTauArgs,
    format: Format,
    out: W,
    err: &mut dyn Write,
) -> CliResult<()> {
    let n = args.n;
    let batch = run_hitting_batch(n, args.replicas, args.seed)?;
    let reference = uniform_fixed_point_law_f64(n);
    let at = tv_lower_bound_via_statistic(
        &batch.records,
        |r| r.fixed_at_tau,
        &reference,
        200,
        args.seed,
    )?;
    let before = tv_lower_bound_via_statistic(
        &batch.records,
        |r| r.fixed_before_tau,
        &reference,
        200,
        args.seed,
    )?;
    let summary = TauSummary {
        n,
        replicas: args.replicas,
        seed: args.seed,
        mean_tau: batch.mean_tau(),
        exact_mean_tau: expected_hitting_time(n, 1e-12)?,
        identity_frequency: batch.fixed_at_tau_histogram[n] as f64 / args.replicas as f64,
        statistic_tv_at_tau: at.value,
        statistic_tv_at_tau_ci: at.ci_half_width,
        statistic_tv_before_tau: before.value,
        statistic_tv_before_tau_ci: before.ci_half_width,
        low_sample_warning: at.low_sample_warning,
    };
    match format {
        Format::Json => batch.write_jsonl(out)?,
        Format::Csv => batch.write_aggregate_csv(out)?,
    }
    writeln!(err, "{}", serde_json::to_string(&summary)?)?;
    if summary.low_sample_warning {
        writeln!(
            err,
            "warning: fewer than 10^4 replicas; statistic distances are noisy"
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct BroderRow {
    section: &'static str,
    key: String,
    value: String,
}

fn broder<W: Write>(
    args: &BroderArgs,
    format: Format,
    out: W,
    err: &mut dyn Write,
) -> CliResult<()> {
    if !(2..=BRODER_N_MAX).contains(&args.n) {
        return Err(CliError::Usage(format!(
            "broder tabulates S_n for 2 <= n <= {BRODER_N_MAX}"
        )));
    }
    let report = broder_uniformity(args.n, args.replicas, args.seed)?;
    match format {
        Format::Json => {
            let mut out = out;
            serde_json::to_writer(&mut out, &report)?;
            out.write_all(b"\n")?;
        }
        Format::Csv => {
            let mut rows = vec![
                BroderRow {
                    section: "chi_square",
                    key: "statistic".into(),
                    value: report.chi_square.statistic.to_string(),
                },
                BroderRow {
                    section: "chi_square",
                    key: "dof".into(),
                    value: report.chi_square.dof.to_string(),
                },
                BroderRow {
                    section: "chi_square",
                    key: "p_value".into(),
                    value: report.chi_square.p_value.to_string(),
                },
                BroderRow {
                    section: "marking",
                    key: "t_star".into(),
                    value: report.t_star.to_string(),
                },
                BroderRow {
                    section: "marking",
                    key: "t_star_clamped".into(),
                    value: report.t_star_clamped.to_string(),
                },
                BroderRow {
                    section: "marking",
                    key: "disagreements".into(),
                    value: report.disagreements.to_string(),
                },
            ];
            for (rank, c) in report.counts.iter().enumerate() {
                let p = rtwalk::perm::unrank(args.n, rank);
                let key = p.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
                rows.push(BroderRow {
                    section: "permutation",
                    key,
                    value: c.to_string(),
                });
            }
            for (t, c) in &report.kappa_histogram {
                rows.push(BroderRow {
                    section: "kappa_m",
                    key: t.to_string(),
                    value: c.to_string(),
                });
            }
            for (t, c) in &report.tau_m_histogram {
                rows.push(BroderRow {
                    section: "tau_m",
                    key: t.to_string(),
                    value: c.to_string(),
                });
            }
            write_rows(&rows, Format::Csv, out)?;
        }
    }
    writeln!(
        err,
        "chi2 = {:.3} on {} dof, p = {:.4}",
        report.chi_square.statistic, report.chi_square.dof, report.chi_square.p_value
    )?;
    if report.chi_square.p_value <= 1e-3 {
        return Err(CliError::Validation(format!(
            "uniformity rejected (p = {:.3e})",
            report.chi_square.p_value
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct GiantRow {
    pub n: usize,
    pub t_prime: i64,
    pub t: u64,
    pub replicas: u64,
    pub failure_frequency: f64,
    pub mean_largest_component: f64,
    pub mean_untouched: f64,
    pub restricted_fixed_point_tv: f64,
    pub restricted_fixed_point_tv_ci: f64,
}

pub fn giant_table(args: &GiantArgs) -> CliResult<Vec<GiantRow>> {
    let n = args.n;
    if n < 2 {
        return Err(CliError::Usage("n must be at least 2".into()));
    }
    let times = resolve_times(n, &args.time)?;
    let reference = uniform_fixed_point_law_f64(n);
    times
        .iter()
        .map(|time| {
            let recs = run_giant_batch(n, time.t, args.replicas, args.seed)?;
            let r = args.replicas as f64;
            let stat = tv_lower_bound_via_statistic(
                &recs,
                |x| x.restricted_fixed_points,
                &reference,
                100,
                args.seed,
            )?;
            Ok(GiantRow {
                n,
                t_prime: time.t_prime,
                t: time.t,
                replicas: args.replicas,
                failure_frequency: recs.iter().filter(|x| !x.event).count() as f64 / r,
                mean_largest_component: recs
                    .iter()
                    .map(|x| x.largest_component as f64)
                    .sum::<f64>()
                    / r,
                mean_untouched: recs.iter().map(|x| x.untouched as f64).sum::<f64>() / r,
                restricted_fixed_point_tv: stat.value,
                restricted_fixed_point_tv_ci: stat.ci_half_width,
            })
        })
        .collect()
}

fn validate_cmd<W: Write>(args: &ValidateArgs, mut out: W) -> CliResult<()> {
    if args.n_max < 2 || args.n_max > EXACT_N_LIMIT {
        return Err(CliError::Usage(format!(
            "--n-max must be between 2 and {EXACT_N_LIMIT}"
        )));
    }
    let checks = run_validation(args.n_max, |c| {
        // progress lines are best-effort
        let _ = writeln!(out, "{} {}", if c.passed { "ok  " } else { "FAIL" }, c.name);
        if let Some(d) = &c.detail {
            let _ = writeln!(out, "     {d}");
        }
    });
    out.flush()?;
    match checks.iter().find(|c| !c.passed) {
        Some(c) => Err(CliError::Validation(format!(
            "{}: {}",
            c.name,
            c.detail.clone().unwrap_or_default()
        ))),
        None => Ok(()),
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let mut file;
    let out: &mut dyn Write = match &cli.out {
        Some(path) => {
            file =
                BufWriter::new(File::create(path).map_err(|e| {
                    CliError::Usage(format!("cannot create {}: {e}", path.display()))
                })?);
            &mut file
        }
        None => stdout,
    };
    match &cli.command {
        Command::ExactTv(a) => write_rows(&exact_tv_table(a)?, cli.format, out),
        Command::L2Bound(a) => write_rows(&l2_bound_table(a)?, cli.format, out),
        Command::SimulateTau(a) => simulate_tau(a, cli.format, out, stderr),
        Command::Broder(a) => broder(a, cli.format, out, stderr),
        Command::Giant(a) => write_rows(&giant_table(a)?, cli.format, out),
        Command::Validate(a) => validate_cmd(a, out),
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be positive".into())),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => {
                let (mut o, mut e) = (Vec::new(), Vec::new());
                let r = pool.install(|| execute(&cli, &mut o, &mut e));
                let copied = stdout.write_all(&o).and_then(|_| stderr.write_all(&e));
                r.and(copied.map_err(CliError::from))
            }
            Err(e) => Err(CliError::Other(e.into())),
        },
        None => execute(&cli, stdout, stderr),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_resolve_against_cutoff() {
        let sweep = TimeSweep {
            t_prime: Some("-2,0".into()),
            t: None,
        };
        let times = resolve_times(10, &sweep).unwrap();
        assert_eq!(times.iter().map(|w| w.t).collect::<Vec<_>>(), vec![9, 11]);
        let sweep = TimeSweep {
            t_prime: None,
            t: Some("-1".into()),
        };
        assert!(matches!(resolve_times(10, &sweep), Err(CliError::Usage(_))));
    }

    #[test]
    fn core_errors_map_to_exit_codes() {
        let usage: CliError = rtwalk::Error::TooLarge("x".into()).into();
        assert_eq!(usage.exit_code(), EXIT_USAGE);
        let internal: CliError = rtwalk::Error::Internal("x".into()).into();
        assert!(matches!(internal, CliError::Other(_)));
    }

    #[test]
    fn json_rows_are_one_object_per_line() {
        let rows = [ExactTvRow {
            n: 2,
            t_prime: 0,
            t: 0,
            tv_nu: 0.5,
            tv_uniform: 0.5,
            poisson_profile: 0.0,
        }];
        let mut buf = Vec::new();
        write_rows(&rows, Format::Json, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.contains("\"tv_nu\":0.5"));
    }
}
