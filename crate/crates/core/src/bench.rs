//! Instance generators and the step-count comparison between the two optimizers.
//!
//! Every run draws its instance from a ChaCha stream keyed by `(seed, run)`, so
//! runs are independent of each other and of execution order; the experiment
//! fans them out over a thread pool and still produces byte-identical reports.

use std::io::Write;

use num_integer::Integer;
use num_traits::{One, Zero};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optimizer::CheckedRun;
use crate::rational::{self, int, Rational};
use crate::task::{Task, TaskSet, TaskSetError, Time};

/// Attempts at drawing an instance with `Σ τ/T ≤ 1` before giving up.
const MAX_DRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Random,
    Prime,
    Fibonacci,
}

impl GeneratorKind {
    /// Mean efficiency quoted for this sequence family in the original study.
    pub fn reference_efficiency(self) -> f64 {
        match self {
            GeneratorKind::Random => 0.3887,
            GeneratorKind::Prime => 0.2977,
            GeneratorKind::Fibonacci => 0.4464,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    /// Task count `M`.
    pub tasks: usize,
    pub period_min: Time,
    pub period_max: Time,
    /// 1-based index of the first prime / Fibonacci number (`F(1) = F(2) = 1`).
    pub start_index: usize,
    pub seed: u64,
    pub runs: usize,
    #[serde(with = "rational::exact")]
    pub overhead: Rational,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            kind: GeneratorKind::Random,
            tasks: 4,
            period_min: 5,
            period_max: 50,
            start_index: 3,
            seed: 0,
            runs: 100,
            overhead: rational::ratio(1, 5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("range [{min}, {max}] holds fewer than {needed} distinct periods")]
    RangeTooSmall { min: Time, max: Time, needed: usize },
    #[error("no instance with utilization <= 1 after {MAX_DRAWS} draws")]
    GeneratorExhausted,
    #[error("optimizers disagree on run {run} (instance {digest})")]
    OracleMismatch { run: usize, digest: String },
    #[error(transparent)]
    Invalid(#[from] TaskSetError),
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: &str| Err(BenchError::InvalidConfig(msg.to_string()));
        if self.tasks < 1 {
            return bad("task count must be >= 1");
        }
        if self.runs < 1 {
            return bad("runs must be >= 1");
        }
        if self.overhead < Rational::zero() {
            return bad("overhead must be non-negative");
        }
        match self.kind {
            GeneratorKind::Random if self.period_min < 1 => bad("period_min must be >= 1"),
            GeneratorKind::Random if self.period_max < self.period_min => {
                bad("period_max must be >= period_min")
            }
            GeneratorKind::Random => {
                let available = self.period_max - self.period_min + 1;
                if available < self.tasks as u64 {
                    Err(BenchError::RangeTooSmall {
                        min: self.period_min,
                        max: self.period_max,
                        needed: self.tasks,
                    })
                } else {
                    Ok(())
                }
            }
            GeneratorKind::Prime if self.start_index < 1 => bad("prime start_index is 1-based"),
            GeneratorKind::Fibonacci if self.start_index < 3 => {
                bad("fibonacci start_index must be >= 3 for distinct periods >= 2")
            }
            _ => Ok(()),
        }
    }
}

/// Independent generator stream for one run.
pub fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

/// `τ` uniform in `[1, max(1, ⌊T/M⌋)]` for each period.
fn draw_wcets<R: Rng>(rng: &mut R, periods: &[Time]) -> Vec<Task> {
    let m = periods.len() as u64;
    periods
        .iter()
        .map(|&t| Task::new(rng.gen_range(1..=(t / m).max(1)), t))
        .collect()
}

fn within_capacity(tasks: &[Task]) -> bool {
    tasks.iter().map(Task::utilization).sum::<Rational>() <= Rational::one()
}

fn finish(cfg: &GeneratorConfig, tasks: Vec<Task>) -> Result<TaskSet, BenchError> {
    Ok(TaskSet::new(&tasks, cfg.overhead.clone())?)
}

/// `M` distinct periods uniform in `[period_min, period_max]`, sorted.
pub fn gen_random_instance<R: Rng>(
    cfg: &GeneratorConfig,
    rng: &mut R,
) -> Result<TaskSet, BenchError> {
    cfg.validate()?;
    let span = (cfg.period_max - cfg.period_min + 1) as usize;
    for _ in 0..MAX_DRAWS {
        let mut periods: Vec<Time> = index::sample(rng, span, cfg.tasks)
            .into_iter()
            .map(|k| cfg.period_min + k as Time)
            .collect();
        periods.sort_unstable();
        let tasks = draw_wcets(rng, &periods);
        // ⌊T/M⌋ bounds U by 1 unless some T < M forces τ = 1
        if within_capacity(&tasks) {
            return finish(cfg, tasks);
        }
    }
    Err(BenchError::GeneratorExhausted)
}

fn with_fixed_periods<R: Rng>(
    cfg: &GeneratorConfig,
    rng: &mut R,
    periods: &[Time],
) -> Result<TaskSet, BenchError> {
    for _ in 0..MAX_DRAWS {
        let tasks = draw_wcets(rng, periods);
        if within_capacity(&tasks) {
            return finish(cfg, tasks);
        }
    }
    Err(BenchError::GeneratorExhausted)
}

/// `count` consecutive primes starting at the `start`-th prime (1-based).
pub fn primes_from(start: usize, count: usize) -> Vec<Time> {
    let mut out = Vec::with_capacity(count);
    let mut seen = 0usize;
    let mut n: Time = 1;
    while out.len() < count {
        n += 1;
        if is_prime(n) {
            seen += 1;
            if seen >= start {
                out.push(n);
            }
        }
    }
    out
}

fn is_prime(n: Time) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `count` consecutive Fibonacci numbers from `F(start)`, with `F(1) = F(2) = 1`.
pub fn fibonacci_from(start: usize, count: usize) -> Vec<Time> {
    let (mut a, mut b): (Time, Time) = (1, 1);
    for _ in 1..start {
        let next = a.saturating_add(b);
        a = b;
        b = next;
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(a);
        let next = a.saturating_add(b);
        a = b;
        b = next;
    }
    out
}

pub fn gen_prime_instance<R: Rng>(
    cfg: &GeneratorConfig,
    rng: &mut R,
) -> Result<TaskSet, BenchError> {
    cfg.validate()?;
    with_fixed_periods(cfg, rng, &primes_from(cfg.start_index, cfg.tasks))
}

pub fn gen_fibonacci_instance<R: Rng>(
    cfg: &GeneratorConfig,
    rng: &mut R,
) -> Result<TaskSet, BenchError> {
    cfg.validate()?;
    with_fixed_periods(cfg, rng, &fibonacci_from(cfg.start_index, cfg.tasks))
}

/// Instance for run `run` of `cfg`.
pub fn generate(cfg: &GeneratorConfig, run: usize) -> Result<TaskSet, BenchError> {
    let mut rng = run_rng(cfg.seed, run);
    match cfg.kind {
        GeneratorKind::Random => gen_random_instance(cfg, &mut rng),
        GeneratorKind::Prime => gen_prime_instance(cfg, &mut rng),
        GeneratorKind::Fibonacci => gen_fibonacci_instance(cfg, &mut rng),
    }
}

/// `(coprime pairs, total pairs)` among the periods of one set.
pub fn coprime_pairs(periods: &[Time]) -> (u64, u64) {
    let mut coprime = 0;
    let mut total = 0;
    for (i, a) in periods.iter().enumerate() {
        for b in &periods[i + 1..] {
            total += 1;
            if a.gcd(b) == 1 {
                coprime += 1;
            }
        }
    }
    (coprime, total)
}

/// Fraction of independent uniform pairs from `[lo, hi]` with gcd 1.
pub fn sample_coprime_fraction(seed: u64, lo: Time, hi: Time, samples: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..samples)
        .filter(|_| rng.gen_range(lo..=hi).gcd(&rng.gen_range(lo..=hi)) == 1)
        .count();
    hits as f64 / samples as f64
}

/// Stable 64-bit FNV-1a digest of a task set.
pub fn instance_digest(set: &TaskSet) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for b in bytes {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for t in set.tasks() {
        feed(&t.wcet.to_le_bytes());
        feed(&t.period.to_le_bytes());
    }
    feed(set.overhead().to_string().as_bytes());
    format!("{h:016x}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub digest: String,
    pub tasks: usize,
    pub min_period: Time,
    pub periods: Vec<Time>,
    pub best_base_period: Option<Time>,
    pub steps_bf: u64,
    pub steps_bnb: u64,
    pub max_frontier: usize,
    #[serde(with = "rational::exact")]
    pub efficiency: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyReport {
    pub config: GeneratorConfig,
    pub tau_policy: &'static str,
    pub records: Vec<RunRecord>,
    #[serde(with = "rational::exact")]
    pub mean_efficiency: Rational,
    pub reference_mean_efficiency: f64,
    pub coprime_pair_fraction: f64,
    pub mismatches: u64,
    pub infeasible_runs: u64,
}

pub const TAU_POLICY: &str = "tau uniform in [1, max(1, floor(T/M))], redrawn while U > 1";

fn record_for(run: usize, set: &TaskSet) -> Result<RunRecord, BenchError> {
    let checked = CheckedRun::run(set);
    let digest = instance_digest(set);
    if !checked.agrees() {
        return Err(BenchError::OracleMismatch { run, digest });
    }
    let steps_bf = checked.oracle_steps();
    let steps_bnb = checked.bnb_steps();
    Ok(RunRecord {
        run,
        digest,
        tasks: set.len(),
        min_period: set.min_period(),
        periods: set.tasks().iter().map(|t| t.period).collect(),
        best_base_period: checked.bnb.as_ref().ok().map(|r| r.best_base_period),
        steps_bf,
        steps_bnb,
        max_frontier: checked.bnb.as_ref().map_or(0, |r| r.max_frontier),
        efficiency: Rational::one() - Rational::new(steps_bnb.into(), steps_bf.into()),
    })
}

fn summarize(config: GeneratorConfig, records: Vec<RunRecord>) -> EfficiencyReport {
    let n = records.len().max(1) as u64;
    let mean_efficiency = records.iter().map(|r| &r.efficiency).sum::<Rational>() / int(n);
    let (coprime, total) = records
        .iter()
        .map(|r| coprime_pairs(&r.periods))
        .fold((0, 0), |(a, b), (c, d)| (a + c, b + d));
    EfficiencyReport {
        reference_mean_efficiency: config.kind.reference_efficiency(),
        tau_policy: TAU_POLICY,
        mean_efficiency,
        coprime_pair_fraction: if total == 0 {
            0.0
        } else {
            coprime as f64 / total as f64
        },
        mismatches: 0,
        infeasible_runs: records
            .iter()
            .filter(|r| r.best_base_period.is_none())
            .count() as u64,
        records,
        config,
    }
}

/// Runs both optimizers on `cfg.runs` generated instances.
pub fn efficiency_experiment(cfg: &GeneratorConfig) -> Result<EfficiencyReport, BenchError> {
    cfg.validate()?;
    let records = (0..cfg.runs)
        .into_par_iter()
        .map(|run| generate(cfg, run).and_then(|set| record_for(run, &set)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(summarize(cfg.clone(), records))
}

/// Same statistics over caller-supplied instances (e.g. a single known set).
pub fn experiment_on(
    cfg: &GeneratorConfig,
    sets: &[TaskSet],
) -> Result<EfficiencyReport, BenchError> {
    let records = sets
        .iter()
        .enumerate()
        .map(|(run, set)| record_for(run, set))
        .collect::<Result<Vec<_>, _>>()?;
    let mut config = cfg.clone();
    config.runs = sets.len();
    Ok(summarize(config, records))
}

#[derive(Serialize)]
struct CsvRow<'a> {
    seed: u64,
    run: usize,
    m: usize,
    t1: Time,
    best_l: Option<Time>,
    steps_bf: u64,
    steps_bnb: u64,
    efficiency: String,
    digest: &'a str,
}

/// One row per run: seed, M, T₁, best L, both step counts, efficiency.
pub fn write_csv<W: Write>(report: &EfficiencyReport, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in &report.records {
        w.serialize(CsvRow {
            seed: report.config.seed,
            run: r.run,
            m: r.tasks,
            t1: r.min_period,
            best_l: r.best_base_period,
            steps_bf: r.steps_bf,
            steps_bnb: r.steps_bnb,
            efficiency: rational::to_decimal(&r.efficiency, 6),
            digest: &r.digest,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn cfg(kind: GeneratorKind) -> GeneratorConfig {
        GeneratorConfig {
            kind,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn random_is_deterministic() {
        let c = GeneratorConfig {
            seed: 42,
            ..cfg(GeneratorKind::Random)
        };
        assert_eq!(generate(&c, 7).unwrap(), generate(&c, 7).unwrap());
        assert_ne!(generate(&c, 7).unwrap(), generate(&c, 8).unwrap());
    }

    #[test]
    fn random_respects_bounds() {
        let c = cfg(GeneratorKind::Random);
        for run in 0..200 {
            let set = generate(&c, run).unwrap();
            let m = set.len() as u64;
            let mut prev = 0;
            for t in set.tasks() {
                assert!((5..=50).contains(&t.period));
                assert!(t.period > prev, "periods distinct and sorted");
                prev = t.period;
                assert!(t.wcet <= (t.period / m).max(1));
            }
            assert!(set.baseline_utilization() <= Rational::one());
        }
    }

    #[test]
    fn range_too_small() {
        let c = GeneratorConfig {
            period_min: 5,
            period_max: 7,
            tasks: 4,
            ..cfg(GeneratorKind::Random)
        };
        assert!(matches!(
            generate(&c, 0),
            Err(BenchError::RangeTooSmall { .. })
        ));
    }

    #[test]
    fn tight_range_still_valid_or_exhausted() {
        // ten forced periods 5..14 with τ = 1 on the short ones: U > 1 always
        let c = GeneratorConfig {
            period_min: 5,
            period_max: 14,
            tasks: 10,
            ..cfg(GeneratorKind::Random)
        };
        assert_eq!(generate(&c, 0), Err(BenchError::GeneratorExhausted));
    }

    #[test]
    fn prime_sequences() {
        assert_eq!(primes_from(2, 4), vec![3, 5, 7, 11]);
        assert_eq!(primes_from(1, 2), vec![2, 3]);
        let c = GeneratorConfig {
            start_index: 2,
            ..cfg(GeneratorKind::Prime)
        };
        let set = generate(&c, 0).unwrap();
        let periods: Vec<_> = set.tasks().iter().map(|t| t.period).collect();
        assert_eq!(periods, vec![3, 5, 7, 11]);
        assert_eq!(coprime_pairs(&periods), (6, 6));
    }

    #[test]
    fn fibonacci_sequences() {
        assert_eq!(fibonacci_from(5, 4), vec![5, 8, 13, 21]);
        assert_eq!(fibonacci_from(4, 3), vec![3, 5, 8]);
        let fib = fibonacci_from(3, 20);
        for w in fib.windows(2) {
            assert_eq!(w[0].gcd(&w[1]), 1);
        }
        let c = GeneratorConfig {
            start_index: 2,
            ..cfg(GeneratorKind::Fibonacci)
        };
        assert!(matches!(generate(&c, 0), Err(BenchError::InvalidConfig(_))));
    }

    #[test]
    fn experiment_is_reproducible() {
        let c = GeneratorConfig {
            runs: 30,
            seed: 9,
            ..cfg(GeneratorKind::Random)
        };
        let a = efficiency_experiment(&c).unwrap();
        let b = efficiency_experiment(&c).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.mismatches, 0);
        assert!(a.mean_efficiency >= Rational::zero());
        assert!(a.records.iter().all(|r| r.steps_bnb <= r.steps_bf));
        let mut buf = Vec::new();
        write_csv(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 31);
        assert!(text.starts_with("seed,run,m,t1,best_l,steps_bf,steps_bnb,efficiency,digest"));
    }

    #[test]
    fn single_known_instance() {
        let set = TaskSet::from_pairs(&[(1, 5), (3, 16), (3, 19), (4, 22)], ratio(1, 5)).unwrap();
        let r = experiment_on(&cfg(GeneratorKind::Random), &[set]).unwrap();
        assert_eq!(r.records[0].best_base_period, Some(5));
        assert_eq!(r.records[0].steps_bf, 25);
    }

    #[test]
    fn coprime_sampling_near_six_over_pi_squared() {
        let f = sample_coprime_fraction(1, 5, 10_000, 10_000);
        assert!((0.55..=0.67).contains(&f), "{f}");
    }
}
