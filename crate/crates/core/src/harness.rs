//! Monte Carlo experiments: power, null calibration and scenario studies.
//!
//! Data for replicate `r` of distribution `d` comes from the stream
//! `stream(derive_seed(seed, DATA, tag(label), n), DATA, d, r)`, where
//! `label` names the distribution or scenario. Every test in a roster sees
//! the same dataset in each replicate (common random numbers), and
//! replicates are merged in index order, so reports do not depend on the
//! thread count.

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::classic::{build_empirical_null, empirical_p_value, EmpiricalNull, NullCache, NullStatistic};
use crate::distributions::{Distribution, Scenario, ScenarioSampler};
use crate::error::{Error, Result};
use crate::pitos::{OrderedSample, Pitos, PitosOptions};
use crate::quasirandom::PairSequence;
use crate::rng::{self, domain, StreamRng};

/// Desk-scale replicate count.
pub const DESK_REPLICATES: usize = 2_000;
/// Desk-scale empirical null size.
pub const DESK_NULL_B: usize = 20_000;
/// Full-scale replicate count and null size.
pub const FULL_SCALE: usize = 100_000;
/// Largest tolerated share of failed replicates.
pub const MAX_FAILURE_RATE: f64 = 0.001;

/// A test in a simulation roster.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestKind {
    Pitos,
    Classic(NullStatistic),
}

impl TestKind {
    /// PITOS, AD, NB, KS, CvM.
    pub const DEFAULT_ROSTER: [TestKind; 5] = [
        TestKind::Pitos,
        TestKind::Classic(NullStatistic::Ad),
        TestKind::Classic(NullStatistic::Nb),
        TestKind::Classic(NullStatistic::Ks),
        TestKind::Classic(NullStatistic::Cvm),
    ];

    /// `pitos`, `ad`, `nb`, `ks`, `cvm`, or `lrt` (which needs `truth`).
    pub fn parse(name: &str, truth: Option<Distribution>) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "pitos" => Ok(TestKind::Pitos),
            "lrt" => truth
                .map(|d| TestKind::Classic(NullStatistic::Lrt(d)))
                .ok_or_else(|| Error::domain("LRT needs a fully specified alternative")),
            other => NullStatistic::from_name(other).map(TestKind::Classic),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestKind::Pitos => "PITOS",
            TestKind::Classic(s) => s.name(),
        }
    }
}

/// Null-distribution settings shared by an experiment.
#[derive(Clone, Debug)]
pub struct NullSettings {
    /// Replicates per empirical null.
    pub b: usize,
    /// Seed for empirical nulls.
    pub seed: u64,
    /// Optional on-disk cache.
    pub cache: Option<NullCache>,
}

impl Default for NullSettings {
    fn default() -> Self {
        Self {
            b: DESK_NULL_B,
            seed: 0,
            cache: None,
        }
    }
}

impl NullSettings {
    pub fn null_for(&self, stat: NullStatistic, n: usize) -> Result<EmpiricalNull> {
        match &self.cache {
            Some(cache) => cache.load_or_build(stat, n, self.b, self.seed),
            None => build_empirical_null(stat, n, self.b, self.seed),
        }
    }
}

enum Prepared {
    Pitos(Box<Pitos>),
    Classic(NullStatistic, EmpiricalNull),
}

/// One p-value from one test on one replicate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    /// Reported p-value (`p*` for PITOS).
    pub p_value: f64,
    /// PITOS p before the correction; equal to `p_value` otherwise.
    pub p_uncorrected: f64,
    /// [`dataset_checksum`] of the data the test saw.
    pub checksum: u64,
}

/// A roster ready to run at one sample size: PITOS pair plans and
/// empirical nulls are built once.
pub struct PreparedRoster {
    n: usize,
    tests: Vec<(TestKind, Prepared)>,
}

impl PreparedRoster {
    pub fn new(tests: &[TestKind], n: usize, nulls: &NullSettings) -> Result<Self> {
        let tests = tests
            .iter()
            .map(|&t| {
                let prepared = match t {
                    TestKind::Pitos => Prepared::Pitos(Box::new(Pitos::new(
                        PairSequence::generate(n)?,
                        PitosOptions::default(),
                    ))),
                    TestKind::Classic(stat) => Prepared::Classic(stat, nulls.null_for(stat, n)?),
                };
                Ok((t, prepared))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, tests })
    }

    /// PITOS with caller-supplied pairs alongside classical tests.
    pub fn with_pairs(tests: &[TestKind], pairs: PairSequence, nulls: &NullSettings) -> Result<Self> {
        let mut roster = Self::new(
            &tests
                .iter()
                .copied()
                .filter(|t| *t != TestKind::Pitos)
                .collect::<Vec<_>>(),
            pairs.n(),
            nulls,
        )?;
        if let Some(pos) = tests.iter().position(|t| *t == TestKind::Pitos) {
            let pitos = Prepared::Pitos(Box::new(Pitos::new(pairs, PitosOptions::default())));
            roster.tests.insert(pos, (TestKind::Pitos, pitos));
        }
        Ok(roster)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tests(&self) -> Vec<TestKind> {
        self.tests.iter().map(|(t, _)| *t).collect()
    }

    /// Run every test on `data`; one entry per test in roster order.
    pub fn evaluate(&self, data: &[f64]) -> Vec<Result<Evaluation>> {
        let sample = match OrderedSample::new(data.to_vec()) {
            Ok(s) => s,
            Err(e) => {
                return self
                    .tests
                    .iter()
                    .map(|_| Err(Error::Contract(format!("simulated dataset is invalid: {e}"))))
                    .collect()
            }
        };
        let sample = &sample;
        self.tests
            .iter()
            .map(|(_, prepared)| {
                let checksum = dataset_checksum(sample.raw());
                let (p_value, p_uncorrected) = match prepared {
                    Prepared::Pitos(test) => {
                        let r = test.evaluate(sample)?;
                        (r.p_star, r.p_value)
                    }
                    Prepared::Classic(stat, null) => {
                        let p = empirical_p_value(null, stat.compute(sample)?);
                        (p, p)
                    }
                };
                Ok(Evaluation {
                    p_value,
                    p_uncorrected,
                    checksum,
                })
            })
            .collect()
    }
}

/// FNV-1a over the bit patterns of `data`.
pub fn dataset_checksum(data: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in data {
        for byte in v.to_bits().to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// The data stream for replicate `rep` of distribution `index` under `label`.
pub fn data_stream(seed: u64, label: &str, n: usize, index: u64, rep: u64) -> StreamRng {
    let base = rng::derive_seed(seed, domain::DATA, rng::tag(label), n as u64);
    rng::stream(base, domain::DATA, index, rep)
}

/// Replicate `rep` of the dataset used by [`power_curve`] for `dist`.
pub fn replicate_dataset(dist: &Distribution, n: usize, rep: u64, seed: u64) -> Vec<f64> {
    dist.sample(n, &mut data_stream(seed, &dist.name(), n, 0, rep))
}

/// Rejection-rate estimate for one test, distribution and sample size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerReport {
    pub distribution: String,
    pub params: Vec<(String, f64)>,
    pub test: String,
    pub n: usize,
    pub alpha: f64,
    pub replicates: usize,
    pub rejections: usize,
    pub rejection_rate: f64,
    pub mc_std_err: f64,
    /// Replicates whose test evaluation failed (counted as non-rejections).
    pub failures: usize,
    pub seed: u64,
}

/// Per-replicate evaluations, `[replicate][test]`.
pub type ReplicateTable = Vec<Vec<Result<Evaluation>>>;

/// Evaluate `roster` on `replicates` datasets of `dist`.
pub fn run_replicates(
    roster: &PreparedRoster,
    dist: &Distribution,
    label: &str,
    index: u64,
    replicates: usize,
    seed: u64,
) -> ReplicateTable {
    let n = roster.n();
    (0..replicates as u64)
        .into_par_iter()
        .map(|rep| {
            let data = dist.sample(n, &mut data_stream(seed, label, n, index, rep));
            roster.evaluate(&data)
        })
        .collect()
}

/// Count rejections for test column `k`, applying the failure policy.
fn tally(table: &ReplicateTable, k: usize, alpha: f64, test: &str) -> Result<(usize, usize)> {
    let total = table.len();
    let mut rejections = 0;
    let mut failures = 0;
    let mut first = None;
    for row in table {
        match &row[k] {
            Ok(e) if e.p_value <= alpha => rejections += 1,
            Ok(_) => {}
            Err(e) => {
                failures += 1;
                first.get_or_insert_with(|| e.to_string());
            }
        }
    }
    if failures as f64 > MAX_FAILURE_RATE * total as f64 {
        return Err(Error::ReplicateFailures {
            failed: failures,
            total,
            first: first.unwrap_or_default(),
        });
    }
    if failures > 0 {
        warn!(
            "{test}: {failures} of {total} replicates failed and count as non-rejections ({})",
            first.unwrap_or_default()
        );
    }
    Ok((rejections, failures))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha = {alpha} is not in (0, 1)")))
    }
}

/// Power of every test in `tests` at every `n` in `n_grid`.
///
/// Reports are ordered by `n`, then by test.
pub fn power_curve(
    dist: &Distribution,
    tests: &[TestKind],
    n_grid: &[usize],
    alpha: f64,
    replicates: usize,
    seed: u64,
    nulls: &NullSettings,
) -> Result<Vec<PowerReport>> {
    check_alpha(alpha)?;
    if replicates == 0 {
        return Err(Error::domain("need at least one replicate"));
    }
    let label = dist.name();
    let mut reports = Vec::new();
    for &n in n_grid {
        let roster = PreparedRoster::new(tests, n, nulls)?;
        let table = run_replicates(&roster, dist, &label, 0, replicates, seed);
        for (k, test) in tests.iter().enumerate() {
            let (rejections, failures) = tally(&table, k, alpha, test.name())?;
            let rate = rejections as f64 / replicates as f64;
            reports.push(PowerReport {
                distribution: label.clone(),
                params: dist.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
                test: test.name().to_string(),
                n,
                alpha,
                replicates,
                rejections,
                rejection_rate: rate,
                mc_std_err: (rate * (1.0 - rate) / replicates as f64).sqrt(),
                failures,
                seed,
            });
        }
    }
    Ok(reports)
}

/// Power of one test.
pub fn estimate_power(
    dist: &Distribution,
    test: TestKind,
    n: usize,
    alpha: f64,
    replicates: usize,
    seed: u64,
    nulls: &NullSettings,
) -> Result<PowerReport> {
    Ok(power_curve(dist, &[test], &[n], alpha, replicates, seed, nulls)?.remove(0))
}

/// Null p-values of one test: `(reported, uncorrected)` per replicate.
pub fn null_p_values(
    test: TestKind,
    n: usize,
    replicates: usize,
    seed: u64,
    nulls: &NullSettings,
) -> Result<Vec<(f64, f64)>> {
    let roster = PreparedRoster::new(&[test], n, nulls)?;
    let table = run_replicates(&roster, &Distribution::Uniform, "null-calibration", 0, replicates, seed);
    tally(&table, 0, 0.5, test.name())?;
    Ok(table
        .into_iter()
        .filter_map(|mut row| row.remove(0).ok())
        .map(|e| (e.p_value, e.p_uncorrected))
        .collect())
}

/// Empirical CDF of null p-values on a grid of thresholds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub test: String,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub thresholds: Vec<f64>,
    /// CDF of the reported p-value (`p*` for PITOS).
    pub cdf: Vec<f64>,
    /// CDF of the uncorrected PITOS p-value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cdf_uncorrected: Option<Vec<f64>>,
}

/// Share of null p-values at or below each threshold in `grid`.
pub fn null_pvalue_cdf(
    test: TestKind,
    n: usize,
    replicates: usize,
    seed: u64,
    grid: &[f64],
    nulls: &NullSettings,
) -> Result<CalibrationReport> {
    if let Some(t) = grid.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::domain(format!("threshold {t} is not in [0, 1]")));
    }
    let values = null_p_values(test, n, replicates, seed, nulls)?;
    let ecdf = |pick: fn(&(f64, f64)) -> f64| -> Vec<f64> {
        let mut v: Vec<f64> = values.iter().map(pick).collect();
        v.sort_by(f64::total_cmp);
        grid.iter()
            .map(|&t| v.partition_point(|&p| p <= t) as f64 / v.len() as f64)
            .collect()
    };
    Ok(CalibrationReport {
        test: test.name().to_string(),
        n,
        replicates,
        seed,
        thresholds: grid.to_vec(),
        cdf: ecdf(|p| p.0),
        cdf_uncorrected: (test == TestKind::Pitos).then(|| ecdf(|p| p.1)),
    })
}

/// Power of each test on one randomly drawn distribution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionPower {
    pub index: u64,
    pub distribution: String,
    pub latent: Vec<f64>,
    /// One entry per test, in roster order.
    pub power: Vec<f64>,
    pub failures: Vec<usize>,
}

/// Rank frequencies and average power over a scenario's distributions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankSummary {
    pub scenario: String,
    pub tests: Vec<String>,
    pub n: usize,
    pub alpha: f64,
    pub distributions: usize,
    pub replicates: usize,
    pub seed: u64,
    /// `rank_frequency[t][r]`: share of distributions where test `t` took
    /// rank `r + 1`. Exact ties split their positions evenly.
    pub rank_frequency: Vec<Vec<f64>>,
    pub average_rank: Vec<f64>,
    pub average_power: Vec<f64>,
    pub per_distribution: Vec<DistributionPower>,
}

/// Rank positions shared by tied powers: `out[t][r]` is the share of rank
/// `r + 1` assigned to test `t`. Higher power ranks first.
pub fn rank_shares(power: &[f64]) -> Vec<Vec<f64>> {
    let k = power.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| power[b].total_cmp(&power[a]).then(a.cmp(&b)));
    let mut shares = vec![vec![0.0; k]; k];
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && power[order[end]] == power[order[start]] {
            end += 1;
        }
        let share = 1.0 / (end - start) as f64;
        for &t in &order[start..end] {
            for slot in &mut shares[t][start..end] {
                *slot = share;
            }
        }
        start = end;
    }
    shares
}

/// Randomized-scenario study: draw `num_distributions` laws, estimate each
/// test's power on each, and summarize ranks and average power.
///
/// LRT is not part of the roster here; an LRT entry would need one
/// empirical null per drawn distribution.
#[allow(clippy::too_many_arguments)]
pub fn scenario_study(
    scenario: Scenario,
    tests: &[TestKind],
    num_distributions: usize,
    replicates: usize,
    n: usize,
    alpha: f64,
    seed: u64,
    nulls: &NullSettings,
) -> Result<RankSummary> {
    check_alpha(alpha)?;
    if num_distributions == 0 || replicates == 0 {
        return Err(Error::domain(
            "scenario study needs at least one distribution and one replicate",
        ));
    }
    if tests
        .iter()
        .any(|t| matches!(t, TestKind::Classic(NullStatistic::Lrt(_))))
    {
        return Err(Error::domain("LRT is not available in scenario studies"));
    }
    let roster = PreparedRoster::new(tests, n, nulls)?;
    let sampler = ScenarioSampler::new(scenario, seed);
    let k = tests.len();
    let mut per_distribution = Vec::with_capacity(num_distributions);
    for d in 0..num_distributions as u64 {
        let draw = sampler.draw(d)?;
        let table = run_replicates(&roster, &draw.distribution, scenario.name(), d, replicates, seed);
        let mut power = Vec::with_capacity(k);
        let mut failures = Vec::with_capacity(k);
        for (t, test) in tests.iter().enumerate() {
            let (rej, fail) = tally(&table, t, alpha, test.name())?;
            power.push(rej as f64 / replicates as f64);
            failures.push(fail);
        }
        per_distribution.push(DistributionPower {
            index: d,
            distribution: draw.distribution.name(),
            latent: draw.latent,
            power,
            failures,
        });
    }

    let count = num_distributions as f64;
    let mut rank_frequency = vec![vec![0.0; k]; k];
    let mut average_rank = vec![0.0; k];
    let mut average_power = vec![0.0; k];
    for row in &per_distribution {
        let shares = rank_shares(&row.power);
        for t in 0..k {
            average_power[t] += row.power[t] / count;
            for r in 0..k {
                rank_frequency[t][r] += shares[t][r] / count;
                average_rank[t] += (r + 1) as f64 * shares[t][r] / count;
            }
        }
    }
    Ok(RankSummary {
        scenario: scenario.name().to_string(),
        tests: tests.iter().map(|t| t.name().to_string()).collect(),
        n,
        alpha,
        distributions: num_distributions,
        replicates,
        seed,
        rank_frequency,
        average_rank,
        average_power,
        per_distribution,
    })
}
