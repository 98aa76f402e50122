//! `pitos`: goodness-of-fit testing on [0, 1] and the simulation harness.
//!
//! Output formats (column orders are frozen):
//!
//! * `test`: one JSON object. PITOS: `test, n, m, statistic, p_value,
//!   p_star`. Classical tests: `test, n, statistic, p_value, null_b,
//!   null_seed`. `--emit-detail` writes CSV `k,i,j,u,p`.
//! * `pairs`: CSV `k,i,j` (k is 1-based).
//! * `sample`: one value per line.
//! * `scenarios`: CSV `index,scenario,distribution,<latent...>,attempts`.
//! * `power`: CSV `distribution,test,n,alpha,replicates,rejections,
//!   rejection_rate,mc_std_err,failures,seed`.
//! * `calibrate`: CSV `test,n,threshold,cdf,cdf_uncorrected`
//!   (`cdf_uncorrected` is empty for classical tests).
//! * `study`: CSV `scenario,test,n,alpha,distributions,replicates,
//!   average_power,average_rank,rank_1..rank_k`; `--per-dist` adds CSV
//!   `index,distribution,latent,test,power,failures`.
//!
//! `power`, `calibrate` and `study` also write `<out>.json` (the CSV path
//! with its extension replaced) holding the configuration and results.

mod input;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;
use rand::distr::Open01;
use rand::Rng;
use serde::Serialize;

use pitos::classic::{classic_verdict, NullCache, NullStatistic, CACHE_DIR_ENV};
use pitos::distributions::{Distribution, Scenario, ScenarioSampler};
use pitos::harness::{
    null_pvalue_cdf, power_curve, replicate_dataset, scenario_study, NullSettings, TestKind, DESK_NULL_B,
    DESK_REPLICATES, FULL_SCALE,
};
use pitos::pitos::{OrderedSample, Pitos, PitosOptions};
use pitos::quasirandom::{PairConfig, PairSequence, PairSource};
use pitos::rng::{self, domain};
use pitos::rosenblatt::iid_transform;
use pitos::special::BetaParams;

#[derive(Parser)]
#[command(name = "pitos", version, about = "Goodness-of-fit tests for data on [0, 1]")]
struct Cli {
    /// Worker threads for simulations (0: one per core). Results do not
    /// depend on this value.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Directory for cached empirical nulls.
    #[arg(long, global = true, env = CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test one sample for uniformity and print a JSON verdict.
    Test(TestArgs),
    /// Print the pair sequence for a sample size as CSV.
    Pairs(PairsArgs),
    /// Draw a sample from a named distribution.
    Sample(SampleArgs),
    /// Draw distributions from a randomized scenario.
    Scenarios(ScenariosArgs),
    /// Estimate rejection rates on one alternative.
    Power(PowerArgs),
    /// Empirical CDF of null p-values.
    Calibrate(CalibrateArgs),
    /// Average power and rank of each test over a scenario.
    Study(StudyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Pitos,
    Ad,
    Nb,
    Ks,
    Cvm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SourceArg {
    Halton,
    Random,
}

#[derive(Args)]
struct PairArgs {
    /// Warp distribution shapes `a,b` for the pair generator.
    #[arg(long, value_name = "A,B", value_parser = parse_warp)]
    warp: Option<BetaParams>,

    /// Point source for the pair generator (`random` is seeded by --seed).
    #[arg(long, value_enum, default_value = "halton")]
    pair_source: SourceArg,
}

impl PairArgs {
    fn config(&self, seed: u64) -> PairConfig {
        let mut config = PairConfig::default();
        if let Some(w) = self.warp {
            config.warp = w;
        }
        if self.pair_source == SourceArg::Random {
            config.source = PairSource::Random { seed };
        }
        config
    }
}

#[derive(Args)]
struct TestArgs {
    /// Sample file, one value per line (`-` reads standard input).
    #[arg(long)]
    input: PathBuf,

    #[arg(long, value_enum, default_value = "pitos")]
    method: Method,

    /// Apply this distribution's (randomized) PIT before testing.
    #[arg(long, value_name = "NAME")]
    null_cdf: Option<String>,

    /// Write per-pair `k,i,j,u,p` rows here (PITOS only).
    #[arg(long, value_name = "PATH")]
    emit_detail: Option<PathBuf>,

    /// Replicates in the empirical null of a classical test.
    #[arg(long, default_value_t = DESK_NULL_B, value_parser = positive)]
    null_b: usize,

    /// Write the verdict here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,

    #[command(flatten)]
    pairs: PairArgs,
}

#[derive(Args)]
struct PairsArgs {
    #[arg(long, value_parser = positive)]
    n: usize,

    #[arg(long)]
    out: Option<PathBuf>,

    #[command(flatten)]
    pairs: PairArgs,
}

#[derive(Args)]
struct SampleArgs {
    /// Distribution, e.g. `uniform`, `beta(2,3)`, `bump(0.5,0.002,0.08)`.
    #[arg(long)]
    dist: String,

    #[arg(long, value_parser = positive)]
    n: usize,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScenariosArgs {
    /// Scenario name, e.g. `random-bump`.
    #[arg(long)]
    name: String,

    #[arg(long, value_parser = positive)]
    count: usize,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Scale {
    /// Replicates per estimate [default: 2000, or 100000 with --full-scale].
    #[arg(long, value_parser = positive)]
    reps: Option<usize>,

    /// Empirical null size [default: 20000, or 100000 with --full-scale].
    #[arg(long, value_parser = positive)]
    null_b: Option<usize>,

    /// Use full-scale defaults for --reps and --null-b.
    #[arg(long)]
    full_scale: bool,
}

impl Scale {
    fn reps(&self) -> usize {
        self.reps
            .unwrap_or(if self.full_scale { FULL_SCALE } else { DESK_REPLICATES })
    }

    fn null_b(&self) -> usize {
        self.null_b
            .unwrap_or(if self.full_scale { FULL_SCALE } else { DESK_NULL_B })
    }
}

#[derive(Args)]
struct PowerArgs {
    /// Distribution name, or a scenario name (see --scenario-index).
    #[arg(long)]
    dist: String,

    /// Which draw to use when --dist names a scenario.
    #[arg(long, default_value_t = 0)]
    scenario_index: u64,

    /// Tests to run: pitos, ad, nb, ks, cvm, lrt.
    #[arg(long, value_delimiter = ',', default_value = "pitos,ad,nb,ks,cvm")]
    tests: Vec<String>,

    /// Sample sizes.
    #[arg(long, value_delimiter = ',', value_parser = positive, default_value = "100")]
    n: Vec<usize>,

    #[arg(long, default_value_t = 0.05, value_parser = level)]
    alpha: f64,

    #[command(flatten)]
    scale: Scale,

    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    /// pitos, ad, nb, ks or cvm.
    #[arg(long)]
    test: String,

    #[arg(long, value_parser = positive)]
    n: usize,

    /// Thresholds [default: 0.001..0.009 and 0.01..1.00].
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,

    #[command(flatten)]
    scale: Scale,

    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    scenario: String,

    /// Number of distributions drawn from the scenario.
    #[arg(long, default_value_t = 100, value_parser = positive)]
    dists: usize,

    #[arg(long, default_value_t = 100, value_parser = positive)]
    n: usize,

    #[arg(long, default_value_t = 0.05, value_parser = level)]
    alpha: f64,

    #[arg(long, value_delimiter = ',', default_value = "pitos,ad,nb,ks,cvm")]
    tests: Vec<String>,

    #[command(flatten)]
    scale: Scale,

    #[arg(long)]
    out: PathBuf,

    /// Also write per-distribution powers here.
    #[arg(long, value_name = "PATH")]
    per_dist: Option<PathBuf>,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

fn level(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v > 0.0 && v < 1.0 => Ok(v),
        _ => Err(format!("expected a number in (0, 1), got {s:?}")),
    }
}

fn parse_warp(s: &str) -> Result<BetaParams, String> {
    let (a, b) = s.split_once(',').ok_or("expected A,B")?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad shape {a:?}"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad shape {b:?}"))?;
    BetaParams::new(a, b).map_err(|e| e.to_string())
}

struct RunConfig {
    seed: u64,
    cache: Option<NullCache>,
}

impl RunConfig {
    fn nulls(&self, b: usize) -> NullSettings {
        NullSettings {
            b,
            seed: self.seed,
            cache: self.cache.clone(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("starting the thread pool")?;
    }
    let ctx = RunConfig {
        seed: cli.seed,
        cache: cli.cache_dir.map(NullCache::new),
    };
    match cli.command {
        Command::Test(a) => cmd_test(&ctx, a),
        Command::Pairs(a) => cmd_pairs(&ctx, a),
        Command::Sample(a) => cmd_sample(&ctx, a),
        Command::Scenarios(a) => cmd_scenarios(&ctx, a),
        Command::Power(a) => cmd_power(&ctx, a),
        Command::Calibrate(a) => cmd_calibrate(&ctx, a),
        Command::Study(a) => cmd_study(&ctx, a),
    }
}

fn pair_sequence(n: usize, args: &PairArgs, seed: u64) -> Result<PairSequence> {
    let config = args.config(seed);
    if !config.is_default() {
        warn!("non-default pair sequence: the 1.15 correction was calibrated for the default sequence only");
    }
    Ok(PairSequence::with_config(n, &config)?)
}

#[derive(Serialize)]
struct TestReport {
    test: String,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    statistic: f64,
    p_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    null_b: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    null_seed: Option<u64>,
}

fn cmd_test(ctx: &RunConfig, a: TestArgs) -> Result<()> {
    let mut values = input::read_values(&a.input)?;
    if let Some(name) = &a.null_cdf {
        let law: Distribution = name.parse()?;
        let mut stream = rng::stream(ctx.seed, domain::PIT, 0, 0);
        let u: Vec<f64> = (0..values.len()).map(|_| stream.sample(Open01)).collect();
        values = iid_transform(&values, &law, &u)?;
    }
    let sample = OrderedSample::new(values)?;
    let report = if a.method == Method::Pitos {
        let pairs = pair_sequence(sample.n(), &a.pairs, ctx.seed)?;
        let options = PitosOptions {
            keep_detail: a.emit_detail.is_some(),
            ..PitosOptions::default()
        };
        let result = Pitos::new(pairs, options).evaluate(&sample)?;
        if let (Some(path), Some(detail)) = (&a.emit_detail, &result.detail) {
            let mut w = output::csv_writer(Some(path))?;
            w.write_record(["k", "i", "j", "u", "p"])?;
            for (k, d) in detail.iter().enumerate() {
                w.serialize((k + 1, d.i, d.j, d.u, d.p))?;
            }
            w.flush()?;
        }
        TestReport {
            test: "PITOS".into(),
            n: result.n,
            m: Some(result.m),
            statistic: result.statistic,
            p_value: result.p_value,
            p_star: Some(result.p_star),
            null_b: None,
            null_seed: None,
        }
    } else {
        if a.emit_detail.is_some() {
            bail!("--emit-detail is only available for --method pitos");
        }
        if a.pairs.warp.is_some() || a.pairs.pair_source != SourceArg::Halton {
            bail!("--warp and --pair-source only apply to --method pitos");
        }
        let stat = match a.method {
            Method::Ad => NullStatistic::Ad,
            Method::Nb => NullStatistic::Nb,
            Method::Ks => NullStatistic::Ks,
            Method::Cvm => NullStatistic::Cvm,
            Method::Pitos => unreachable!(),
        };
        let null = ctx.nulls(a.null_b).null_for(stat, sample.n())?;
        let v = classic_verdict(stat, &sample, &null)?;
        TestReport {
            test: v.test_name,
            n: v.n,
            m: None,
            statistic: v.statistic,
            p_value: v.p_value,
            p_star: None,
            null_b: v.null_replicates,
            null_seed: v.seed,
        }
    };
    output::write_json(a.out.as_deref(), &report)
}

fn cmd_pairs(ctx: &RunConfig, a: PairsArgs) -> Result<()> {
    let pairs = pair_sequence(a.n, &a.pairs, ctx.seed)?;
    let mut w = output::csv_writer(a.out.as_deref())?;
    w.write_record(["k", "i", "j"])?;
    for (k, &(i, j)) in pairs.pairs().iter().enumerate() {
        w.serialize((k + 1, i, j))?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_sample(ctx: &RunConfig, a: SampleArgs) -> Result<()> {
    let dist: Distribution = a.dist.parse()?;
    let data = replicate_dataset(&dist, a.n, 0, ctx.seed);
    let mut out = output::sink(a.out.as_deref())?;
    for v in data {
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_scenarios(ctx: &RunConfig, a: ScenariosArgs) -> Result<()> {
    let scenario: Scenario = a.name.parse()?;
    let sampler = ScenarioSampler::new(scenario, ctx.seed);
    let mut w = output::csv_writer(a.out.as_deref())?;
    let mut header = vec!["index", "scenario", "distribution"];
    header.extend(scenario.latent_names());
    header.push("attempts");
    w.write_record(&header)?;
    for index in 0..a.count as u64 {
        let draw = sampler.draw(index)?;
        let mut row = vec![index.to_string(), scenario.name().to_string(), draw.distribution.name()];
        row.extend(draw.latent.iter().map(f64::to_string));
        row.push(draw.attempts.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_roster(names: &[String], truth: Option<&Distribution>) -> Result<Vec<TestKind>> {
    if names.is_empty() {
        bail!("the test roster is empty");
    }
    names
        .iter()
        .map(|name| Ok(TestKind::parse(name, truth.cloned())?))
        .collect()
}

#[derive(Serialize)]
struct PowerConfig<'a> {
    distribution: String,
    source: &'a str,
    tests: Vec<&'static str>,
    n: &'a [usize],
    alpha: f64,
    replicates: usize,
    null_b: usize,
    seed: u64,
}

fn cmd_power(ctx: &RunConfig, a: PowerArgs) -> Result<()> {
    let dist = match a.dist.parse::<Distribution>() {
        Ok(d) => d,
        Err(dist_err) => match a.dist.parse::<Scenario>() {
            Ok(s) => ScenarioSampler::new(s, ctx.seed).draw(a.scenario_index)?.distribution,
            Err(_) => return Err(dist_err.into()),
        },
    };
    let tests = parse_roster(&a.tests, Some(&dist))?;
    let reps = a.scale.reps();
    let null_b = a.scale.null_b();
    let reports = power_curve(&dist, &tests, &a.n, a.alpha, reps, ctx.seed, &ctx.nulls(null_b))?;

    let mut w = output::csv_writer(Some(&a.out))?;
    w.write_record([
        "distribution",
        "test",
        "n",
        "alpha",
        "replicates",
        "rejections",
        "rejection_rate",
        "mc_std_err",
        "failures",
        "seed",
    ])?;
    for r in &reports {
        w.serialize((
            &r.distribution,
            &r.test,
            r.n,
            r.alpha,
            r.replicates,
            r.rejections,
            r.rejection_rate,
            r.mc_std_err,
            r.failures,
            r.seed,
        ))?;
    }
    w.flush()?;
    let config = PowerConfig {
        distribution: dist.name(),
        source: &a.dist,
        tests: tests.iter().map(TestKind::name).collect(),
        n: &a.n,
        alpha: a.alpha,
        replicates: reps,
        null_b,
        seed: ctx.seed,
    };
    output::write_sidecar(&a.out, "power", config, &reports)
}

fn default_grid() -> Vec<f64> {
    (1..10)
        .map(|k| k as f64 / 1000.0)
        .chain((1..=100).map(|k| k as f64 / 100.0))
        .collect()
}

#[derive(Serialize)]
struct CalibrateConfig {
    test: &'static str,
    n: usize,
    replicates: usize,
    null_b: usize,
    seed: u64,
}

fn cmd_calibrate(ctx: &RunConfig, a: CalibrateArgs) -> Result<()> {
    let test = TestKind::parse(&a.test, None)?;
    let grid = if a.grid.is_empty() {
        default_grid()
    } else {
        a.grid.clone()
    };
    let reps = a.scale.reps();
    let null_b = a.scale.null_b();
    let report = null_pvalue_cdf(test, a.n, reps, ctx.seed, &grid, &ctx.nulls(null_b))?;

    let mut w = output::csv_writer(Some(&a.out))?;
    w.write_record(["test", "n", "threshold", "cdf", "cdf_uncorrected"])?;
    for (k, (&t, &c)) in report.thresholds.iter().zip(&report.cdf).enumerate() {
        let raw = report
            .cdf_uncorrected
            .as_ref()
            .map(|u| u[k].to_string())
            .unwrap_or_default();
        w.write_record([report.test.clone(), a.n.to_string(), t.to_string(), c.to_string(), raw])?;
    }
    w.flush()?;
    let config = CalibrateConfig {
        test: test.name(),
        n: a.n,
        replicates: reps,
        null_b,
        seed: ctx.seed,
    };
    output::write_sidecar(&a.out, "calibrate", config, &report)
}

#[derive(Serialize)]
struct StudyConfig<'a> {
    scenario: &'a str,
    tests: Vec<&'static str>,
    distributions: usize,
    n: usize,
    alpha: f64,
    replicates: usize,
    null_b: usize,
    seed: u64,
}

fn cmd_study(ctx: &RunConfig, a: StudyArgs) -> Result<()> {
    let scenario: Scenario = a.scenario.parse()?;
    let tests = parse_roster(&a.tests, None)?;
    let reps = a.scale.reps();
    let null_b = a.scale.null_b();
    let summary = scenario_study(
        scenario,
        &tests,
        a.dists,
        reps,
        a.n,
        a.alpha,
        ctx.seed,
        &ctx.nulls(null_b),
    )?;

    let k = tests.len();
    let mut w = output::csv_writer(Some(&a.out))?;
    let mut header: Vec<String> = [
        "scenario",
        "test",
        "n",
        "alpha",
        "distributions",
        "replicates",
        "average_power",
        "average_rank",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=k).map(|r| format!("rank_{r}")));
    w.write_record(&header)?;
    for t in 0..k {
        let mut row = vec![
            summary.scenario.clone(),
            summary.tests[t].clone(),
            summary.n.to_string(),
            summary.alpha.to_string(),
            summary.distributions.to_string(),
            summary.replicates.to_string(),
            summary.average_power[t].to_string(),
            summary.average_rank[t].to_string(),
        ];
        row.extend(summary.rank_frequency[t].iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;

    if let Some(path) = &a.per_dist {
        write_per_distribution(path, scenario, &summary)?;
    }
    let config = StudyConfig {
        scenario: scenario.name(),
        tests: tests.iter().map(TestKind::name).collect(),
        distributions: a.dists,
        n: a.n,
        alpha: a.alpha,
        replicates: reps,
        null_b,
        seed: ctx.seed,
    };
    output::write_sidecar(&a.out, "study", config, &summary)
}

fn write_per_distribution(path: &Path, scenario: Scenario, summary: &pitos::harness::RankSummary) -> Result<()> {
    let mut w = output::csv_writer(Some(path))?;
    w.write_record(["index", "distribution", "latent", "test", "power", "failures"])?;
    for row in &summary.per_distribution {
        let latent = scenario
            .latent_names()
            .iter()
            .zip(&row.latent)
            .map(|(name, v)| format!("{name}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        for (t, test) in summary.tests.iter().enumerate() {
            w.write_record([
                row.index.to_string(),
                row.distribution.clone(),
                latent.clone(),
                test.clone(),
                row.power[t].to_string(),
                row.failures[t].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
