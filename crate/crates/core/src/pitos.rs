//! The PITOS test: probability integral transforms of conditional order
//! statistics, one p-value per index pair, Cauchy combination, and the
//! multiplicative calibration correction.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quasirandom::PairSequence;
use crate::special::{beta_tails, cauchy_isf, cauchy_sf};

/// Multiplier applied to the combined p-value.
pub const CORRECTION: f64 = 1.15;

/// Per-pair p-values are clamped into `[P_CLAMP, 1 - P_CLAMP]` so every
/// Cauchy quantile is finite. A clamped term contributes at most
/// `1/(pi P_CLAMP) / m` to the combined statistic.
pub const P_CLAMP: f64 = 1e-15;

/// Unique pairs above this count are evaluated on the rayon pool.
const PARALLEL_MIN_PAIRS: usize = 16_384;

/// Above this sample size fewer than 2% of the default pairs repeat, so
/// the deduplication plan costs more than it saves and is skipped.
pub const CACHE_MAX_N: usize = 1_000;

/// A validated sample on [0, 1] together with its order statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderedSample {
    raw: Vec<f64>,
    sorted: Vec<f64>,
}

impl OrderedSample {
    /// Rejects empty input, NaN, and anything outside [0, 1]; nothing is
    /// dropped or perturbed. Ties are kept.
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptySample);
        }
        for (index, &value) in raw.iter().enumerate() {
            if value.is_nan() {
                return Err(Error::NotANumber { index });
            }
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfRange { index, value });
            }
        }
        let mut sorted = raw.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        Ok(Self { raw, sorted })
    }

    pub fn n(&self) -> usize {
        self.raw.len()
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

/// CDF of `X_(j)` given `X_(i) = x` under i.i.d. Uniform(0, 1), evaluated at `y`
/// (the marginal CDF of `X_(j)` when `i == j`).
///
/// When `i < j` and `x == 1` (or `i > j` and `x == 0`) the conditioning event
/// pins `X_(j)` to the boundary and the result is 1. Arguments on the wrong
/// side of `x` are clamped to the support rather than rejected.
pub fn conditional_os_cdf(n: usize, i: usize, j: usize, x: f64, y: f64) -> Result<f64> {
    if !(1..=n).contains(&i) || !(1..=n).contains(&j) {
        return Err(Error::domain(format!("indices ({i}, {j}) outside 1..={n}")));
    }
    for (name, v) in [("x", x), ("y", y)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(format!("{name} = {v} is outside [0, 1]")));
        }
    }
    Ok(pair_tails(n, i, j, x, y).0)
}

/// `(u, 1 - u)` for the pair `(i, j)`, each tail computed directly.
fn pair_tails(n: usize, i: usize, j: usize, x: f64, y: f64) -> (f64, f64) {
    use std::cmp::Ordering::*;
    match i.cmp(&j) {
        Equal => beta_tails(y, 1.0 - y, j as f64, (n - j + 1) as f64),
        Less => {
            if x >= 1.0 {
                return (1.0, 0.0);
            }
            let z = ((y - x) / (1.0 - x)).clamp(0.0, 1.0);
            let zc = ((1.0 - y) / (1.0 - x)).clamp(0.0, 1.0);
            beta_tails(z, zc, (j - i) as f64, (n - j + 1) as f64)
        }
        Greater => {
            if x <= 0.0 {
                return (1.0, 0.0);
            }
            let z = (y / x).clamp(0.0, 1.0);
            let zc = ((x - y) / x).clamp(0.0, 1.0);
            beta_tails(z, zc, j as f64, (i - j) as f64)
        }
    }
}

/// One entry of the optional per-pair detail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairPValue {
    pub i: u32,
    pub j: u32,
    pub u: f64,
    pub p: f64,
}

#[derive(Clone, Copy, Debug)]
struct PairEval {
    u: f64,
    p: f64,
    term: f64,
}

fn eval_pair(n: usize, sorted: &[f64], (i, j): (u32, u32)) -> PairEval {
    let (i, j) = (i as usize, j as usize);
    let (lo, hi) = pair_tails(n, i, j, sorted[i - 1], sorted[j - 1]);
    let p = (2.0 * lo.min(hi)).clamp(P_CLAMP, 1.0 - P_CLAMP);
    PairEval {
        u: lo,
        p,
        term: cauchy_isf(p),
    }
}

/// Deduplicated view of a pair sequence: each distinct pair is evaluated
/// once and positions refer to it by slot.
#[derive(Clone, Debug)]
struct PairPlan {
    unique: Vec<(u32, u32)>,
    slot: Vec<u32>,
}

impl PairPlan {
    /// Two stable counting-sort passes (by j, then by i) group equal
    /// pairs in O(m + n).
    fn build(seq: &PairSequence) -> Self {
        let n = seq.n();
        let pairs = seq.pairs();
        let m = pairs.len();

        let counting_pass = |order: &[u32], key: &dyn Fn(u32) -> usize| -> Vec<u32> {
            let mut start = vec![0usize; n + 2];
            for &pos in order {
                start[key(pos) + 1] += 1;
            }
            for k in 1..start.len() {
                start[k] += start[k - 1];
            }
            let mut out = vec![0u32; m];
            for &pos in order {
                let k = key(pos);
                out[start[k]] = pos;
                start[k] += 1;
            }
            out
        };

        let identity: Vec<u32> = (0..m as u32).collect();
        let by_j = counting_pass(&identity, &|pos| pairs[pos as usize].1 as usize);
        let by_ij = counting_pass(&by_j, &|pos| pairs[pos as usize].0 as usize);

        let mut unique = Vec::new();
        let mut slot = vec![0u32; m];
        let mut last = None;
        for &pos in &by_ij {
            let pair = pairs[pos as usize];
            if last != Some(pair) {
                unique.push(pair);
                last = Some(pair);
            }
            slot[pos as usize] = (unique.len() - 1) as u32;
        }
        Self { unique, slot }
    }
}

/// Switches for [`Pitos`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PitosOptions {
    /// Evaluate each distinct pair once and reuse it for repeats
    /// (only for `n <= CACHE_MAX_N`; results are identical either way).
    pub cache: bool,
    /// Keep every `(i, j, u, p)` in sequence order.
    pub keep_detail: bool,
}

impl Default for PitosOptions {
    fn default() -> Self {
        Self {
            cache: true,
            keep_detail: false,
        }
    }
}

/// Outcome of one PITOS evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PitosResult {
    pub n: usize,
    pub m: usize,
    /// Mean of the Cauchy-transformed pair p-values.
    pub statistic: f64,
    /// Combined p-value before correction.
    pub p_value: f64,
    /// `min(1, 1.15 p)`.
    pub p_star: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Vec<PairPValue>>,
}

/// A PITOS test bound to one pair sequence. Reuse it across samples of the
/// same size: the deduplication plan is built once.
#[derive(Clone, Debug)]
pub struct Pitos {
    pairs: PairSequence,
    plan: Option<PairPlan>,
    options: PitosOptions,
}

impl Pitos {
    pub fn new(pairs: PairSequence, options: PitosOptions) -> Self {
        let plan = (options.cache && pairs.n() <= CACHE_MAX_N).then(|| PairPlan::build(&pairs));
        Self { pairs, plan, options }
    }

    /// Default pairs and options for sample size `n`.
    pub fn for_size(n: usize) -> Result<Self> {
        Ok(Self::new(PairSequence::generate(n)?, PitosOptions::default()))
    }

    pub fn pairs(&self) -> &PairSequence {
        &self.pairs
    }

    pub fn options(&self) -> PitosOptions {
        self.options
    }

    pub fn evaluate(&self, sample: &OrderedSample) -> Result<PitosResult> {
        let n = self.pairs.n();
        if sample.n() != n {
            return Err(Error::SizeMismatch {
                pairs: n,
                sample: sample.n(),
            });
        }
        let sorted = sample.sorted();
        let seq = self.pairs.pairs();
        let m = seq.len();

        let evaluate_all = |pairs: &[(u32, u32)]| -> Vec<PairEval> {
            if pairs.len() >= PARALLEL_MIN_PAIRS {
                pairs.par_iter().map(|&pair| eval_pair(n, sorted, pair)).collect()
            } else {
                pairs.iter().map(|&pair| eval_pair(n, sorted, pair)).collect()
            }
        };

        // Summation runs in sequence order with Neumaier compensation, so
        // the cached and uncached paths agree bit for bit.
        let mut sum = NeumaierSum::default();
        let detail = match &self.plan {
            Some(plan) => {
                let evals = evaluate_all(&plan.unique);
                for &s in &plan.slot {
                    sum.add(evals[s as usize].term);
                }
                self.options.keep_detail.then(|| {
                    seq.iter()
                        .zip(&plan.slot)
                        .map(|(&(i, j), &s)| PairPValue {
                            i,
                            j,
                            u: evals[s as usize].u,
                            p: evals[s as usize].p,
                        })
                        .collect()
                })
            }
            None => {
                let evals = evaluate_all(seq);
                for e in &evals {
                    sum.add(e.term);
                }
                self.options.keep_detail.then(|| {
                    seq.iter()
                        .zip(&evals)
                        .map(|(&(i, j), e)| PairPValue { i, j, u: e.u, p: e.p })
                        .collect()
                })
            }
        };

        let statistic = sum.total() / m as f64;
        let p_value = cauchy_sf(statistic);
        Ok(PitosResult {
            n,
            m,
            statistic,
            p_value,
            p_star: corrected(p_value),
            detail,
        })
    }
}

/// `min(1, 1.15 p)`.
pub fn corrected(p: f64) -> f64 {
    (CORRECTION * p).min(1.0)
}

/// One-shot PITOS p-value for `sample` under `pairs`.
pub fn pitos_p_value(sample: &OrderedSample, pairs: &PairSequence) -> Result<TestVerdict> {
    let test = Pitos::new(pairs.clone(), PitosOptions::default());
    Ok(test.evaluate(sample)?.into())
}

#[derive(Default)]
struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// A test's statistic and p-value, with enough metadata to reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestVerdict {
    pub test_name: String,
    pub n: usize,
    pub statistic: f64,
    /// Reported p-value (`p*` for PITOS).
    pub p_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_uncorrected: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub null_replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Vec<PairPValue>>,
}

impl From<PitosResult> for TestVerdict {
    fn from(r: PitosResult) -> Self {
        TestVerdict {
            test_name: "PITOS".into(),
            n: r.n,
            statistic: r.statistic,
            p_value: r.p_star,
            p_uncorrected: Some(r.p_value),
            m: Some(r.m),
            null_replicates: None,
            seed: None,
            detail: r.detail,
        }
    }
}
