//! Classical goodness-of-fit statistics and Monte Carlo null distributions.
//!
//! Every statistic rejects for large values. p-values come from simulated
//! nulls with the add-one estimator `(1 + #{T_b >= t}) / (B + 1)`.

use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use log::{debug, warn};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::pitos::{OrderedSample, TestVerdict};
use crate::rng::{self, domain};

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const SQRT_5: f64 = 2.236_067_977_499_79;

/// Anderson-Darling. `+inf` when any value is exactly 0 or 1.
pub fn ad_statistic(sample: &OrderedSample) -> f64 {
    let x = sample.sorted();
    let n = x.len();
    if x[0] <= 0.0 || x[n - 1] >= 1.0 {
        return f64::INFINITY;
    }
    let sum: f64 = (0..n)
        .map(|i| (2 * i + 1) as f64 * (x[i].ln() + (-x[n - 1 - i]).ln_1p()))
        .sum();
    -(n as f64) - sum / n as f64
}

/// Second-order Neyman-Barton with `pi_1(x) = 2 sqrt(3) x` and
/// `pi_2(x) = sqrt(5) (6x^2 - 0.5)`.
pub fn nb_statistic(sample: &OrderedSample) -> f64 {
    let x = sample.sorted();
    let root_n = (x.len() as f64).sqrt();
    let s1: f64 = x.iter().map(|&v| 2.0 * SQRT_3 * v).sum::<f64>() / root_n;
    let s2: f64 = x.iter().map(|&v| SQRT_5 * (6.0 * v * v - 0.5)).sum::<f64>() / root_n;
    s1 * s1 + s2 * s2
}

/// Kolmogorov-Smirnov: the exact supremum of `|F_n(t) - t|`.
pub fn ks_statistic(sample: &OrderedSample) -> f64 {
    let x = sample.sorted();
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| ((i + 1) as f64 / n - v).max(v - i as f64 / n))
        .fold(0.0, f64::max)
}

/// Cramer-von Mises.
pub fn cvm_statistic(sample: &OrderedSample) -> f64 {
    let x = sample.sorted();
    let n = x.len() as f64;
    let sum: f64 = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let d = (2 * i + 1) as f64 / (2.0 * n) - v;
            d * d
        })
        .sum();
    1.0 / (12.0 * n) + sum
}

/// Log-likelihood of the sample under `log_density`. May be `-inf`.
pub fn lrt_statistic(sample: &OrderedSample, log_density: impl Fn(f64) -> f64) -> f64 {
    sample.sorted().iter().map(|&v| log_density(v)).sum()
}

/// A statistic that has an empirical null.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NullStatistic {
    Ad,
    Nb,
    Ks,
    Cvm,
    /// Likelihood of a fully specified alternative.
    Lrt(Distribution),
}

impl NullStatistic {
    pub const CLASSICAL: [NullStatistic; 4] = [
        NullStatistic::Ad,
        NullStatistic::Nb,
        NullStatistic::Ks,
        NullStatistic::Cvm,
    ];

    /// Accepts `ad`, `nb`, `ks`, `cvm` in any case.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "ad" => Ok(NullStatistic::Ad),
            "nb" => Ok(NullStatistic::Nb),
            "ks" => Ok(NullStatistic::Ks),
            "cvm" => Ok(NullStatistic::Cvm),
            _ => Err(Error::UnknownTest(name.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NullStatistic::Ad => "AD",
            NullStatistic::Nb => "NB",
            NullStatistic::Ks => "KS",
            NullStatistic::Cvm => "CvM",
            NullStatistic::Lrt(_) => "LRT",
        }
    }

    /// Identifies the null distribution; includes the alternative for LRT.
    pub fn key(&self) -> String {
        match self {
            NullStatistic::Lrt(d) => format!("LRT[{d}]"),
            other => other.name().to_string(),
        }
    }

    pub fn compute(&self, sample: &OrderedSample) -> Result<f64> {
        Ok(match self {
            NullStatistic::Ad => ad_statistic(sample),
            NullStatistic::Nb => nb_statistic(sample),
            NullStatistic::Ks => ks_statistic(sample),
            NullStatistic::Cvm => cvm_statistic(sample),
            NullStatistic::Lrt(d) => {
                if !d.is_continuous() {
                    return Err(Error::domain(format!("LRT needs a density; {d} has none")));
                }
                lrt_statistic(sample, |x| d.log_density(x).expect("continuous law"))
            }
        })
    }
}

impl fmt::Display for NullStatistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// Sorted null statistics for one `(statistic, n, B, seed)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalNull {
    pub test_name: String,
    pub n: usize,
    pub b: usize,
    pub seed: u64,
    #[serde(skip)]
    pub statistics: Vec<f64>,
}

impl EmpiricalNull {
    /// Add-one upper-tail p-value; see [`empirical_p_value`].
    pub fn p_value(&self, observed: f64) -> f64 {
        empirical_p_value(self, observed)
    }
}

/// Simulate `b` Uniform(0, 1) samples of size `n` and sort their statistics.
/// Replicate `r` draws from stream `(seed, NULL, tag(key/n), r)`, so the
/// result does not depend on the thread count.
pub fn build_empirical_null(stat: NullStatistic, n: usize, b: usize, seed: u64) -> Result<EmpiricalNull> {
    if b == 0 {
        return Err(Error::domain("empirical null needs B >= 1"));
    }
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let key = stat.key();
    let major = rng::tag(&format!("{key}/{n}"));
    let mut statistics = (0..b as u64)
        .into_par_iter()
        .map(|r| {
            let mut stream = rng::stream(seed, domain::NULL, major, r);
            let raw: Vec<f64> = (0..n).map(|_| stream.random::<f64>()).collect();
            stat.compute(&OrderedSample::new(raw)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    statistics.sort_by(f64::total_cmp);
    Ok(EmpiricalNull {
        test_name: key,
        n,
        b,
        seed,
        statistics,
    })
}

/// `(1 + #{null >= observed}) / (B + 1)`. A NaN observation gets 1.
pub fn empirical_p_value(null: &EmpiricalNull, observed: f64) -> f64 {
    let b = null.statistics.len();
    if observed.is_nan() {
        return 1.0;
    }
    let below = null.statistics.partition_point(|&s| s < observed);
    (1 + b - below) as f64 / (b + 1) as f64
}

/// Statistic and empirical p-value of a classical test as a verdict.
pub fn classic_verdict(stat: NullStatistic, sample: &OrderedSample, null: &EmpiricalNull) -> Result<TestVerdict> {
    if null.n != sample.n() || null.test_name != stat.key() {
        return Err(Error::Contract(format!(
            "null for {} at n = {} used with {} at n = {}",
            null.test_name,
            null.n,
            stat.key(),
            sample.n()
        )));
    }
    let statistic = stat.compute(sample)?;
    Ok(TestVerdict {
        test_name: stat.name().to_string(),
        n: sample.n(),
        statistic,
        p_value: empirical_p_value(null, statistic),
        p_uncorrected: None,
        m: None,
        null_replicates: Some(null.b),
        seed: Some(null.seed),
        detail: None,
    })
}

const CACHE_MAGIC: &[u8; 8] = b"PITOSNUL";
const CACHE_VERSION: u32 = 1;

/// Environment variable naming the default null cache directory.
pub const CACHE_DIR_ENV: &str = "PITOS_CACHE_DIR";

/// On-disk store of empirical nulls keyed by `(statistic, n, B, seed)`.
///
/// File layout (little endian): magic `PITOSNUL`, `u32` version, `u32`
/// key length, key bytes, `u64` n, `u64` B, `u64` seed, then B `f64`
/// sorted statistics. Files are written to a temporary name and renamed
/// into place, so readers never see partial files.
#[derive(Clone, Debug)]
pub struct NullCache {
    dir: PathBuf,
}

impl NullCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// The directory from `PITOS_CACHE_DIR`, if set and nonempty.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_DIR_ENV).filter(|v| !v.is_empty()).map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, stat: NullStatistic, n: usize, b: usize, seed: u64) -> PathBuf {
        let key = stat.key();
        let slug: String = key
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        self.dir
            .join(format!("{slug}-{:016x}-n{n}-b{b}-s{seed}.null", rng::tag(&key)))
    }

    /// Load a cached null, or build and store it. Unreadable or mismatched
    /// files are rebuilt with a warning.
    pub fn load_or_build(&self, stat: NullStatistic, n: usize, b: usize, seed: u64) -> Result<EmpiricalNull> {
        let path = self.path_for(stat, n, b, seed);
        match read_null(&path) {
            Ok(null) if null.test_name == stat.key() && null.n == n && null.b == b && null.seed == seed => {
                debug!("loaded null {} from {}", null.test_name, path.display());
                return Ok(null);
            }
            Ok(_) => warn!("{} holds a different null; rebuilding", path.display()),
            Err(Error::Io(e)) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => warn!("{e}; rebuilding"),
        }
        let null = build_empirical_null(stat, n, b, seed)?;
        write_null(&path, &null)?;
        Ok(null)
    }
}

fn corrupt(path: &Path, reason: impl Into<String>) -> Error {
    Error::CorruptCache {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    path: &'a Path,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < k {
            return Err(corrupt(self.path, "truncated"));
        }
        let (head, tail) = self.bytes.split_at(k);
        self.bytes = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// Read a null written by [`write_null`].
pub fn read_null(path: &Path) -> Result<EmpiricalNull> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut r = ByteReader { bytes: &bytes, path };
    if r.take(8)? != CACHE_MAGIC {
        return Err(corrupt(path, "bad magic"));
    }
    let version = r.u32()?;
    if version != CACHE_VERSION {
        return Err(corrupt(path, format!("unsupported version {version}")));
    }
    let key_len = r.u32()? as usize;
    let key = String::from_utf8(r.take(key_len)?.to_vec()).map_err(|_| corrupt(path, "key is not UTF-8"))?;
    let n = r.u64()? as usize;
    let b = r.u64()? as usize;
    let seed = r.u64()?;
    if r.bytes.len() != 8 * b {
        return Err(corrupt(
            path,
            format!("expected {b} statistics, found {} bytes", r.bytes.len()),
        ));
    }
    let mut statistics = Vec::with_capacity(b);
    for _ in 0..b {
        statistics.push(f64::from_bits(r.u64()?));
    }
    if statistics.windows(2).any(|w| w[0].total_cmp(&w[1]).is_gt()) {
        return Err(corrupt(path, "statistics are not sorted"));
    }
    Ok(EmpiricalNull {
        test_name: key,
        n,
        b,
        seed,
        statistics,
    })
}

/// Write `null` to `path` atomically, creating the directory if needed.
pub fn write_null(path: &Path, null: &EmpiricalNull) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut buf = Vec::with_capacity(48 + null.test_name.len() + 8 * null.statistics.len());
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    buf.extend_from_slice(&(null.test_name.len() as u32).to_le_bytes());
    buf.extend_from_slice(null.test_name.as_bytes());
    for w in [null.n as u64, null.statistics.len() as u64, null.seed] {
        buf.extend_from_slice(&w.to_le_bytes());
    }
    for s in &null.statistics {
        buf.extend_from_slice(&s.to_bits().to_le_bytes());
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&buf)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
