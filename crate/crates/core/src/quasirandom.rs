//! Halton points and the pair sequence that drives the PITOS p-value collection.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, domain};
use crate::special::{beta_tails, BetaParams};

/// Element `index` of the one-dimensional Halton sequence in `base`
/// (the radical inverse of `index`).
///
/// Digits are accumulated as an exact integer fraction `num / base^L` and
/// divided once, so the result is the correctly rounded radical inverse
/// whenever `base^L` fits in 53 bits.
pub fn halton(index: u64, base: u64) -> Result<f64> {
    if index < 1 {
        return Err(Error::domain("Halton index must be at least 1"));
    }
    if base < 2 {
        return Err(Error::domain(format!("Halton base must be at least 2, got {base}")));
    }
    let base_wide = base as u128;
    let mut i = index;
    let mut num: u128 = 0;
    let mut den: u128 = 1;
    while i > 0 {
        den *= base_wide;
        num = num * base_wide + (i % base) as u128;
        i /= base;
    }
    Ok(num as f64 / den as f64)
}

/// Base-2 radical inverse by bit reversal; equals `halton(index, 2)`.
fn radical_inverse_2(index: u64) -> f64 {
    debug_assert!((1..1 << 53).contains(&index));
    let bits = 64 - index.leading_zeros();
    let num = index.reverse_bits() >> (64 - bits);
    num as f64 * f64::powi(2.0, -(bits as i32))
}

/// Reversals of all 6-digit base-3 strings.
const REVERSE_729: [u32; 729] = {
    let mut table = [0u32; 729];
    let mut x = 0;
    while x < 729 {
        let (mut v, mut r, mut d) = (x as u32, 0u32, 0);
        while d < 6 {
            r = r * 3 + v % 3;
            v /= 3;
            d += 1;
        }
        table[x] = r;
        x += 1;
    }
    table
};

/// Base-3 radical inverse, six digits at a time; equals `halton(index, 3)`.
///
/// Padding the digit string to a multiple of six scales numerator and
/// denominator by the same power of 3. Both stay below 2^53 for
/// `index < 729^5`, so the single division rounds the same rational.
fn radical_inverse_3(index: u64) -> f64 {
    const GROUP: u64 = 729;
    if index >= GROUP.pow(5) {
        return halton(index, 3).expect("index >= 1");
    }
    let mut i = index;
    let mut num: u64 = 0;
    let mut den: u64 = 1;
    while i > 0 {
        num = num * GROUP + REVERSE_729[(i % GROUP) as usize] as u64;
        den *= GROUP;
        i /= GROUP;
    }
    num as f64 / den as f64
}

/// Sequence length `m = ceil(10 n ln n) + n`.
pub fn pair_count(n: usize) -> usize {
    let nf = n as f64;
    (10.0 * nf * nf.ln()).ceil() as usize + n
}

/// Where the `(u, v)` points come from before warping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PairSource {
    /// 2-D Halton sequence with bases 2 and 3.
    Halton,
    /// i.i.d. uniform points from a seeded stream (experiment option).
    Random { seed: u64 },
}

/// Configuration of the pair generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairConfig {
    /// Distribution whose inverse CDF warps the unit square.
    pub warp: BetaParams,
    pub source: PairSource,
}

impl Default for PairConfig {
    fn default() -> Self {
        Self {
            warp: BetaParams::new(0.7, 0.7).expect("valid default warp"),
            source: PairSource::Halton,
        }
    }
}

impl PairConfig {
    pub fn is_default(&self) -> bool {
        *self == Self::default()
    }
}

/// Ordered list of 1-based index pairs `(i, j)` for a sample of size `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairSequence {
    n: usize,
    pairs: Vec<(u32, u32)>,
    default_config: bool,
}

impl PairSequence {
    /// The default sequence for sample size `n`.
    pub fn generate(n: usize) -> Result<Self> {
        Self::with_config(n, &PairConfig::default())
    }

    pub fn with_config(n: usize, config: &PairConfig) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("pair sequence needs n >= 1"));
        }
        if n > u32::MAX as usize {
            return Err(Error::domain(format!("n = {n} is too large")));
        }
        let m = pair_count(n);
        let bins = WarpBins::new(n, config.warp);
        let mut pairs = Vec::with_capacity(m);
        match config.source {
            PairSource::Halton => {
                for k in 1..=(m - n) as u64 {
                    let u = radical_inverse_2(k);
                    let v = radical_inverse_3(k);
                    pairs.push((bins.bin(u), bins.bin(v)));
                }
            }
            PairSource::Random { seed } => {
                let mut stream = rng::stream(seed, domain::PAIRS, n as u64, 0);
                for _ in 0..m - n {
                    let u: f64 = stream.random();
                    let v: f64 = stream.random();
                    pairs.push((bins.bin(u), bins.bin(v)));
                }
            }
        }
        pairs.extend((1..=n as u32).map(|r| (r, r)));
        Ok(Self {
            n,
            pairs,
            default_config: config.is_default(),
        })
    }

    /// A caller-supplied sequence; every index must lie in `1..=n`.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 || n > u32::MAX as usize {
            return Err(Error::domain(format!("invalid sample size {n}")));
        }
        let mut out = Vec::new();
        for (k, (i, j)) in pairs.into_iter().enumerate() {
            if !(1..=n).contains(&i) || !(1..=n).contains(&j) {
                return Err(Error::domain(format!(
                    "pair {k} = ({i}, {j}) has an index outside 1..={n}"
                )));
            }
            out.push((i as u32, j as u32));
        }
        if out.is_empty() {
            return Err(Error::domain("pair sequence is empty"));
        }
        Ok(Self {
            n,
            pairs: out,
            default_config: false,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    /// True when produced by the default generator (Halton, Beta(0.7, 0.7) warp).
    pub fn is_default(&self) -> bool {
        self.default_config
    }
}

/// Same as [`PairSequence::generate`].
pub fn generate_pairs(n: usize) -> Result<PairSequence> {
    PairSequence::generate(n)
}

/// Maps a point `u` to `ceil(n F^{-1}(u))` without inverting `F`:
/// the answer is the smallest `i` with `u <= F(i/n)`. A guide table over
/// `u` makes each lookup O(1) on average.
struct WarpBins {
    thresholds: Vec<f64>,
    guide: Vec<u32>,
}

impl WarpBins {
    fn new(n: usize, warp: BetaParams) -> Self {
        let nf = n as f64;
        let mut thresholds: Vec<f64> = (0..=n)
            .map(|i| beta_tails(i as f64 / nf, (n - i) as f64 / nf, warp.a(), warp.b()).0)
            .collect();
        thresholds[0] = 0.0;
        thresholds[n] = 1.0;

        let cells = 2 * n;
        let mut guide = Vec::with_capacity(cells);
        let mut i = 0usize;
        for c in 0..cells {
            let edge = c as f64 / cells as f64;
            while thresholds[i] < edge {
                i += 1;
            }
            guide.push(i as u32);
        }
        Self { thresholds, guide }
    }

    fn bin(&self, u: f64) -> u32 {
        let cells = self.guide.len();
        let c = ((u * cells as f64) as usize).min(cells - 1);
        let mut i = (self.guide[c] as usize).max(1);
        while i > 1 && self.thresholds[i - 1] >= u {
            i -= 1;
        }
        while self.thresholds[i] < u {
            i += 1;
        }
        i as u32
    }
}
