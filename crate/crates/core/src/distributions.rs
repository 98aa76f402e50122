//! Alternatives on [0, 1]: the fixed zoo and the randomized scenario families.

use std::f64::consts::{LN_2, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution as _, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, domain, StreamRng};
use crate::special::{beta_cdf, ln_beta, BetaParams};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal quantile (Wichura's AS 241, about 1e-16 relative).
/// Returns -inf at 0 and +inf at 1.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("normal quantile needs p in [0, 1], got {p}")));
    }
    if p == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(ppnd16(p))
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

#[allow(clippy::excessive_precision)]
fn ppnd16(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        1.331_416_678_917_843_774_5e2,
        1.971_590_950_306_551_442_7e3,
        1.373_169_376_550_946_112_5e4,
        4.592_195_393_154_987_145_7e4,
        6.726_577_092_700_870_085_3e4,
        3.343_057_558_358_812_810_5e4,
        2.509_080_928_730_122_672_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091_125_2e1,
        6.871_870_074_920_579_083e2,
        5.394_196_021_424_751_107_7e3,
        2.121_379_430_158_659_586_7e4,
        3.930_789_580_009_271_061e4,
        2.872_908_573_572_194_267_4e4,
        5.226_495_278_852_854_561e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        2.417_807_251_774_506_117_7e-1,
        2.272_384_498_926_918_458_33e-2,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        6.897_673_349_851_000_045_5e-1,
        1.481_039_764_274_800_745_9e-1,
        1.519_866_656_361_645_719_66e-2,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        2.965_605_718_285_048_912_3e-1,
        2.653_218_952_657_612_309_3e-2,
        1.242_660_947_388_078_438_6e-3,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_879_376_9e-1,
        1.369_298_809_227_358_053_1e-1,
        1.487_536_129_085_061_485_25e-2,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let z = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -z
    } else {
        z
    }
}

/// A distribution on [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Distribution {
    Uniform,
    Beta {
        a: f64,
        b: f64,
    },
    /// Law of `Phi(Y)` with `Y ~ Laplace(0, 1)`.
    PhiLaplace,
    /// Uniform on `{0.01, 0.02, ..., 0.99}`.
    DiscreteUniform99,
    /// `mass * U(center - width/2, center + width/2) + (1 - mass) * U(0, 1)`.
    Bump {
        center: f64,
        width: f64,
        mass: f64,
    },
    /// Uniform on `[0, 1]` with `(center - halfwidth, center + halfwidth)` removed.
    Gap {
        center: f64,
        halfwidth: f64,
    },
    /// `mass * U(0, upper) + (1 - mass) * U(0, 1)`.
    Outliers {
        mass: f64,
        upper: f64,
    },
}

impl Distribution {
    pub fn beta(a: f64, b: f64) -> Result<Self> {
        BetaParams::new(a, b)?;
        Ok(Distribution::Beta { a, b })
    }

    pub fn bump(center: f64, width: f64, mass: f64) -> Result<Self> {
        let lo = center - 0.5 * width;
        let hi = center + 0.5 * width;
        if !(width > 0.0 && lo >= 0.0 && hi <= 1.0) {
            return Err(Error::domain(format!(
                "bump [{lo}, {hi}] must be a nonempty interval inside [0, 1]"
            )));
        }
        check_weight("bump mass", mass)?;
        Ok(Distribution::Bump { center, width, mass })
    }

    pub fn gap(center: f64, halfwidth: f64) -> Result<Self> {
        if !((0.0..0.5).contains(&halfwidth) && center - halfwidth >= 0.0 && center + halfwidth <= 1.0) {
            return Err(Error::domain(format!(
                "gap ({}, {}) must lie inside [0, 1] and leave positive mass",
                center - halfwidth,
                center + halfwidth
            )));
        }
        Ok(Distribution::Gap { center, halfwidth })
    }

    pub fn outliers(mass: f64, upper: f64) -> Result<Self> {
        check_weight("outlier mass", mass)?;
        if !(upper > 0.0 && upper <= 1.0) {
            return Err(Error::domain(format!(
                "outlier range upper end {upper} is not in (0, 1]"
            )));
        }
        Ok(Distribution::Outliers { mass, upper })
    }

    /// Canonical name; parses back to the same distribution.
    pub fn name(&self) -> String {
        self.to_string()
    }

    pub fn family(&self) -> &'static str {
        match self {
            Distribution::Uniform => "uniform",
            Distribution::Beta { .. } => "beta",
            Distribution::PhiLaplace => "phi-laplace",
            Distribution::DiscreteUniform99 => "discrete-uniform-99",
            Distribution::Bump { .. } => "bump",
            Distribution::Gap { .. } => "gap",
            Distribution::Outliers { .. } => "outliers",
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Distribution::Beta { a, b } => vec![("a", a), ("b", b)],
            Distribution::Bump { center, width, mass } => {
                vec![("center", center), ("width", width), ("mass", mass)]
            }
            Distribution::Gap { center, halfwidth } => vec![("center", center), ("halfwidth", halfwidth)],
            Distribution::Outliers { mass, upper } => vec![("mass", mass), ("upper", upper)],
            _ => Vec::new(),
        }
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, Distribution::DiscreteUniform99)
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        match *self {
            Distribution::Uniform => x,
            Distribution::Beta { a, b } => {
                beta_cdf(x, BetaParams::new(a, b).expect("validated shapes")).expect("x in (0, 1)")
            }
            Distribution::PhiLaplace => {
                let y = ppnd16(x);
                if y < 0.0 {
                    0.5 * y.exp()
                } else {
                    1.0 - 0.5 * (-y).exp()
                }
            }
            Distribution::DiscreteUniform99 => discrete_count(x, false) as f64 / 99.0,
            Distribution::Bump { center, width, mass } => {
                let lo = center - 0.5 * width;
                (1.0 - mass) * x + mass * ((x - lo) / width).clamp(0.0, 1.0)
            }
            Distribution::Gap { center, halfwidth } => {
                let lo = center - halfwidth;
                let hi = center + halfwidth;
                let scale = 1.0 - 2.0 * halfwidth;
                if x <= lo {
                    x / scale
                } else if x < hi {
                    lo / scale
                } else {
                    (x - 2.0 * halfwidth) / scale
                }
            }
            Distribution::Outliers { mass, upper } => (1.0 - mass) * x + mass * (x / upper).min(1.0),
        }
    }

    /// `P(X < x)`; equal to [`cdf`](Self::cdf) for continuous laws.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match self {
            Distribution::DiscreteUniform99 if x > 0.0 && x < 1.0 => discrete_count(x, true) as f64 / 99.0,
            Distribution::DiscreteUniform99 if x >= 1.0 => 1.0,
            _ => self.cdf(x),
        }
    }

    /// Log density on [0, 1]; `None` for the discrete law. May be `+inf` at
    /// an unbounded edge and `-inf` outside the support.
    pub fn log_density(&self, x: f64) -> Option<f64> {
        if !(0.0..=1.0).contains(&x) {
            return if self.is_continuous() {
                Some(f64::NEG_INFINITY)
            } else {
                None
            };
        }
        let v = match *self {
            Distribution::Uniform => 0.0,
            Distribution::Beta { a, b } => {
                let lx = if a == 1.0 { 0.0 } else { (a - 1.0) * x.ln() };
                let ly = if b == 1.0 { 0.0 } else { (b - 1.0) * (-x).ln_1p() };
                lx + ly - ln_beta(a, b)
            }
            Distribution::PhiLaplace => {
                let y = ppnd16(x.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0));
                if x == 0.0 || x == 1.0 {
                    f64::INFINITY
                } else {
                    -LN_2 - y.abs() + 0.5 * y * y + LN_SQRT_2PI
                }
            }
            Distribution::DiscreteUniform99 => return None,
            Distribution::Bump { center, width, mass } => {
                let inside = (x - center).abs() <= 0.5 * width;
                (1.0 - mass + if inside { mass / width } else { 0.0 }).ln()
            }
            Distribution::Gap { center, halfwidth } => {
                if (x - center).abs() < halfwidth {
                    f64::NEG_INFINITY
                } else {
                    -(1.0 - 2.0 * halfwidth).ln()
                }
            }
            Distribution::Outliers { mass, upper } => (1.0 - mass + if x <= upper { mass / upper } else { 0.0 }).ln(),
        };
        Some(v)
    }

    /// Draw `n` values. Every value lies in [0, 1].
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        match *self {
            Distribution::Uniform => out.extend((0..n).map(|_| rng.random::<f64>())),
            Distribution::Beta { a, b } => {
                let law = BetaDist::new(a, b).expect("validated shapes");
                out.extend((0..n).map(|_| law.sample(rng)));
            }
            Distribution::PhiLaplace => out.extend((0..n).map(|_| {
                // Inverse-CDF draw of a standard Laplace variate.
                let u: f64 = rng.random::<f64>() - 0.5;
                let y = -u.signum() * (-2.0 * u.abs()).ln_1p();
                normal_cdf(y)
            })),
            Distribution::DiscreteUniform99 => out.extend((0..n).map(|_| rng.random_range(1..=99u32) as f64 / 100.0)),
            Distribution::Bump { center, width, mass } => out.extend((0..n).map(|_| {
                if rng.random::<f64>() < mass {
                    center - 0.5 * width + width * rng.random::<f64>()
                } else {
                    rng.random()
                }
            })),
            Distribution::Gap { center, halfwidth } => out.extend((0..n).map(|_| {
                let u = (1.0 - 2.0 * halfwidth) * rng.random::<f64>();
                if u < center - halfwidth {
                    u
                } else {
                    u + 2.0 * halfwidth
                }
            })),
            Distribution::Outliers { mass, upper } => out.extend((0..n).map(|_| {
                if rng.random::<f64>() < mass {
                    upper * rng.random::<f64>()
                } else {
                    rng.random()
                }
            })),
        }
        for v in &mut out {
            *v = v.clamp(0.0, 1.0);
        }
        out
    }
}

fn check_weight(what: &str, w: f64) -> Result<()> {
    if (0.0..=1.0).contains(&w) {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} {w} is not in [0, 1]")))
    }
}

/// Number of support points `k/100` with `k/100 <= x` (or `< x`), using the
/// same floating-point values the sampler emits.
fn discrete_count(x: f64, strict: bool) -> u32 {
    let below = |k: u32| {
        let v = k as f64 / 100.0;
        if strict {
            v < x
        } else {
            v <= x
        }
    };
    let mut k = ((100.0 * x).floor() as i64).clamp(0, 99) as u32;
    while k < 99 && below(k + 1) {
        k += 1;
    }
    while k > 0 && !below(k) {
        k -= 1;
    }
    k
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.params();
        if params.is_empty() {
            return f.write_str(self.family());
        }
        let args: Vec<String> = params.iter().map(|(_, v)| v.to_string()).collect();
        write!(f, "{}({})", self.family(), args.join(","))
    }
}

impl FromStr for Distribution {
    type Err = Error;

    /// Accepts `uniform`, `beta(a,b)`, `phi-laplace`, `discrete-uniform-99`,
    /// `bump(center,width,mass)`, `gap(center,halfwidth)` and
    /// `outliers(mass,upper)`.
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownDistribution(s.to_string());
        let s = s.trim();
        let (family, args) = match s.find('(') {
            Some(open) => {
                let inner = s[open + 1..].strip_suffix(')').ok_or_else(unknown)?;
                let args = inner
                    .split(',')
                    .map(|a| a.trim().parse::<f64>().map_err(|_| unknown()))
                    .collect::<Result<Vec<_>>>()?;
                (s[..open].trim(), args)
            }
            None => (s, Vec::new()),
        };
        match (family.to_ascii_lowercase().as_str(), args.as_slice()) {
            ("uniform", []) => Ok(Distribution::Uniform),
            ("phi-laplace", []) => Ok(Distribution::PhiLaplace),
            ("discrete-uniform-99", []) => Ok(Distribution::DiscreteUniform99),
            ("beta", &[a, b]) => Distribution::beta(a, b),
            ("bump", &[c, w, m]) => Distribution::bump(c, w, m),
            ("gap", &[c, h]) => Distribution::gap(c, h),
            ("outliers", &[m, u]) => Distribution::outliers(m, u),
            _ => Err(unknown()),
        }
    }
}

/// Look up a zoo member by name (see [`Distribution::from_str`]).
pub fn zoo_lookup(name: &str) -> Result<Distribution> {
    name.parse()
}

/// The randomized families used in scenario studies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    SymmetricHeavyTailed,
    SymmetricLightTailed,
    AsymmetricHeavyTailed,
    AsymmetricLightTailed,
    Outliers,
    NearlyUniform,
    RandomBump,
    RandomGap,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::SymmetricHeavyTailed,
        Scenario::SymmetricLightTailed,
        Scenario::AsymmetricHeavyTailed,
        Scenario::AsymmetricLightTailed,
        Scenario::Outliers,
        Scenario::NearlyUniform,
        Scenario::RandomBump,
        Scenario::RandomGap,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::SymmetricHeavyTailed => "symmetric-heavy-tailed",
            Scenario::SymmetricLightTailed => "symmetric-light-tailed",
            Scenario::AsymmetricHeavyTailed => "asymmetric-heavy-tailed",
            Scenario::AsymmetricLightTailed => "asymmetric-light-tailed",
            Scenario::Outliers => "outliers",
            Scenario::NearlyUniform => "nearly-uniform",
            Scenario::RandomBump => "random-bump",
            Scenario::RandomGap => "random-gap",
        }
    }

    /// Names of the latent draws recorded in [`ScenarioDraw::latent`].
    pub fn latent_names(&self) -> &'static [&'static str] {
        match self {
            Scenario::Outliers => &["pi", "b"],
            Scenario::RandomBump => &["m", "pi"],
            Scenario::RandomGap => &["m", "w"],
            _ => &["mu", "sigma"],
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == key)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// Rejection loops give up after this many proposals.
pub const REJECTION_CAP: usize = 1_000_000;

/// Full width of the random-bump component.
pub const BUMP_WIDTH: f64 = 0.002;

/// One randomly drawn distribution with the draws that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioDraw {
    pub scenario: Scenario,
    pub index: u64,
    pub distribution: Distribution,
    /// Values in the order of [`Scenario::latent_names`].
    pub latent: Vec<f64>,
    /// Proposals used by the rejection loop (1 when there is none).
    pub attempts: usize,
}

/// Seeded source of scenario distributions. Draw `k` always comes from the
/// stream `(seed, SCENARIO, tag(name), k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScenarioSampler {
    pub scenario: Scenario,
    pub seed: u64,
}

impl ScenarioSampler {
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        Self { scenario, seed }
    }

    pub fn draw(&self, index: u64) -> Result<ScenarioDraw> {
        let mut stream = rng::stream(self.seed, domain::SCENARIO, rng::tag(self.scenario.name()), index);
        let (distribution, latent, attempts) = draw_with(self.scenario, &mut stream)?;
        Ok(ScenarioDraw {
            scenario: self.scenario,
            index,
            distribution,
            latent,
            attempts,
        })
    }
}

/// Draw one distribution for `scenario` from `rng`.
pub fn draw_scenario_distribution(scenario: Scenario, rng: &mut StreamRng) -> Result<Distribution> {
    draw_with(scenario, rng).map(|(d, _, _)| d)
}

fn draw_with(scenario: Scenario, rng: &mut StreamRng) -> Result<(Distribution, Vec<f64>, usize)> {
    use Scenario::*;
    let uniform = |rng: &mut StreamRng, lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
    match scenario {
        SymmetricHeavyTailed | SymmetricLightTailed | AsymmetricHeavyTailed | AsymmetricLightTailed | NearlyUniform => {
            let (mu_law, sigma_shape, sigma_scale) = match scenario {
                SymmetricHeavyTailed => (None, 3.0, 0.5),
                SymmetricLightTailed => (None, 5.0, 0.5),
                AsymmetricHeavyTailed => (Some((2.0, 2.0)), 3.0, 0.5),
                AsymmetricLightTailed => (Some((2.0, 2.0)), 5.0, 0.5),
                _ => (Some((50.0, 50.0)), 100.0, 1.0 / 50.0),
            };
            let mu_law = mu_law.map(|(a, b)| BetaDist::new(a, b).expect("fixed shapes"));
            let sigma_law = Gamma::new(sigma_shape, sigma_scale).expect("fixed shape and scale");
            for attempt in 1..=REJECTION_CAP {
                let mu: f64 = mu_law.as_ref().map_or(0.5, |law| law.sample(rng));
                let sigma = sigma_law.sample(rng);
                let (a, b) = (mu * sigma, (1.0 - mu) * sigma);
                let accept = match scenario {
                    SymmetricHeavyTailed | AsymmetricHeavyTailed => a.min(b) <= 1.0,
                    SymmetricLightTailed | AsymmetricLightTailed => a.min(b) > 1.0,
                    _ => true,
                };
                // Shapes that underflow to zero cannot define a law.
                if accept && a > 0.0 && b > 0.0 {
                    return Ok((Distribution::beta(a, b)?, vec![mu, sigma], attempt));
                }
            }
            Err(Error::RejectionCap {
                scenario: scenario.name().into(),
                cap: REJECTION_CAP,
            })
        }
        Outliers => {
            for attempt in 1..=REJECTION_CAP {
                let pi = uniform(rng, 0.0, 0.1);
                let b = uniform(rng, 0.0, 0.01);
                if b > 0.0 {
                    return Ok((Distribution::outliers(pi, b)?, vec![pi, b], attempt));
                }
            }
            Err(Error::RejectionCap {
                scenario: scenario.name().into(),
                cap: REJECTION_CAP,
            })
        }
        RandomBump => {
            let m = uniform(rng, 0.001, 0.999);
            let pi = uniform(rng, 0.0, 0.1);
            // Keep the bump inside [0, 1] even when m rounds to an edge.
            let m = m.clamp(0.5 * BUMP_WIDTH, 1.0 - 0.5 * BUMP_WIDTH);
            Ok((Distribution::bump(m, BUMP_WIDTH, pi)?, vec![m, pi], 1))
        }
        RandomGap => {
            let m = uniform(rng, 0.1, 0.9);
            let w = uniform(rng, 0.025, 0.1);
            Ok((Distribution::gap(m, w)?, vec![m, w], 1))
        }
    }
}

/// Integral of the density over [0, 1], for tests. Each piece between
/// discontinuities is mapped through `x = lo + (hi - lo) Phi(y)`, which
/// flattens edge singularities, and summed with the midpoint rule in `y`.
#[cfg(test)]
pub(crate) fn integrate_density(d: &Distribution, lo: f64, hi: f64, cells: usize) -> f64 {
    let mut breaks = vec![lo, hi];
    match *d {
        Distribution::Bump { center, width, .. } => breaks.extend([center - 0.5 * width, center + 0.5 * width]),
        Distribution::Gap { center, halfwidth } => breaks.extend([center - halfwidth, center + halfwidth]),
        Distribution::Outliers { upper, .. } => breaks.push(upper),
        _ => {}
    }
    breaks.retain(|&b| (lo..=hi).contains(&b));
    breaks.sort_by(f64::total_cmp);
    let span = 38.0;
    let dy = 2.0 * span / cells as f64;
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        for k in 0..cells {
            let y = -span + (k as f64 + 0.5) * dy;
            let x = if y < 0.0 {
                lo + (hi - lo) * normal_cdf(y)
            } else {
                hi - (hi - lo) * normal_cdf(-y)
            };
            // Points that round onto an edge carry negligible weight.
            if x <= lo || x >= hi {
                continue;
            }
            total += d.log_density(x).unwrap().exp() * (hi - lo) * normal_pdf(y) * dy;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ks_against_cdf(d: &Distribution, draws: usize, seed: u64) -> f64 {
        let mut xs = d.sample(draws, &mut rng::stream(seed, domain::DATA, 0, 0));
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = d.cdf(x);
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max)
    }

    fn continuous_zoo() -> Vec<Distribution> {
        vec![
            Distribution::Uniform,
            Distribution::beta(1.2, 0.8).unwrap(),
            Distribution::beta(0.6, 0.6).unwrap(),
            Distribution::beta(1.6, 1.6).unwrap(),
            Distribution::PhiLaplace,
            Distribution::bump(0.5, 0.002, 0.08).unwrap(),
            Distribution::bump(0.3, 0.2, 0.5).unwrap(),
            Distribution::gap(0.5, 0.05).unwrap(),
            Distribution::gap(0.2, 0.1).unwrap(),
            Distribution::outliers(0.05, 0.005).unwrap(),
        ]
    }

    #[test]
    fn normal_reference_values() {
        // Reference values from an independent high-precision evaluation.
        assert!((normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-14);
        assert!((normal_quantile(1e-10).unwrap() + 6.361_340_902_404_056).abs() < 1e-12);
        assert!((normal_quantile(0.3).unwrap() + 0.524_400_512_708_040_8).abs() < 1e-15);
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        assert_eq!(normal_quantile(0.0).unwrap(), f64::NEG_INFINITY);
        assert!(normal_quantile(1.5).is_err());
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(-8.0) - 6.220_960_574_271_785e-16).abs() < 1e-28);
    }

    #[test]
    fn normal_round_trip() {
        for k in 1..1000 {
            let p = k as f64 / 1000.0;
            let back = normal_cdf(normal_quantile(p).unwrap());
            assert!((back - p).abs() <= 1e-15, "p={p} back={back}");
        }
        for e in 2..300 {
            let p = 10f64.powi(-e);
            let back = normal_cdf(normal_quantile(p).unwrap());
            assert!(((back - p) / p).abs() <= 1e-12, "p={p} back={back}");
        }
    }

    #[test]
    fn names_round_trip() {
        for d in continuous_zoo().into_iter().chain([Distribution::DiscreteUniform99]) {
            assert_eq!(d.name().parse::<Distribution>().unwrap(), d);
        }
        assert_eq!(
            zoo_lookup(" Beta( 2 , 1 )").unwrap(),
            Distribution::Beta { a: 2.0, b: 1.0 }
        );
        assert!(matches!(zoo_lookup("cauchy"), Err(Error::UnknownDistribution(_))));
        assert!(zoo_lookup("beta(1)").is_err());
        assert!(zoo_lookup("beta(-1,1)").is_err());
        assert!(zoo_lookup("bump(0.0005,0.002,0.1)").is_err());
        for sc in Scenario::ALL {
            assert_eq!(sc.name().parse::<Scenario>().unwrap(), sc);
        }
        assert!("heavy".parse::<Scenario>().is_err());
    }

    #[test]
    fn hand_examples() {
        let pl = Distribution::PhiLaplace.log_density(0.5).unwrap().exp();
        assert!((pl - (2.0 * std::f64::consts::PI).sqrt() / 2.0).abs() < 1e-14);
        let out = Distribution::outliers(0.05, 0.005).unwrap();
        assert!((out.log_density(0.001).unwrap().exp() - 10.95).abs() < 1e-12);
        // Gap weights: P(X <= m - w) = (m - w) / (1 - 2w).
        let gap = Distribution::gap(0.5, 0.1).unwrap();
        assert!((gap.cdf(0.4) - 0.5).abs() < 1e-15);
        assert!((gap.cdf(0.55) - 0.5).abs() < 1e-15);
        assert_eq!(gap.log_density(0.5).unwrap(), f64::NEG_INFINITY);
        assert_eq!(Distribution::Uniform.cdf(0.37), 0.37);
    }

    #[test]
    fn densities_integrate_to_one() {
        for d in continuous_zoo() {
            let total = if d == Distribution::PhiLaplace {
                // About 1e-4 of the mass lies closer to 1 than any double
                // below 1, so integrate the lower half and rely on the
                // symmetry checked below.
                2.0 * integrate_density(&d, 0.0, 0.5, 20_000)
            } else {
                integrate_density(&d, 0.0, 1.0, 20_000)
            };
            assert!((total - 1.0).abs() < 1e-6, "{d}: {total}");
        }
    }

    #[test]
    fn phi_laplace_is_symmetric() {
        let d = Distribution::PhiLaplace;
        for k in 1..100 {
            let x = k as f64 / 100.0;
            let (lo, hi) = (d.log_density(x).unwrap(), d.log_density(1.0 - x).unwrap());
            assert!((lo - hi).abs() < 1e-12, "x={x}");
            assert!((d.cdf(x) + d.cdf(1.0 - x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn samplers_match_cdfs() {
        for (k, d) in continuous_zoo().into_iter().enumerate() {
            let ks = ks_against_cdf(&d, 100_000, k as u64);
            assert!(ks < 0.01, "{d}: KS = {ks}");
        }
    }

    #[test]
    fn discrete_uniform_support_and_cdf() {
        let d = Distribution::DiscreteUniform99;
        let xs = d.sample(99_000, &mut rng::stream(5, domain::DATA, 0, 0));
        let mut counts = [0usize; 100];
        for &x in &xs {
            let k = (x * 100.0).round() as usize;
            assert_eq!(k as f64 / 100.0, x);
            assert!((1..=99).contains(&k));
            counts[k] += 1;
        }
        assert!(counts[1..].iter().all(|&c| (800..1200).contains(&c)));
        for k in 1..=99u32 {
            let x = k as f64 / 100.0;
            assert_eq!(d.cdf(x), k as f64 / 99.0);
            assert_eq!(d.cdf_left(x), (k - 1) as f64 / 99.0);
        }
        assert_eq!(d.cdf(0.005), 0.0);
        assert_eq!(d.cdf(0.995), 1.0);
        assert!(d.log_density(0.5).is_none());
    }

    #[test]
    fn gamma_is_shape_scale() {
        let law = Gamma::new(3.0, 0.5).unwrap();
        let mut stream = rng::stream(11, domain::DATA, 0, 0);
        let draws = 1_000_000;
        let mean: f64 = (0..draws).map(|_| law.sample(&mut stream)).sum::<f64>() / draws as f64;
        assert!((mean - 1.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn scenario_draws_respect_their_conditions() {
        for sc in Scenario::ALL {
            let sampler = ScenarioSampler::new(sc, 3);
            for k in 0..300 {
                let draw = sampler.draw(k).unwrap();
                assert_eq!(draw, sampler.draw(k).unwrap());
                assert_eq!(draw.latent.len(), sc.latent_names().len());
                match (sc, draw.distribution) {
                    (Scenario::SymmetricHeavyTailed | Scenario::AsymmetricHeavyTailed, Distribution::Beta { a, b }) => {
                        assert!(a.min(b) <= 1.0)
                    }
                    (Scenario::SymmetricLightTailed | Scenario::AsymmetricLightTailed, Distribution::Beta { a, b }) => {
                        assert!(a.min(b) > 1.0)
                    }
                    (Scenario::NearlyUniform, Distribution::Beta { a, b }) => {
                        assert!((a - 1.0).abs() < 0.6 && (b - 1.0).abs() < 0.6)
                    }
                    (Scenario::Outliers, Distribution::Outliers { mass, upper }) => {
                        assert!(mass < 0.1 && upper > 0.0 && upper < 0.01)
                    }
                    (Scenario::RandomBump, Distribution::Bump { center, width, mass }) => {
                        assert!(center > 0.0009 && center < 0.9991 && width == BUMP_WIDTH && mass < 0.1)
                    }
                    (Scenario::RandomGap, Distribution::Gap { center, halfwidth }) => {
                        assert!((0.1..0.9).contains(&center) && (0.025..0.1).contains(&halfwidth))
                    }
                    (sc, d) => panic!("{sc} produced {d}"),
                }
                if matches!(sc, Scenario::SymmetricHeavyTailed | Scenario::SymmetricLightTailed) {
                    assert_eq!(draw.latent[0], 0.5);
                }
            }
        }
    }

    #[test]
    fn tiny_beta_shapes_stay_in_range() {
        let d = Distribution::beta(0.004, 0.006).unwrap();
        let xs = d.sample(20_000, &mut rng::stream(1, domain::DATA, 0, 0));
        assert!(xs.iter().all(|x| (0.0..=1.0).contains(x)));
    }
}
