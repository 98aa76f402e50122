//! Randomized Rosenblatt transform: maps a vector with a known joint law to
//! i.i.d. Uniform(0, 1) values, including discrete components.

use crate::distributions::Distribution;
use crate::error::{Error, Result};

/// Conditional law of component `k` given the earlier components.
pub trait ConditionalLaw {
    /// `P(Y_k <= y | prefix)`.
    fn cdf(&self, y: f64, prefix: &[f64]) -> f64;
    /// `P(Y_k < y | prefix)`.
    fn cdf_left(&self, y: f64, prefix: &[f64]) -> f64;
}

/// Zoo members act as laws that ignore the prefix.
impl ConditionalLaw for Distribution {
    fn cdf(&self, y: f64, _prefix: &[f64]) -> f64 {
        Distribution::cdf(self, y)
    }

    fn cdf_left(&self, y: f64, _prefix: &[f64]) -> f64 {
        Distribution::cdf_left(self, y)
    }
}

/// A law built from closures.
pub struct LawFn<F, G> {
    cdf: F,
    cdf_left: G,
}

impl<F, G> LawFn<F, G>
where
    F: Fn(f64, &[f64]) -> f64,
    G: Fn(f64, &[f64]) -> f64,
{
    pub fn new(cdf: F, cdf_left: G) -> Self {
        Self { cdf, cdf_left }
    }
}

impl<F> LawFn<F, F>
where
    F: Fn(f64, &[f64]) -> f64 + Clone,
{
    /// A law without atoms: the left limit equals the CDF.
    pub fn continuous(cdf: F) -> Self {
        Self {
            cdf_left: cdf.clone(),
            cdf,
        }
    }
}

impl<F, G> ConditionalLaw for LawFn<F, G>
where
    F: Fn(f64, &[f64]) -> f64,
    G: Fn(f64, &[f64]) -> f64,
{
    fn cdf(&self, y: f64, prefix: &[f64]) -> f64 {
        (self.cdf)(y, prefix)
    }

    fn cdf_left(&self, y: f64, prefix: &[f64]) -> f64 {
        (self.cdf_left)(y, prefix)
    }
}

/// `x_k = u_k F_k(y_k | y_{<k}) + (1 - u_k) F_k^-(y_k | y_{<k})`.
///
/// `u` supplies the external randomness; for laws without atoms it has no
/// effect. Law values outside [0, 1], or a left limit above the CDF, are
/// reported as contract violations.
pub fn rosenblatt_transform(y: &[f64], laws: &[&dyn ConditionalLaw], u: &[f64]) -> Result<Vec<f64>> {
    if laws.len() != y.len() || u.len() != y.len() {
        return Err(Error::domain(format!(
            "lengths differ: {} values, {} laws, {} uniforms",
            y.len(),
            laws.len(),
            u.len()
        )));
    }
    y.iter()
        .zip(laws)
        .zip(u)
        .enumerate()
        .map(|(k, ((&yk, law), &uk))| {
            if !(uk > 0.0 && uk < 1.0) {
                return Err(Error::domain(format!("u[{k}] = {uk} is not in (0, 1)")));
            }
            let prefix = &y[..k];
            let hi = law.cdf(yk, prefix);
            let lo = law.cdf_left(yk, prefix);
            if !(0.0..=1.0).contains(&hi) || !(0.0..=1.0).contains(&lo) {
                return Err(Error::Contract(format!(
                    "law {k} returned F = {hi}, F- = {lo} at y = {yk}"
                )));
            }
            if lo > hi {
                return Err(Error::Contract(format!(
                    "law {k} has F- = {lo} above F = {hi} at y = {yk}"
                )));
            }
            if lo == hi {
                return Ok(hi);
            }
            Ok(uk * hi + (1.0 - uk) * lo)
        })
        .collect()
}

/// Transform i.i.d. data that share one law.
pub fn iid_transform(y: &[f64], law: &dyn ConditionalLaw, u: &[f64]) -> Result<Vec<f64>> {
    let laws = vec![law; y.len()];
    rosenblatt_transform(y, &laws, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{self, domain};
    use rand::distr::Open01;
    use rand::Rng;

    fn ks(mut x: Vec<f64>) -> f64 {
        x.sort_by(f64::total_cmp);
        let n = x.len() as f64;
        x.iter()
            .enumerate()
            .map(|(i, &v)| ((i + 1) as f64 / n - v).max(v - i as f64 / n))
            .fold(0.0, f64::max)
    }

    #[test]
    fn point_mass_returns_u() {
        let point = LawFn::new(
            |y: f64, _: &[f64]| if y >= 0.0 { 1.0 } else { 0.0 },
            |y: f64, _: &[f64]| if y > 0.0 { 1.0 } else { 0.0 },
        );
        let out = rosenblatt_transform(&[0.0], &[&point], &[0.3]).unwrap();
        assert_eq!(out, vec![0.3]);
    }

    #[test]
    fn continuous_law_ignores_u() {
        let wide = LawFn::continuous(|y: f64, _: &[f64]| (y / 2.0).clamp(0.0, 1.0));
        for u in [0.1, 0.5, 0.9] {
            assert_eq!(rosenblatt_transform(&[0.5], &[&wide], &[u]).unwrap(), vec![0.25]);
        }
        let beta = Distribution::beta(2.0, 3.0).unwrap();
        let ys = [0.1, 0.4, 0.8];
        let a = iid_transform(&ys, &beta, &[0.2, 0.2, 0.2]).unwrap();
        let b = iid_transform(&ys, &beta, &[0.7, 0.9, 0.1]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[1], beta.cdf(0.4));
    }

    #[test]
    fn contract_violations() {
        let bad = LawFn::continuous(|_: f64, _: &[f64]| 1.5);
        assert!(matches!(
            rosenblatt_transform(&[0.5], &[&bad], &[0.5]),
            Err(Error::Contract(_))
        ));
        let inverted = LawFn::new(|_: f64, _: &[f64]| 0.2, |_: f64, _: &[f64]| 0.4);
        assert!(matches!(
            rosenblatt_transform(&[0.5], &[&inverted], &[0.5]),
            Err(Error::Contract(_))
        ));
        let ok = Distribution::Uniform;
        assert!(rosenblatt_transform(&[0.5, 0.1], &[&ok], &[0.5, 0.5]).is_err());
        assert!(rosenblatt_transform(&[0.5], &[&ok], &[1.0]).is_err());
    }

    #[test]
    fn outputs_are_uniform() {
        // Component 0: Beta(2, 5). Component 1: Uniform(0, y_0), which depends
        // on the prefix. Component 2: discrete uniform on {0.01, ..., 0.99}.
        let beta = Distribution::beta(2.0, 5.0).unwrap();
        let dependent = LawFn::continuous(|y: f64, prefix: &[f64]| (y / prefix[0]).clamp(0.0, 1.0));
        let discrete = Distribution::DiscreteUniform99;
        let laws: [&dyn ConditionalLaw; 3] = [&beta, &dependent, &discrete];

        let reps = 10_000;
        let mut columns = vec![Vec::new(); 3];
        let mut stream = rng::stream(17, domain::PIT, 0, 0);
        for _ in 0..reps {
            let y0 = beta.sample(1, &mut stream)[0];
            let y1 = y0 * stream.random::<f64>();
            let y2 = discrete.sample(1, &mut stream)[0];
            let u: Vec<f64> = (0..3).map(|_| stream.sample(Open01)).collect();
            let out = rosenblatt_transform(&[y0, y1, y2], &laws, &u).unwrap();
            for (c, v) in columns.iter_mut().zip(out) {
                c.push(v);
            }
        }
        // Asymptotic KS critical value at level 0.001.
        let critical = (-0.5 * (0.001f64 / 2.0).ln()).sqrt() / (reps as f64).sqrt();
        for (k, c) in columns.into_iter().enumerate() {
            let d = ks(c);
            assert!(d < critical, "component {k}: KS {d} >= {critical}");
        }
    }

    #[test]
    fn monotone_in_y() {
        let discrete = Distribution::DiscreteUniform99;
        let beta = Distribution::beta(0.5, 2.0).unwrap();
        for law in [&discrete as &dyn ConditionalLaw, &beta] {
            let mut last = 0.0;
            for k in 0..=2000 {
                let y = k as f64 / 2000.0;
                let v = rosenblatt_transform(&[y], &[law], &[0.37]).unwrap()[0];
                assert!(v >= last, "y={y}");
                last = v;
            }
        }
    }
}
