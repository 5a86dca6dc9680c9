//! Analytic distribution models for the magnitude |X| of a random variable:
//! exact survival functions, exact (or polished) quantile functions, and
//! seeded inverse-transform samplers.
//!
//! Everything downstream consumes magnitudes only, so the models describe
//! |X| directly and signed values are never materialized.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special;

/// A seeded random stream. Parallel workers take disjoint streams derived
/// from (seed, stream index); one draw consumes exactly one position.
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { rng }
    }

    /// Uniform draw in the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        use rand::Rng;
        self.rng.sample(rand::distr::Open01)
    }
}

/// Distribution of |X| for one member of the family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    /// |N(0, sigma^2)|
    Gaussian { sigma: f64 },
    /// Exp(rate)
    Exponential { rate: f64 },
    /// U(0, b)
    Uniform { b: f64 },
    /// value v with probability p, else 0
    TwoPoint { v: f64, p: f64 },
    /// a * |base|
    Scaled { a: f64, base: Box<Distribution> },
}

impl Distribution {
    pub fn gaussian(sigma: f64) -> Self {
        Distribution::Gaussian { sigma }
    }

    pub fn exponential(rate: f64) -> Self {
        Distribution::Exponential { rate }
    }

    pub fn uniform(b: f64) -> Self {
        Distribution::Uniform { b }
    }

    pub fn two_point(v: f64, p: f64) -> Self {
        Distribution::TwoPoint { v, p }
    }

    pub fn scaled(a: f64, base: Distribution) -> Self {
        Distribution::Scaled { a, base: Box::new(base) }
    }

    /// Parameter sanity for values arriving from config files.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            Distribution::Gaussian { sigma } => {
                if !(*sigma > 0.0) {
                    return bad(format!("gaussian sigma must be > 0, got {sigma}"));
                }
            }
            Distribution::Exponential { rate } => {
                if !(*rate > 0.0) {
                    return bad(format!("exponential rate must be > 0, got {rate}"));
                }
            }
            Distribution::Uniform { b } => {
                if !(*b > 0.0) {
                    return bad(format!("uniform b must be > 0, got {b}"));
                }
            }
            Distribution::TwoPoint { v, p } => {
                if !(*v >= 0.0) {
                    return bad(format!("two_point v must be >= 0, got {v}"));
                }
                if !(*p > 0.0 && *p <= 1.0) {
                    return bad(format!("two_point p must be in (0,1], got {p}"));
                }
            }
            Distribution::Scaled { a, base } => {
                if !(*a >= 0.0) {
                    return bad(format!("scale must be >= 0, got {a}"));
                }
                base.validate()?;
            }
        }
        Ok(())
    }

    /// P(|X| > t) for t >= 0, in closed form.
    pub fn survival(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0, "survival needs t >= 0");
        match self {
            Distribution::Gaussian { sigma } => special::erfc(t / (sigma * std::f64::consts::SQRT_2)),
            Distribution::Exponential { rate } => (-rate * t).exp(),
            Distribution::Uniform { b } => {
                if t >= *b {
                    0.0
                } else {
                    1.0 - t / b
                }
            }
            Distribution::TwoPoint { v, p } => {
                if t < *v {
                    *p
                } else {
                    0.0
                }
            }
            Distribution::Scaled { a, base } => {
                if *a == 0.0 {
                    0.0
                } else {
                    base.survival(t / a)
                }
            }
        }
    }

    /// Q(u) = inf{t >= 0 : S(t) <= u} for u in (0,1).
    pub fn quantile(&self, u: f64) -> f64 {
        debug_assert!(u > 0.0 && u < 1.0, "quantile needs u in (0,1)");
        match self {
            Distribution::Gaussian { sigma } => {
                // S(t) = 2(1 - Phi(t/sigma)), so t = -sigma * Phi^{-1}(u/2)
                // (the lower-tail form keeps precision for tiny u), then
                // Newton steps on S close the round trip.
                let mut t = -sigma * special::normal_quantile(0.5 * u);
                if t < 0.0 {
                    t = 0.0;
                }
                for _ in 0..2 {
                    let z = t / sigma;
                    if z * z > 1400.0 {
                        break;
                    }
                    let s = self.survival(t);
                    let slope = 2.0 * special::normal_pdf(z) / sigma;
                    if slope <= 0.0 {
                        break;
                    }
                    t += (s - u) / slope;
                    if t < 0.0 {
                        t = 0.0;
                    }
                }
                t
            }
            Distribution::Exponential { rate } => -u.ln() / rate,
            Distribution::Uniform { b } => b * (1.0 - u),
            Distribution::TwoPoint { v, p } => {
                if u < *p {
                    *v
                } else {
                    0.0
                }
            }
            Distribution::Scaled { a, base } => a * base.quantile(u),
        }
    }

    /// E(|X| - c)^+ for c >= 0, in closed form.
    pub fn mean_excess(&self, c: f64) -> f64 {
        debug_assert!(c >= 0.0);
        match self {
            Distribution::Gaussian { sigma } => {
                let z = c / sigma;
                sigma * (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * z * z).exp()
                    - c * special::erfc(z / std::f64::consts::SQRT_2)
            }
            Distribution::Exponential { rate } => (-rate * c).exp() / rate,
            Distribution::Uniform { b } => {
                if c >= *b {
                    0.0
                } else {
                    (b - c) * (b - c) / (2.0 * b)
                }
            }
            Distribution::TwoPoint { v, p } => p * (v - c).max(0.0),
            Distribution::Scaled { a, base } => {
                if *a == 0.0 {
                    0.0
                } else {
                    a * base.mean_excess(c / a)
                }
            }
        }
    }

    /// E|X|.
    pub fn mean_abs(&self) -> f64 {
        self.mean_excess(0.0)
    }

    /// Essential supremum of |X|, when finite.
    pub fn support_upper(&self) -> Option<f64> {
        match self {
            Distribution::Gaussian { .. } | Distribution::Exponential { .. } => None,
            Distribution::Uniform { b } => Some(*b),
            Distribution::TwoPoint { v, .. } => Some(*v),
            Distribution::Scaled { a, base } => {
                if *a == 0.0 {
                    Some(0.0)
                } else {
                    base.support_upper().map(|s| a * s)
                }
            }
        }
    }

    /// One inverse-transform draw.
    pub fn draw(&self, stream: &mut RngStream) -> f64 {
        self.quantile(stream.uniform_open())
    }

    /// `count` i.i.d. inverse-transform draws. Identical (seed, stream)
    /// gives identical output.
    pub fn sample(&self, stream: &mut RngStream, count: usize) -> Vec<f64> {
        assert!(count >= 1, "sample needs count >= 1");
        (0..count).map(|_| self.draw(stream)).collect()
    }

    /// Compact label for CSV/report columns.
    pub fn label(&self) -> String {
        match self {
            Distribution::Gaussian { sigma } => format!("gaussian({sigma})"),
            Distribution::Exponential { rate } => format!("exponential({rate})"),
            Distribution::Uniform { b } => format!("uniform(0..{b})"),
            Distribution::TwoPoint { v, p } => format!("two_point({v};{p})"),
            Distribution::Scaled { a, base } => format!("{a}*{}", base.label()),
        }
    }
}

/// Label for a whole family, collapsing i.i.d. repeats.
pub fn family_label(dists: &[Distribution]) -> String {
    if dists.is_empty() {
        return "empty".into();
    }
    if dists.iter().all(|d| d == &dists[0]) {
        format!("{}x{}", dists[0].label(), dists.len())
    } else {
        format!("mixed[{}]", dists.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Test-side oracle: normal CDF by Marsaglia's series, independent of
    // the Cody implementation used by `survival`.
    fn oracle_normal_cdf(x: f64) -> f64 {
        let mut s = x;
        let mut t = 0.0;
        let mut b = x;
        let x2 = x * x;
        let mut i = 1.0;
        while s != t {
            t = s;
            i += 2.0;
            b *= x2 / i;
            s += b;
        }
        0.5 + s * (-0.5 * x2).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    fn oracle_gaussian_quantile_bisect(u: f64) -> f64 {
        // bisection on 2(1 - Phi(t)) = u with the series CDF
        let (mut lo, mut hi) = (0.0, 1.0);
        while 2.0 * (1.0 - oracle_normal_cdf(hi)) > u {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 2.0 * (1.0 - oracle_normal_cdf(mid)) <= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn survival_examples() {
        assert_eq!(Distribution::gaussian(1.0).survival(0.0), 1.0);
        let e = Distribution::exponential(1.0).survival(1.0);
        assert!((e - (-1.0f64).exp()).abs() < 1e-15);
        let s = Distribution::scaled(2.0, Distribution::uniform(1.0)).survival(1.0);
        assert!((s - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quantile_examples() {
        let q = Distribution::uniform(1.0).quantile(0.25);
        assert!((q - 0.75).abs() < 1e-15);

        // Frozen from the bisection oracle below.
        let g = Distribution::gaussian(1.0).quantile(0.5);
        let oracle = oracle_gaussian_quantile_bisect(0.5);
        assert!((g - oracle).abs() < 1e-10, "got {g}, oracle {oracle}");
        assert!((g - 0.6744897501960817).abs() < 1e-9);

        let tp = Distribution::two_point(3.0, 0.2);
        assert_eq!(tp.quantile(0.1), 3.0);
        assert_eq!(tp.quantile(0.3), 0.0);
    }

    #[test]
    fn quantile_round_trip_continuous() {
        let kinds = [
            Distribution::gaussian(1.0),
            Distribution::gaussian(0.5),
            Distribution::exponential(2.0),
            Distribution::uniform(3.0),
            Distribution::scaled(0.7, Distribution::gaussian(2.0)),
        ];
        for d in &kinds {
            for i in 1..1000 {
                let u = i as f64 / 1000.0;
                let t = d.quantile(u);
                assert!(
                    (d.survival(t) - u).abs() <= 1e-12,
                    "{}: |S(Q({u})) - {u}| = {:e}",
                    d.label(),
                    (d.survival(t) - u).abs()
                );
            }
        }
    }

    #[test]
    fn galois_connection_all_kinds() {
        let kinds = [
            Distribution::gaussian(1.0),
            Distribution::exponential(1.0),
            Distribution::uniform(2.0),
            Distribution::two_point(1.5, 0.4),
            Distribution::scaled(0.3, Distribution::two_point(1.0, 0.9)),
        ];
        for d in &kinds {
            for i in 1..1000 {
                let u = i as f64 / 1000.0;
                let q = d.quantile(u);
                assert!(
                    d.survival(q) <= u + 1e-12,
                    "{}: S(Q({u})) = {} > {u}",
                    d.label(),
                    d.survival(q)
                );
            }
            let hi = d.support_upper().unwrap_or(10.0);
            for i in 1..1000 {
                let t = hi * i as f64 / 1000.0;
                let s = d.survival(t);
                if s > 0.0 && s < 1.0 {
                    assert!(
                        d.quantile(s) <= t + 1e-9,
                        "{}: Q(S({t})) = {} > {t}",
                        d.label(),
                        d.quantile(s)
                    );
                }
            }
        }
    }

    #[test]
    fn scaling_identity_exact() {
        let base = Distribution::exponential(1.3);
        let d = Distribution::scaled(0.7, base.clone());
        for i in 0..100 {
            let t = i as f64 * 0.05;
            assert_eq!(d.survival(t), base.survival(t / 0.7));
        }
    }

    #[test]
    fn sampling_deterministic_and_degenerate() {
        let d = Distribution::two_point(1.0, 1.0);
        let mut s = RngStream::new(7, 0);
        assert_eq!(d.sample(&mut s, 4), vec![1.0, 1.0, 1.0, 1.0]);

        let z = Distribution::scaled(0.0, Distribution::gaussian(1.0));
        let mut s = RngStream::new(7, 0);
        assert_eq!(z.sample(&mut s, 3), vec![0.0, 0.0, 0.0]);

        let g = Distribution::gaussian(1.0);
        let a = g.sample(&mut RngStream::new(42, 3), 16);
        let b = g.sample(&mut RngStream::new(42, 3), 16);
        assert_eq!(a, b);
        let c = g.sample(&mut RngStream::new(42, 4), 16);
        assert_ne!(a, c);
    }

    #[test]
    fn sample_mean_clt() {
        let d = Distribution::uniform(1.0);
        let mut s = RngStream::new(2024, 0);
        let xs = d.sample(&mut s, 100_000);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let tol = 3.0 / (12.0f64 * 1e5).sqrt();
        assert!((mean - 0.5).abs() < tol, "mean {mean}, tol {tol}");
    }

    #[test]
    fn kolmogorov_smirnov_continuous_kinds() {
        let kinds = [
            Distribution::gaussian(1.0),
            Distribution::exponential(1.0),
            Distribution::uniform(1.0),
            Distribution::scaled(2.0, Distribution::gaussian(0.5)),
        ];
        for (k, d) in kinds.iter().enumerate() {
            let mut s = RngStream::new(555, k as u64);
            let mut xs = d.sample(&mut s, 100_000);
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = xs.len() as f64;
            let mut ks: f64 = 0.0;
            for (i, &x) in xs.iter().enumerate() {
                let cdf = 1.0 - d.survival(x);
                let lo = i as f64 / n;
                let hi = (i + 1) as f64 / n;
                ks = ks.max((cdf - lo).abs()).max((cdf - hi).abs());
            }
            assert!(ks < 0.01, "{}: KS = {ks}", d.label());
        }
    }

    #[test]
    fn config_literals_round_trip() {
        let j = r#"{"kind":"scaled","a":0.7,"base":{"kind":"gaussian","sigma":1.0}}"#;
        let d: Distribution = serde_json::from_str(j).unwrap();
        assert_eq!(d, Distribution::scaled(0.7, Distribution::gaussian(1.0)));
        let kinds = [
            r#"{"kind":"gaussian","sigma":1.0}"#,
            r#"{"kind":"exponential","rate":1.0}"#,
            r#"{"kind":"uniform","b":1.0}"#,
            r#"{"kind":"two_point","v":1.0,"p":0.5}"#,
        ];
        for k in kinds {
            let d: Distribution = serde_json::from_str(k).unwrap();
            d.validate().unwrap();
            let back = serde_json::to_string(&d).unwrap();
            let d2: Distribution = serde_json::from_str(&back).unwrap();
            assert_eq!(d, d2);
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Distribution::gaussian(0.0).validate().is_err());
        assert!(Distribution::two_point(1.0, 0.0).validate().is_err());
        assert!(Distribution::two_point(1.0, 1.5).validate().is_err());
        assert!(Distribution::scaled(-1.0, Distribution::uniform(1.0)).validate().is_err());
    }

    #[test]
    fn mean_excess_matches_quadrature() {
        // E(|X|-c)^+ = \int_c^inf S, checked by trapezoid sum.
        let kinds = [
            Distribution::gaussian(1.0),
            Distribution::exponential(0.7),
            Distribution::uniform(2.0),
            Distribution::two_point(1.5, 0.3),
        ];
        for d in &kinds {
            for &c in &[0.0, 0.5, 1.3] {
                let hi = d.support_upper().unwrap_or(c + 40.0);
                let steps = 200_000;
                let h = (hi - c).max(0.0) / steps as f64;
                let mut acc = 0.0;
                if h > 0.0 {
                    for i in 0..steps {
                        let t0 = c + i as f64 * h;
                        acc += 0.5 * (d.survival(t0) + d.survival(t0 + h)) * h;
                    }
                }
                // trapezoid error is O(h) across a survival jump
                assert!(
                    (acc - d.mean_excess(c)).abs() < 5e-6,
                    "{} at c={c}: {} vs {}",
                    d.label(),
                    acc,
                    d.mean_excess(c)
                );
            }
        }
    }
}
