//! Shared oracles and generators for the integration suites. These stay
//! independent of the library's own numeric paths: the normal CDF is a
//! Taylor series, inverses are plain bisections against it.
#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rinorm::rearrange::{Piece, QuantileFunction};

/// Standard normal CDF via Marsaglia's series (|x| <= 8, ~1e-15).
pub fn oracle_normal_cdf(x: f64) -> f64 {
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

/// Solve Phi(x) = p by bisection on the series CDF.
pub fn oracle_normal_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (-9.0, 9.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if oracle_normal_cdf(mid) >= p {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random non-increasing step function on [0, n].
pub fn random_step_function(rng: &mut ChaCha8Rng, max_n: usize) -> QuantileFunction {
    let n = rng.random_range(1..=max_n);
    let k = rng.random_range(1..=12usize);
    let mut breaks: Vec<f64> = (0..k)
        .map(|_| rng.random_range(0.0..n as f64))
        .collect();
    breaks.push(n as f64);
    breaks.push(0.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b) < 1e-9);
    if *breaks.last().unwrap() < n as f64 {
        breaks.push(n as f64);
    }
    let pieces_len = breaks.len() - 1;
    let mut values: Vec<f64> = (0..pieces_len)
        .map(|_| (rng.random_range(-2.0..2.0f64)).exp())
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let pieces: Vec<Piece> = values.into_iter().map(Piece::Const).collect();
    QuantileFunction::new(breaks, pieces).expect("generated step function is valid")
}

/// Random vector of non-negative magnitudes.
pub fn random_vector(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<f64> {
    let len = rng.random_range(1..=max_len);
    (0..len).map(|_| rng.random_range(0.0..3.0)).collect()
}
