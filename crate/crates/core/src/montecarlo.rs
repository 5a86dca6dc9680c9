//! Seeded Monte Carlo estimation of the sampled side of the comparisons,
//! plus the stochastic checks with explicit constants.
//!
//! Each draw of the family gives the vector (|X_i|); its sequence norm W
//! is exactly the maximal-sum statistic for coordinate summands X_i e_i,
//! and the capped disjunctification is the unit restriction of Y. Batches
//! run on disjoint rng streams and aggregate in batch order, so parallel
//! and serial runs agree bit-exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, RngStream};
use crate::error::{Error, Result};
use crate::norms::{RiNormSpec, SeqNormSpec};
use crate::rearrange::{empirical_quantile, Disjunctification};

/// Monte Carlo run shape. Identical configs give identical results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples_per_batch: usize,
    pub batches: usize,
    pub seed: u64,
}

impl McConfig {
    pub fn new(samples_per_batch: usize, batches: usize, seed: u64) -> Self {
        McConfig { samples_per_batch, batches, seed }
    }

    pub fn total_samples(&self) -> usize {
        self.samples_per_batch * self.batches
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples_per_batch < 1 {
            return Err(Error::InvalidParameter("samples_per_batch must be >= 1".into()));
        }
        if self.batches < 2 {
            return Err(Error::InvalidParameter("batches must be >= 2".into()));
        }
        Ok(())
    }
}

/// A Monte Carlo value with its across-batch standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub batches: usize,
}

impl Estimate {
    fn from_batch_values(vals: &[f64]) -> Estimate {
        let b = vals.len();
        let mean = vals.iter().sum::<f64>() / b as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (b as f64 - 1.0);
        Estimate {
            value: mean,
            stderr: (var / b as f64).sqrt(),
            batches: b,
        }
    }
}

/// Estimate of the M-norm of the N-norm of (|X_i|) for every (N, M) pair
/// in the grid, reusing one set of draws: per batch, each realization is
/// sorted once and fed to every sequence norm; the batch's empirical
/// quantile of W then goes through every RI norm.
pub fn estimate_lhs_grid(
    dists: &[Distribution],
    seqs: &[SeqNormSpec],
    ris: &[RiNormSpec],
    cfg: &McConfig,
) -> Result<Vec<Vec<Estimate>>> {
    estimate_lhs_grid_offset(dists, seqs, ris, cfg, 0)
}

pub(crate) fn estimate_lhs_grid_offset(
    dists: &[Distribution],
    seqs: &[SeqNormSpec],
    ris: &[RiNormSpec],
    cfg: &McConfig,
    stream_base: u64,
) -> Result<Vec<Vec<Estimate>>> {
    cfg.validate()?;
    if dists.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let n = dists.len();
    let per_batch: Result<Vec<Vec<Vec<f64>>>> = (0..cfg.batches)
        .into_par_iter()
        .map(|b| {
            let mut stream = RngStream::new(cfg.seed, stream_base + b as u64);
            let mut buf = vec![0.0f64; n];
            let mut ws: Vec<Vec<f64>> =
                vec![Vec::with_capacity(cfg.samples_per_batch); seqs.len()];
            for _ in 0..cfg.samples_per_batch {
                for (i, d) in dists.iter().enumerate() {
                    buf[i] = d.draw(&mut stream);
                }
                buf.sort_by(|a, b| b.total_cmp(a));
                for (k, nsp) in seqs.iter().enumerate() {
                    ws[k].push(nsp.eval_sorted_desc(&buf));
                }
            }
            let mut vals = vec![vec![0.0f64; ris.len()]; seqs.len()];
            for (k, w) in ws.iter().enumerate() {
                let eq = empirical_quantile(w)?;
                for (r, m) in ris.iter().enumerate() {
                    vals[k][r] = m.eval(&eq)?;
                }
            }
            Ok(vals)
        })
        .collect();
    let per_batch = per_batch?;
    let mut out = Vec::with_capacity(seqs.len());
    for k in 0..seqs.len() {
        let mut row = Vec::with_capacity(ris.len());
        for r in 0..ris.len() {
            let vals: Vec<f64> = per_batch.iter().map(|b| b[k][r]).collect();
            row.push(Estimate::from_batch_values(&vals));
        }
        out.push(row);
    }
    Ok(out)
}

/// Single-pair convenience wrapper around the grid estimator.
pub fn estimate_lhs(
    dists: &[Distribution],
    seq: &SeqNormSpec,
    ri: &RiNormSpec,
    cfg: &McConfig,
) -> Result<Estimate> {
    let grid = estimate_lhs_grid(dists, std::slice::from_ref(seq), std::slice::from_ref(ri), cfg)?;
    Ok(grid[0][0])
}

/// Deterministic disjoint-sum side: M-norm of Y on the unit interval plus
/// N-norm of (Y(1), ..., Y(n)).
pub fn rhs_eval_with(d: &Disjunctification, seq: &SeqNormSpec, ri: &RiNormSpec) -> Result<f64> {
    let head = ri.eval(d.restrict_unit())?;
    let tail = seq.eval(d.at_integers());
    Ok(head + tail)
}

pub fn rhs_eval(dists: &[Distribution], seq: &SeqNormSpec, ri: &RiNormSpec) -> Result<f64> {
    let d = Disjunctification::new(dists.to_vec())?;
    rhs_eval_with(&d, seq, ri)
}

/// One grid point of the max-distribution sandwich.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichRow {
    pub t: f64,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub rows: Vec<SandwichRow>,
    pub pass: bool,
}

/// Analytic check of 1/2 min(1, sum p_i) <= 1 - prod(1 - p_i) <= min(1, sum p_i)
/// with p_i = S_i(t), on the given grid. No sampling involved.
pub fn max_sandwich_check(dists: &[Distribution], t_grid: &[f64]) -> Result<SandwichReport> {
    if dists.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("empty t grid".into()));
    }
    let mut rows = Vec::with_capacity(t_grid.len());
    let mut all = true;
    for &t in t_grid {
        let ps: Vec<f64> = dists.iter().map(|d| d.survival(t)).collect();
        let sum: f64 = ps.iter().sum();
        // 1 - prod(1 - p_i) through log1p/expm1 so near-zero and
        // near-one probabilities stay exact.
        let log_prod: f64 = ps.iter().map(|&p| (-p).ln_1p()).sum();
        let value = -log_prod.exp_m1();
        let upper = sum.min(1.0);
        let lower = 0.5 * upper;
        let pass = lower <= value + 1e-12 && value <= upper + 1e-12;
        all &= pass;
        rows.push(SandwichRow { t, lower, value, upper, pass });
    }
    Ok(SandwichReport { rows, pass: all })
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectorReport {
    pub m: usize,
    pub lhs: Estimate,
    pub rhs: f64,
    pub ratio: f64,
}

/// Monte Carlo E max_i |I_i X_i| with independent Bernoulli(1/m)
/// selectors, against (1/m)(\int_0^1 Y + top-m sum of Y(i)).
pub fn selector_experiment(
    dists: &[Distribution],
    m: usize,
    cfg: &McConfig,
) -> Result<SelectorReport> {
    cfg.validate()?;
    if dists.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if m < 1 {
        return Err(Error::InvalidParameter("selector m must be >= 1".into()));
    }
    let n = dists.len();
    let keep_prob = 1.0 / m as f64;
    let batch_means: Vec<f64> = (0..cfg.batches)
        .into_par_iter()
        .map(|b| {
            let mut stream = RngStream::new(cfg.seed, b as u64);
            let mut xs = vec![0.0f64; n];
            let mut acc = 0.0;
            for _ in 0..cfg.samples_per_batch {
                for (i, d) in dists.iter().enumerate() {
                    xs[i] = d.draw(&mut stream);
                }
                let mut w = 0.0f64;
                for &x in xs.iter() {
                    let keep = stream.uniform_open() < keep_prob;
                    if keep && x > w {
                        w = x;
                    }
                }
                acc += w;
            }
            acc / cfg.samples_per_batch as f64
        })
        .collect();
    let lhs = Estimate::from_batch_values(&batch_means);
    let d = Disjunctification::new(dists.to_vec())?;
    let rhs = (d.integral(0.0, 1.0)?
        + SeqNormSpec::top_m(m).eval(d.at_integers()))
        * keep_prob;
    Ok(SelectorReport { m, lhs, rhs, ratio: lhs.value / rhs })
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub p: f64,
    pub moment: f64,
    pub moment_stderr: f64,
    pub tail_quantile: f64,
    pub v_norm: f64,
    pub ratio: f64,
}

/// Spot check of the moment split: ||W||_p against the empirical quantile
/// of W at level e^{-p}/4 plus the L_p norm of the capped
/// disjunctification.
pub fn max_sum_moment_check(
    dists: &[Distribution],
    seq: &SeqNormSpec,
    p: f64,
    cfg: &McConfig,
) -> Result<MomentReport> {
    cfg.validate()?;
    if dists.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if p < 1.0 {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    let alpha = 0.25 * (-p).exp();
    let total = cfg.total_samples();
    let need = (10.0 / alpha).ceil() as usize;
    if total < need {
        return Err(Error::InsufficientTail { need, got: total });
    }
    let ws = collect_w_batches(dists, seq, cfg)?;
    let batch_moments: Vec<f64> = ws
        .iter()
        .map(|w| {
            (w.iter().map(|&v| v.powf(p)).sum::<f64>() / w.len() as f64).powf(1.0 / p)
        })
        .collect();
    let mut pooled: Vec<f64> = ws.iter().flatten().copied().collect();
    let moment =
        (pooled.iter().map(|&v| v.powf(p)).sum::<f64>() / total as f64).powf(1.0 / p);
    pooled.sort_by(|a, b| b.total_cmp(a));
    let k = ((alpha * total as f64).ceil() as usize).max(1);
    let tail_quantile = pooled[k - 1];
    let d = Disjunctification::new(dists.to_vec())?;
    let v_norm = RiNormSpec::lp(p).eval(d.restrict_unit())?;
    let est = Estimate::from_batch_values(&batch_moments);
    Ok(MomentReport {
        p,
        moment,
        moment_stderr: est.stderr,
        tail_quantile,
        v_norm,
        ratio: moment / (tail_quantile + v_norm),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub threshold: f64,
    pub exceedance: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Empirical P(W > 200 ||Y||_P) against the 1/(4e) tail constant, with a
/// 3-sigma binomial allowance.
pub fn tail_bound_check(
    dists: &[Distribution],
    seq: &SeqNormSpec,
    ri: &RiNormSpec,
    cfg: &McConfig,
) -> Result<TailReport> {
    cfg.validate()?;
    if dists.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let total = cfg.total_samples();
    if total < 10_000 {
        return Err(Error::InsufficientTail { need: 10_000, got: total });
    }
    let d = Disjunctification::new(dists.to_vec())?;
    let p_norm = rhs_eval_with(&d, seq, ri)?;
    let threshold = 200.0 * p_norm;
    let ws = collect_w_batches(dists, seq, cfg)?;
    let count: usize = ws
        .iter()
        .flatten()
        .filter(|&&w| w > threshold)
        .count();
    let phat = count as f64 / total as f64;
    let stderr = (phat * (1.0 - phat) / total as f64).sqrt();
    let bound = 0.25 / std::f64::consts::E;
    Ok(TailReport {
        threshold,
        exceedance: phat,
        stderr,
        bound,
        pass: phat <= bound + 3.0 * stderr,
    })
}

// Per-batch W vectors for one sequence norm, batch-ordered.
fn collect_w_batches(
    dists: &[Distribution],
    seq: &SeqNormSpec,
    cfg: &McConfig,
) -> Result<Vec<Vec<f64>>> {
    let n = dists.len();
    let out: Vec<Vec<f64>> = (0..cfg.batches)
        .into_par_iter()
        .map(|b| {
            let mut stream = RngStream::new(cfg.seed, b as u64);
            let mut buf = vec![0.0f64; n];
            let mut w = Vec::with_capacity(cfg.samples_per_batch);
            for _ in 0..cfg.samples_per_batch {
                for (i, d) in dists.iter().enumerate() {
                    buf[i] = d.draw(&mut stream);
                }
                buf.sort_by(|a, b| b.total_cmp(a));
                w.push(seq.eval_sorted_desc(&buf));
            }
            w
        })
        .collect();
    Ok(out)
}
