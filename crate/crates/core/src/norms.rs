//! Rearrangement-invariant function norms on [0,1], symmetric sequence
//! norms, and the combined head-plus-integer-samples functional carried by
//! the disjoint-sum side of the comparisons.
//!
//! All norms are normalized: constant 1 on [0,1] and the first unit vector
//! both have norm exactly 1.

use std::fmt;

use crate::error::{Error, Result};
use crate::orlicz::{luxemburg_function, luxemburg_gauge, OrliczFunction};
use crate::quad::{adaptive_simpson, DIVERGENCE_CAP};
use crate::rearrange::{Piece, QuantileFunction};

/// Rearrangement-invariant norm on [0,1].
#[derive(Debug, Clone)]
pub struct RiNormSpec {
    pub variant: RiVariant,
    /// Metadata: an exponent q with L_q embedding into this space, when
    /// one is recorded. Not used in evaluation.
    pub embed_exponent: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum RiVariant {
    Lp { p: f64 },
    /// L_{p,q} with the constant (q/p)^{1/q} fixed by the normalization
    /// of the constant function.
    Lorentz { p: f64, q: f64 },
    Orlicz { phi: OrliczFunction },
}

impl RiNormSpec {
    pub fn lp(p: f64) -> Self {
        assert!(p >= 1.0, "Lp needs p >= 1");
        RiNormSpec { variant: RiVariant::Lp { p }, embed_exponent: Some(p) }
    }

    pub fn lorentz(p: f64, q: f64) -> Self {
        assert!(p >= 1.0 && q >= 1.0, "Lorentz needs p, q >= 1");
        RiNormSpec { variant: RiVariant::Lorentz { p, q }, embed_exponent: Some(p) }
    }

    pub fn orlicz(phi: OrliczFunction) -> Self {
        RiNormSpec { variant: RiVariant::Orlicz { phi }, embed_exponent: None }
    }

    pub fn with_embed_exponent(mut self, q: f64) -> Self {
        self.embed_exponent = Some(q);
        self
    }

    /// Norm of a non-increasing function on [0,1].
    pub fn eval(&self, f: &QuantileFunction) -> Result<f64> {
        if let Some(t) = f.monotone_violation() {
            return Err(Error::NotNonIncreasing(t));
        }
        let l = f.domain_length();
        if (l - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "rearrangement-invariant norms live on [0,1]; domain is [0,{l}]"
            )));
        }
        Ok(match &self.variant {
            RiVariant::Lp { p } => lp_norm(f, *p),
            RiVariant::Lorentz { p, q } => lorentz_norm(f, *p, *q),
            RiVariant::Orlicz { phi } => luxemburg_function(phi, f),
        })
    }
}

impl fmt::Display for RiNormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.variant {
            RiVariant::Lp { p } => write!(f, "lp({p})"),
            RiVariant::Lorentz { p, q } => write!(f, "lorentz({p};{q})"),
            RiVariant::Orlicz { phi } => write!(f, "orlicz({})", phi.label()),
        }
    }
}

fn powp(v: f64, p: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else if p == 1.0 {
        v
    } else if p == 2.0 {
        v * v
    } else {
        v.powf(p)
    }
}

fn lp_norm(f: &QuantileFunction, p: f64) -> f64 {
    let breaks = f.breakpoints();
    let mut acc = 0.0;
    for (i, piece) in f.pieces().iter().enumerate() {
        let w = breaks[i + 1] - breaks[i];
        acc += match piece {
            Piece::Const(v) => w * powp(*v, p),
            Piece::Affine { left, right } => {
                let (l, r) = (*left, *right);
                if (l - r).abs() <= 1e-14 * l.abs().max(1.0) {
                    w * powp(0.5 * (l + r), p)
                } else {
                    // exact: \int over the piece of the affine value^p
                    w * (powp(l, p + 1.0) - powp(r, p + 1.0)) / ((p + 1.0) * (l - r))
                }
            }
        };
        if acc > DIVERGENCE_CAP {
            return f64::INFINITY;
        }
    }
    acc.powf(1.0 / p)
}

fn lorentz_norm(f: &QuantileFunction, p: f64, q: f64) -> f64 {
    let w = q / p;
    let breaks = f.breakpoints();
    let mut acc = 0.0;
    for (i, piece) in f.pieces().iter().enumerate() {
        let (a, b) = (breaks[i], breaks[i + 1]);
        acc += match piece {
            Piece::Const(v) => powp(*v, q) * (b.powf(w) - a.powf(w)),
            Piece::Affine { left, right } => {
                let (l, r) = (*left, *right);
                if (l - r).abs() <= 1e-14 * l.abs().max(1.0) {
                    powp(0.5 * (l + r), q) * (b.powf(w) - a.powf(w))
                } else {
                    // substitute s = t^{q/p}: \int value(t)^q d(t^{q/p}),
                    // which removes the endpoint singularity at a = 0
                    let (sa, sb) = (a.powf(w), b.powf(w));
                    adaptive_simpson(
                        &|s: f64| {
                            let t = s.powf(1.0 / w);
                            let frac = ((t - a) / (b - a)).clamp(0.0, 1.0);
                            powp(l + (r - l) * frac, q)
                        },
                        sa,
                        sb,
                        1e-9,
                        0.0,
                    )
                }
            }
        };
        if acc > DIVERGENCE_CAP {
            return f64::INFINITY;
        }
    }
    acc.powf(1.0 / q)
}

/// Symmetric sequence norm: the value depends only on the multiset of
/// magnitudes.
#[derive(Debug, Clone)]
pub enum SeqNormSpec {
    Lp { p: f64 },
    Linf,
    TopM { m: usize },
    OrliczSeq { psi: OrliczFunction },
}

impl SeqNormSpec {
    pub fn lp(p: f64) -> Self {
        assert!(p >= 1.0, "lp needs p >= 1");
        SeqNormSpec::Lp { p }
    }

    pub fn linf() -> Self {
        SeqNormSpec::Linf
    }

    pub fn top_m(m: usize) -> Self {
        assert!(m >= 1, "top_m needs m >= 1");
        SeqNormSpec::TopM { m }
    }

    pub fn orlicz(psi: OrliczFunction) -> Self {
        SeqNormSpec::OrliczSeq { psi }
    }

    /// Norm of a finite vector (empty gives 0).
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut sorted: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        self.eval_sorted_desc(&sorted)
    }

    /// Same, for magnitudes already sorted descending (hot path).
    pub fn eval_sorted_desc(&self, sorted: &[f64]) -> f64 {
        if sorted.is_empty() {
            return 0.0;
        }
        match self {
            SeqNormSpec::Lp { p } => {
                let mut acc = 0.0;
                for &v in sorted {
                    if v == 0.0 {
                        break;
                    }
                    acc += powp(v, *p);
                }
                acc.powf(1.0 / p)
            }
            SeqNormSpec::Linf => sorted[0],
            SeqNormSpec::TopM { m } => sorted[..(*m).min(sorted.len())].iter().sum(),
            SeqNormSpec::OrliczSeq { psi } => {
                if sorted[0] == 0.0 {
                    return 0.0;
                }
                luxemburg_gauge(
                    |lambda| {
                        let mut acc = 0.0;
                        for &v in sorted {
                            if v == 0.0 {
                                break;
                            }
                            acc += psi.eval(v / lambda);
                            if acc > DIVERGENCE_CAP {
                                return f64::INFINITY;
                            }
                        }
                        acc
                    },
                    sorted[0],
                )
            }
        }
    }
}

impl fmt::Display for SeqNormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqNormSpec::Lp { p } => write!(f, "lp({p})"),
            SeqNormSpec::Linf => write!(f, "linf"),
            SeqNormSpec::TopM { m } => write!(f, "top_m({m})"),
            SeqNormSpec::OrliczSeq { psi } => write!(f, "orlicz({})", psi.label()),
        }
    }
}

/// The combined functional on non-increasing functions f on [0, L]:
/// RI norm of the restriction to [0,1] plus sequence norm of the integer
/// samples (f(1), ..., f(floor L)). The sequence length follows the
/// domain of the argument, so domain dilations change it accordingly.
#[derive(Debug, Clone)]
pub struct HeadTailNorm {
    pub ri: RiNormSpec,
    pub seq: SeqNormSpec,
}

impl HeadTailNorm {
    pub fn new(ri: RiNormSpec, seq: SeqNormSpec) -> Self {
        HeadTailNorm { ri, seq }
    }

    pub fn eval(&self, f: &QuantileFunction) -> Result<f64> {
        if let Some(t) = f.monotone_violation() {
            return Err(Error::NotNonIncreasing(t));
        }
        let head = self.ri.eval(&f.head_unit())?;
        let tail = self.seq.eval(&f.integer_samples());
        Ok(head + tail)
    }

    /// Norm variant with the integer samples replaced by the cell
    /// averages \int_{i-1}^i f; this dominates `eval` and is within a
    /// factor 2 of it.
    pub fn eval_cell_averaged(&self, f: &QuantileFunction) -> Result<f64> {
        if let Some(t) = f.monotone_violation() {
            return Err(Error::NotNonIncreasing(t));
        }
        let head = self.ri.eval(&f.head_unit())?;
        let n = (f.domain_length() + 1e-9).floor() as usize;
        let cells: Vec<f64> = (1..=n)
            .map(|i| f.integral_exact(i as f64 - 1.0, i as f64))
            .collect();
        Ok(head + self.seq.eval(&cells))
    }
}

/// Both routes of the Abel summation identity: (sum_i x*_i y*_i,
/// sum_m (y*_m - y*_{m+1}) * top-m-sum(x)), equal up to rounding.
pub fn abel_identity(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let mut xs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let mut ys: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    xs.sort_by(|a, b| b.total_cmp(a));
    ys.sort_by(|a, b| b.total_cmp(a));
    let dot: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
    let mut abel = 0.0;
    let mut prefix = 0.0;
    for m in 0..xs.len() {
        prefix += xs[m];
        let next = if m + 1 < ys.len() { ys[m + 1] } else { 0.0 };
        abel += (ys[m] - next) * prefix;
    }
    Ok((dot, abel))
}
