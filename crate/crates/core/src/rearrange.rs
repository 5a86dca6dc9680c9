//! Non-increasing rearrangements of samples and functions, and the
//! disjunctification Y of a family of distributions: the non-increasing
//! function on [0, n] with measure{Y > t} = sum_i P(|X_i| > t).

use std::sync::OnceLock;

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

/// One piece of a piecewise quantile function. `Affine` stores the values
/// at the two ends of its interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Const(f64),
    Affine { left: f64, right: f64 },
}

impl Piece {
    fn start(&self) -> f64 {
        match self {
            Piece::Const(v) => *v,
            Piece::Affine { left, .. } => *left,
        }
    }

    fn end(&self) -> f64 {
        match self {
            Piece::Const(v) => *v,
            Piece::Affine { right, .. } => *right,
        }
    }

    fn at(&self, frac: f64) -> f64 {
        match self {
            Piece::Const(v) => *v,
            Piece::Affine { left, right } => left + (right - left) * frac,
        }
    }
}

/// A non-negative piecewise constant/affine function on [0, L], evaluated
/// right-continuously. The main carrier for rearrangements: empirical
/// quantiles, Y restricted to the unit interval, random step functions.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileFunction {
    breaks: Vec<f64>,
    pieces: Vec<Piece>,
}

impl QuantileFunction {
    /// Validating constructor: breakpoints strictly increasing from 0,
    /// values finite and non-negative, non-increasing over the domain.
    pub fn new(breaks: Vec<f64>, pieces: Vec<Piece>) -> Result<Self> {
        let qf = Self::new_unchecked(breaks, pieces);
        qf.check_shape()?;
        if let Some(t) = qf.monotone_violation() {
            return Err(Error::NotNonIncreasing(t));
        }
        Ok(qf)
    }

    /// Skips validation. Norm evaluations re-check monotonicity and
    /// reject non-rearrangements, so this is safe to expose.
    pub fn new_unchecked(breaks: Vec<f64>, pieces: Vec<Piece>) -> Self {
        QuantileFunction { breaks, pieces }
    }

    /// Constant function on [0, length].
    pub fn constant(value: f64, length: f64) -> Self {
        QuantileFunction {
            breaks: vec![0.0, length],
            pieces: vec![Piece::Const(value)],
        }
    }

    /// Step function on [0,1] given values already sorted descending.
    fn step_on_unit(sorted_desc: Vec<f64>) -> Self {
        let s = sorted_desc.len();
        let mut breaks = Vec::with_capacity(s + 1);
        for i in 0..=s {
            breaks.push(i as f64 / s as f64);
        }
        let pieces = sorted_desc.into_iter().map(Piece::Const).collect();
        QuantileFunction { breaks, pieces }
    }

    fn check_shape(&self) -> Result<()> {
        if self.breaks.len() < 2 || self.pieces.len() + 1 != self.breaks.len() {
            return Err(Error::InvalidParameter(
                "breakpoints and pieces are inconsistent".into(),
            ));
        }
        if self.breaks[0] != 0.0 {
            return Err(Error::InvalidParameter("domain must start at 0".into()));
        }
        for w in self.breaks.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParameter(
                    "breakpoints must be strictly increasing".into(),
                ));
            }
        }
        for p in &self.pieces {
            for v in [p.start(), p.end()] {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidParameter(
                        "piece values must be finite and non-negative".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// First t near which the values increase, if any.
    pub fn monotone_violation(&self) -> Option<f64> {
        for (i, p) in self.pieces.iter().enumerate() {
            let scale = p.start().abs().max(1.0);
            if p.end() > p.start() + 1e-12 * scale {
                return Some(self.breaks[i]);
            }
            if i + 1 < self.pieces.len() {
                let next = self.pieces[i + 1].start();
                if next > p.end() + 1e-12 * p.end().abs().max(1.0) {
                    return Some(self.breaks[i + 1]);
                }
            }
        }
        None
    }

    pub fn domain_length(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Right-continuous evaluation; at the right endpoint the value is the
    /// limit from the left.
    pub fn eval(&self, t: f64) -> f64 {
        let l = self.domain_length();
        assert!(
            t >= 0.0 && t <= l * (1.0 + 1e-12) + 1e-12,
            "evaluation outside [0, {l}]: t = {t}"
        );
        if t >= l {
            return self.pieces.last().unwrap().end();
        }
        // piece i covers [breaks[i], breaks[i+1])
        let i = match self.breaks[1..].partition_point(|&b| b <= t) {
            k if k >= self.pieces.len() => self.pieces.len() - 1,
            k => k,
        };
        let (a, b) = (self.breaks[i], self.breaks[i + 1]);
        self.pieces[i].at((t - a) / (b - a))
    }

    pub fn max_value(&self) -> f64 {
        self.pieces
            .iter()
            .flat_map(|p| [p.start(), p.end()])
            .fold(0.0, f64::max)
    }

    /// Exact integral over [a, b] of the piecewise representation.
    pub fn integral_exact(&self, a: f64, b: f64) -> f64 {
        let l = self.domain_length();
        let a = a.max(0.0);
        let b = b.min(l);
        if b <= a {
            return 0.0;
        }
        let mut acc = 0.0;
        for (i, p) in self.pieces.iter().enumerate() {
            let (lo, hi) = (self.breaks[i], self.breaks[i + 1]);
            let (ca, cb) = (lo.max(a), hi.min(b));
            if cb <= ca {
                continue;
            }
            let w = hi - lo;
            let va = p.at((ca - lo) / w);
            let vb = p.at((cb - lo) / w);
            acc += 0.5 * (va + vb) * (cb - ca);
        }
        acc
    }

    /// Values at integer points 1, 2, ..., floor(L).
    pub fn integer_samples(&self) -> Vec<f64> {
        let n = (self.domain_length() + 1e-9).floor() as usize;
        (1..=n).map(|i| self.eval(i as f64)).collect()
    }

    /// Restriction to [0,1], extended by zero when the domain is shorter.
    pub fn head_unit(&self) -> QuantileFunction {
        let l = self.domain_length();
        if (l - 1.0).abs() <= 1e-12 {
            return self.clone();
        }
        let mut breaks = vec![0.0];
        let mut pieces = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let (lo, hi) = (self.breaks[i], self.breaks[i + 1]);
            if lo >= 1.0 {
                break;
            }
            let cb = hi.min(1.0);
            let w = hi - lo;
            let va = p.at(0.0);
            let vb = p.at((cb - lo) / w);
            pieces.push(match p {
                Piece::Const(v) => Piece::Const(*v),
                Piece::Affine { .. } => Piece::Affine { left: va, right: vb },
            });
            breaks.push(cb);
        }
        if *breaks.last().unwrap() < 1.0 {
            pieces.push(Piece::Const(0.0));
            breaks.push(1.0);
        }
        QuantileFunction { breaks, pieces }
    }

    /// g(t) = f(t/c) on [0, cL].
    pub fn dilate(&self, c: f64) -> Result<QuantileFunction> {
        if !(c > 0.0) {
            return Err(Error::BadDilation(c));
        }
        Ok(QuantileFunction {
            breaks: self.breaks.iter().map(|&b| b * c).collect(),
            pieces: self.pieces.clone(),
        })
    }

    /// Pointwise sum on a merged breakpoint mesh (domains must agree).
    pub fn add(&self, other: &QuantileFunction) -> Result<QuantileFunction> {
        let l = self.domain_length();
        if (l - other.domain_length()).abs() > 1e-12 * l.max(1.0) {
            return Err(Error::InvalidParameter(
                "cannot add functions with different domains".into(),
            ));
        }
        let mut merged: Vec<f64> = self
            .breaks
            .iter()
            .chain(other.breaks.iter())
            .copied()
            .collect();
        merged.sort_by(f64::total_cmp);
        merged.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * l.max(1.0));
        let mut pieces = Vec::with_capacity(merged.len() - 1);
        for w in merged.windows(2) {
            let (a, b) = (w[0], w[1]);
            let la = self.eval(a) + other.eval(a);
            let lb = self.eval_left(b) + other.eval_left(b);
            if (la - lb).abs() <= 1e-15 * la.abs().max(1.0) {
                pieces.push(Piece::Const(la));
            } else {
                pieces.push(Piece::Affine { left: la, right: lb });
            }
        }
        Ok(QuantileFunction { breaks: merged, pieces })
    }

    // value approached from the left at t (piece covering (t-eps, t))
    fn eval_left(&self, t: f64) -> f64 {
        let l = self.domain_length();
        if t >= l {
            return self.pieces.last().unwrap().end();
        }
        let i = match self.breaks[1..].partition_point(|&b| b < t) {
            k if k >= self.pieces.len() => self.pieces.len() - 1,
            k => k,
        };
        let (a, b) = (self.breaks[i], self.breaks[i + 1]);
        self.pieces[i].at((t - a) / (b - a))
    }

    /// CSV rows of (t, value) at the breakpoints, for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (i, p) in self.pieces.iter().enumerate() {
            out.push_str(&format!("{:.16e},{:.16e}\n", self.breaks[i], p.start()));
        }
        out.push_str(&format!(
            "{:.16e},{:.16e}\n",
            self.domain_length(),
            self.pieces.last().unwrap().end()
        ));
        out
    }
}

/// Empirical quantile of a sample: the step function on [0,1] holding the
/// i-th largest value on [(i-1)/s, i/s).
pub fn empirical_quantile(samples: &[f64]) -> Result<QuantileFunction> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParameter(
            "samples must be finite and non-negative".into(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(QuantileFunction::step_on_unit(sorted))
}

const BISECT_TOL: f64 = 1e-10;
const HEAD_T: f64 = 1e-10;
const GEO_POINTS: usize = 1024;
const UNI_POINTS: usize = 1024;

/// The disjunctification of a family: Y on [0, n] inverting the total
/// survival t -> sum_i S_i(t). Evaluation, the unit-interval restriction,
/// integer samples and integrals all come from here. Immutable and
/// shareable; the tabulations are cached.
pub struct Disjunctification {
    members: Vec<Distribution>,
    unit: OnceLock<QuantileFunction>,
    integers: OnceLock<Vec<f64>>,
}

impl Disjunctification {
    pub fn new(members: Vec<Distribution>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyFamily);
        }
        for d in &members {
            d.validate()?;
        }
        Ok(Disjunctification {
            members,
            unit: OnceLock::new(),
            integers: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[Distribution] {
        &self.members
    }

    /// Sigma(s) = sum_i P(|X_i| > s).
    pub fn total_survival(&self, s: f64) -> f64 {
        self.members.iter().map(|d| d.survival(s)).sum()
    }

    /// True when Y blows up at 0+ (some member has unbounded support).
    pub fn unbounded_at_zero(&self) -> bool {
        self.members.iter().any(|d| d.support_upper().is_none())
    }

    /// Y(t) = inf{s >= 0 : Sigma(s) <= t} by bisection, absolute
    /// tolerance 1e-10 on s.
    pub fn eval_y(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::UnboundedAtZero);
        }
        let n = self.n() as f64;
        if t > n * (1.0 + 1e-12) + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "Y is defined on (0, n]; got t = {t} with n = {n}"
            )));
        }
        Ok(self.invert_total(t, 1.0))
    }

    // Bisection with a starting upper-bracket hint; the hint is grown by
    // doubling until feasible, so any positive hint is safe.
    fn invert_total(&self, t: f64, hi_hint: f64) -> f64 {
        if self.total_survival(0.0) <= t {
            return 0.0;
        }
        let mut hi = hi_hint.max(1e-9);
        let mut guard = 0;
        while self.total_survival(hi) > t {
            hi *= 2.0;
            guard += 1;
            if guard > 2000 {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.0;
        while hi - lo > BISECT_TOL {
            let mid = 0.5 * (lo + hi);
            if self.total_survival(mid) <= t {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Y at 1, 2, ..., n.
    pub fn at_integers(&self) -> &[f64] {
        self.integers.get_or_init(|| {
            let mut out = Vec::with_capacity(self.n());
            let mut hint = 1.0;
            for i in 1..=self.n() {
                let y = self.invert_total(i as f64, hint);
                hint = y.max(1e-9);
                out.push(y);
            }
            out
        })
    }

    /// Y tabulated on (0, 1] as a piecewise function: geometric mesh on
    /// (0, 1/64] to resolve an infinite head, uniform on [1/64, 1].
    /// Atoms of the disjoint sum are located exactly via Sigma, so step
    /// families tabulate to exact step functions.
    pub fn restrict_unit(&self) -> &QuantileFunction {
        self.unit.get_or_init(|| self.build_unit())
    }

    fn build_unit(&self) -> QuantileFunction {
        let split = (1.0f64 / 64.0).min(1.0);
        let mut mesh = Vec::with_capacity(GEO_POINTS + UNI_POINTS);
        let ratio = (split / HEAD_T).powf(1.0 / (GEO_POINTS as f64 - 1.0));
        let mut t = HEAD_T;
        for _ in 0..GEO_POINTS - 1 {
            mesh.push(t);
            t *= ratio;
        }
        mesh.push(split);
        let h = (1.0 - split) / UNI_POINTS as f64;
        for k in 1..=UNI_POINTS {
            mesh.push(if k == UNI_POINTS { 1.0 } else { split + k as f64 * h });
        }

        let mut values = Vec::with_capacity(mesh.len());
        let mut hint = 1.0;
        for &t in &mesh {
            let y = self.invert_total(t, hint);
            hint = y.max(1e-9);
            values.push(y);
        }
        // Y is non-increasing; remove sub-tolerance bisection noise so the
        // tabulation satisfies the rearrangement invariant exactly.
        for k in 1..values.len() {
            if values[k] > values[k - 1] {
                values[k] = values[k - 1];
            }
        }

        let mut breaks = vec![0.0, mesh[0]];
        let mut pieces = vec![Piece::Const(values[0])];
        for k in 0..mesh.len() - 1 {
            self.refine_cell(
                mesh[k],
                values[k],
                mesh[k + 1],
                values[k + 1],
                0,
                &mut breaks,
                &mut pieces,
            );
        }
        QuantileFunction { breaks, pieces }
    }

    #[allow(clippy::too_many_arguments)]
    fn refine_cell(
        &self,
        tl: f64,
        yl: f64,
        tr: f64,
        yr: f64,
        depth: u32,
        breaks: &mut Vec<f64>,
        pieces: &mut Vec<Piece>,
    ) {
        let push = |breaks: &mut Vec<f64>, pieces: &mut Vec<Piece>, t: f64, p: Piece| {
            breaks.push(t);
            pieces.push(p);
        };
        let drop = yl - yr;
        let scale = yl.abs().max(1.0);
        if drop <= 1e-13 * scale || tr - tl <= 1e-14 {
            push(breaks, pieces, tr, Piece::Const(0.5 * (yl + yr)));
            return;
        }
        let tm = 0.5 * (tl + tr);
        let ym = self.invert_total(tm, yl.max(1e-9)).clamp(yr, yl);
        let secant = 0.5 * (yl + yr);
        // Midpoint deviation bounds the L1 error of the affine piece at
        // ~(2/3) dev * width; 1e-3 of the cell drop keeps the summed
        // tabulation error orders below the comparison tolerances while
        // leaving genuine jumps (dev ~ drop/2) to the split below.
        if (ym - secant).abs() <= 1e-3 * drop + 1e-12 * scale {
            push(breaks, pieces, tr, Piece::Affine { left: yl, right: yr });
            return;
        }
        // Single-jump hypothesis: a flat stretch of Sigma at level t* means
        // Y drops from yl to yr exactly at t* = Sigma(mid-value).
        let ts = self.total_survival(secant);
        if ts > tl && ts <= tr {
            let probe_tol = 1e-7 * drop + 1e-12 * scale;
            let yls = self.invert_total(0.5 * (tl + ts), yl.max(1e-9));
            let yrs = if ts < tr {
                self.invert_total(0.5 * (ts + tr), yl.max(1e-9))
            } else {
                yr
            };
            if (yls - yl).abs() <= probe_tol && (yrs - yr).abs() <= probe_tol {
                if ts > tl {
                    push(breaks, pieces, ts, Piece::Const(yl));
                }
                if ts < tr {
                    push(breaks, pieces, tr, Piece::Const(yr));
                }
                return;
            }
        }
        if depth >= 10 {
            push(breaks, pieces, tr, Piece::Affine { left: yl, right: yr });
            return;
        }
        self.refine_cell(tl, yl, tm, ym, depth + 1, breaks, pieces);
        self.refine_cell(tm, ym, tr, yr, depth + 1, breaks, pieces);
    }

    /// Integral of Y over [a, b] by adaptive quadrature (relative
    /// tolerance 1e-8); an infinite head at 0 is handled by switching to
    /// the survival side, where the head integral has closed form.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        let n = self.n() as f64;
        if !(a >= 0.0 && a < b && b <= n * (1.0 + 1e-12) + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "integral needs 0 <= a < b <= n, got [{a}, {b}] with n = {n}"
            )));
        }
        const HEAD_CUT: f64 = 1e-6;
        if self.unbounded_at_zero() && a < HEAD_CUT {
            let cut = HEAD_CUT.min(b);
            let mut head = self.cumulative(cut);
            if a > 0.0 {
                head -= self.cumulative(a);
            }
            let tail = if b > cut { self.quad_y(cut, b) } else { 0.0 };
            Ok(head + tail)
        } else {
            Ok(self.quad_y(a, b))
        }
    }

    // \int_0^x Y dt = x Y(x) + sum_i E(|X_i| - Y(x))^+, the layer-cake
    // identity evaluated with closed-form mean excesses.
    fn cumulative(&self, x: f64) -> f64 {
        let y = self.invert_total(x, 1.0);
        let tail: f64 = self.members.iter().map(|d| d.mean_excess(y)).sum();
        x * y + tail
    }

    fn quad_y(&self, a: f64, b: f64) -> f64 {
        adaptive_simpson(
            &|t: f64| self.invert_total(t.max(1e-12), 1.0),
            a,
            b,
            1e-8,
            0.0,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Distribution;

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

    #[test]
    fn empirical_quantile_examples() {
        let q = empirical_quantile(&[2.0, 1.0]).unwrap();
        assert_eq!(q.eval(0.0), 2.0);
        assert_eq!(q.eval(0.25), 2.0);
        assert_eq!(q.eval(0.5), 1.0);
        assert_eq!(q.eval(0.75), 1.0);

        let c = empirical_quantile(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(c.eval(0.1), 5.0);
        assert_eq!(c.eval(0.9), 5.0);

        let a = empirical_quantile(&[3.0, 1.0, 2.0]).unwrap();
        let b = empirical_quantile(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(a, b);

        assert!(matches!(empirical_quantile(&[]), Err(Error::EmptySample)));
    }

    #[test]
    fn disjunctify_two_uniforms_is_affine() {
        let d = Disjunctification::new(vec![
            Distribution::uniform(1.0),
            Distribution::uniform(1.0),
        ])
        .unwrap();
        for i in 1..=20 {
            let t = i as f64 * 0.1;
            let y = d.eval_y(t).unwrap();
            assert!((y - (1.0 - t / 2.0)).abs() < 1e-9, "Y({t}) = {y}");
        }
        assert!((d.eval_y(1.0).unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(d.eval_y(2.0).unwrap(), 0.0);
        assert!(d.eval_y(0.0).is_err());
    }

    #[test]
    fn disjunctify_single_member_is_quantile() {
        let g = Distribution::gaussian(1.0);
        let d = Disjunctification::new(vec![g.clone()]).unwrap();
        for i in 1..10 {
            let t = i as f64 * 0.1;
            let y = d.eval_y(t).unwrap();
            assert!((y - g.quantile(t)).abs() < 1e-9, "Y({t}) = {y}");
        }
    }

    #[test]
    fn disjunctify_four_gaussians_at_one() {
        // Oracle: solve 4 * 2(1 - Phi(s)) = 1, i.e. Phi(s) = 7/8, by
        // bisection on the series CDF.
        let (mut lo, mut hi) = (0.0, 8.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if oracle_normal_cdf(mid) >= 0.875 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!((oracle - 1.1503493803760083).abs() < 1e-12);

        let d = Disjunctification::new(vec![Distribution::gaussian(1.0); 4]).unwrap();
        let y = d.eval_y(1.0).unwrap();
        assert!((y - oracle).abs() < 1e-9, "Y(1) = {y}, oracle {oracle}");
    }

    #[test]
    fn sixteen_exponentials_log_value() {
        let d = Disjunctification::new(vec![Distribution::exponential(1.0); 16]).unwrap();
        let y = d.eval_y(1.0).unwrap();
        assert!((y - 16.0f64.ln()).abs() < 1e-9, "Y(1) = {y}");
    }

    #[test]
    fn integral_and_integer_examples() {
        let d = Disjunctification::new(vec![
            Distribution::uniform(1.0),
            Distribution::uniform(1.0),
        ])
        .unwrap();
        let i01 = d.integral(0.0, 1.0).unwrap();
        assert!((i01 - 0.75).abs() < 1e-8, "integral = {i01}");
        let ints = d.at_integers();
        assert!((ints[0] - 0.5).abs() < 1e-9);
        assert_eq!(ints[1], 0.0);
        assert!(d.integral(0.5, 0.5).is_err());
    }

    #[test]
    fn integral_with_infinite_head() {
        // 16 exponentials: \int_0^1 Y = \int_0^1 ln(16/t) dt = 1 + ln 16.
        let d = Disjunctification::new(vec![Distribution::exponential(1.0); 16]).unwrap();
        let got = d.integral(0.0, 1.0).unwrap();
        let want = 1.0 + 16.0f64.ln();
        assert!((got - want).abs() < 1e-6, "got {got}, want {want}");
    }

    #[test]
    fn restrict_unit_constant_for_atom() {
        // constant up to the 1e-10 bisection tolerance
        let d = Disjunctification::new(vec![Distribution::two_point(1.0, 1.0)]).unwrap();
        let u = d.restrict_unit();
        for i in 0..100 {
            let t = i as f64 / 100.0;
            assert!((u.eval(t) - 1.0).abs() < 1e-9, "value at {t}: {}", u.eval(t));
        }
        assert!((u.integral_exact(0.0, 1.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn restrict_unit_exact_for_affine_family() {
        let d = Disjunctification::new(vec![
            Distribution::uniform(1.0),
            Distribution::uniform(1.0),
        ])
        .unwrap();
        let u = d.restrict_unit();
        for i in 1..100 {
            let t = i as f64 / 100.0;
            assert!((u.eval(t) - (1.0 - t / 2.0)).abs() < 1e-8, "at {t}");
        }
        assert!((u.integral_exact(0.0, 1.0) - 0.75).abs() < 1e-8);
    }

    #[test]
    fn restrict_unit_mixed_atoms() {
        // Two atoms at different heights: Y on (0,1] steps 2 -> 1 at t=0.3.
        let d = Disjunctification::new(vec![
            Distribution::two_point(2.0, 0.3),
            Distribution::two_point(1.0, 0.5),
        ])
        .unwrap();
        // Sigma steps at levels 0.8 (s < 1) and 0.3 (s < 2), so Y is 2 on
        // (0, 0.3), 1 on (0.3, 0.8), 0 beyond.
        let u = d.restrict_unit();
        assert!((u.eval(0.1) - 2.0).abs() < 1e-9);
        assert!((u.eval(0.2) - 2.0).abs() < 1e-9);
        assert!((u.eval(0.5) - 1.0).abs() < 1e-9);
        assert!((u.eval(0.75) - 1.0).abs() < 1e-9);
        assert!(u.eval(0.9).abs() < 1e-9);
        let exact = 0.3 * 2.0 + 0.5 * 1.0;
        assert!((u.integral_exact(0.0, 1.0) - exact).abs() < 1e-9);
    }

    #[test]
    fn monotonicity_and_permutation_invariance() {
        let fam = vec![
            Distribution::gaussian(1.0),
            Distribution::exponential(2.0),
            Distribution::uniform(0.5),
            Distribution::two_point(1.2, 0.4),
        ];
        let d1 = Disjunctification::new(fam.clone()).unwrap();
        let mut perm = fam.clone();
        perm.rotate_left(2);
        let d2 = Disjunctification::new(perm).unwrap();
        let mut prev = f64::INFINITY;
        for i in 1..=40 {
            let t = i as f64 * 0.1;
            let y1 = d1.eval_y(t).unwrap();
            let y2 = d2.eval_y(t).unwrap();
            assert!((y1 - y2).abs() <= 1e-10, "permutation changed Y({t})");
            assert!(y1 <= prev + 1e-10, "Y not non-increasing at {t}");
            prev = y1;
        }
    }

    #[test]
    fn scaling_equivariance() {
        let fam = vec![
            Distribution::gaussian(1.0),
            Distribution::exponential(1.0),
        ];
        let scaled: Vec<_> = fam
            .iter()
            .map(|d| Distribution::scaled(2.5, d.clone()))
            .collect();
        let d1 = Disjunctification::new(fam).unwrap();
        let d2 = Disjunctification::new(scaled).unwrap();
        for i in 1..=20 {
            let t = i as f64 * 0.1;
            let y1 = d1.eval_y(t).unwrap();
            let y2 = d2.eval_y(t).unwrap();
            assert!(
                (y2 - 2.5 * y1).abs() <= 3e-10,
                "scaling broke at {t}: {y2} vs {}",
                2.5 * y1
            );
        }
    }

    #[test]
    fn quantile_function_shape_checks() {
        assert!(QuantileFunction::new(vec![0.0, 1.0], vec![Piece::Const(1.0)]).is_ok());
        assert!(QuantileFunction::new(vec![0.5, 1.0], vec![Piece::Const(1.0)]).is_err());
        assert!(QuantileFunction::new(
            vec![0.0, 0.5, 1.0],
            vec![Piece::Const(1.0), Piece::Const(2.0)]
        )
        .is_err());
        let bad = QuantileFunction::new_unchecked(
            vec![0.0, 0.5, 1.0],
            vec![Piece::Const(1.0), Piece::Const(2.0)],
        );
        assert!(bad.monotone_violation().is_some());
    }

    #[test]
    fn eval_is_right_continuous() {
        let f = QuantileFunction::new(
            vec![0.0, 0.5, 1.0],
            vec![Piece::Const(2.0), Piece::Const(1.0)],
        )
        .unwrap();
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(0.4999999), 2.0);
        assert_eq!(f.eval(1.0), 1.0);
    }

    #[test]
    fn dilate_and_integrals() {
        let f = QuantileFunction::new(vec![0.0, 1.0], vec![Piece::Const(1.0)]).unwrap();
        let g = f.dilate(100.0).unwrap();
        assert_eq!(g.domain_length(), 100.0);
        assert_eq!(g.eval(42.0), 1.0);
        assert!(f.dilate(0.0).is_err());
        assert_eq!(f.dilate(1.0).unwrap(), f);

        let aff = QuantileFunction::new(
            vec![0.0, 2.0],
            vec![Piece::Affine { left: 1.0, right: 0.0 }],
        )
        .unwrap();
        assert!((aff.integral_exact(0.0, 2.0) - 1.0).abs() < 1e-15);
        assert!((aff.integral_exact(0.5, 1.0) - 0.3125).abs() < 1e-15);
    }

    #[test]
    fn csv_serialization_shape() {
        let f = QuantileFunction::new(
            vec![0.0, 0.5, 1.0],
            vec![Piece::Const(2.0), Piece::Const(1.0)],
        )
        .unwrap();
        let csv = f.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,value");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0.0000000000000000e0,"));
    }
}
