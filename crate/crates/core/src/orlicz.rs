//! Orlicz function algebra: named generators, splicing, the integral
//! regularization, the expectation transform, Luxemburg gauges over
//! sequences and piecewise functions, and the Gaussian closed forms.

use std::fmt;
use std::sync::Arc;

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, DIVERGENCE_CAP};
use crate::rearrange::{Piece, QuantileFunction};

/// Relative tolerance of the Luxemburg bisection. Tight enough that the
/// exact-identity tests at 1e-12 pass with margin.
pub const LUXEMBURG_REL_TOL: f64 = 1e-13;

/// A non-negative, non-decreasing function vanishing at 0, used through
/// modular sums and integrals. Convexity is tracked as a claim, not a
/// guarantee: spliced and exp-type functions need not be convex.
#[derive(Clone)]
pub struct OrliczFunction {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    label: String,
    convex_claimed: bool,
}

impl fmt::Debug for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OrliczFunction")
            .field("label", &self.label)
            .field("convex_claimed", &self.convex_claimed)
            .finish()
    }
}

impl OrliczFunction {
    pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(
        label: impl Into<String>,
        convex_claimed: bool,
        f: F,
    ) -> Self {
        OrliczFunction {
            eval: Arc::new(f),
            label: label.into(),
            convex_claimed,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_convex_claimed(&self) -> bool {
        self.convex_claimed
    }

    /// x^p (convex for p >= 1).
    pub fn power(p: f64) -> Self {
        assert!(p > 0.0, "power exponent must be positive");
        Self::from_fn(format!("power:{p}"), p >= 1.0, move |x: f64| {
            if x <= 0.0 {
                0.0
            } else if p == 1.0 {
                x
            } else if p == 2.0 {
                x * x
            } else {
                x.powf(p)
            }
        })
    }

    /// (x - 1/m)^+, the hinge matching the top-m sequence norm.
    pub fn top_m_hinge(m: usize) -> Self {
        assert!(m >= 1, "top_m_hinge needs m >= 1");
        let c = 1.0 / m as f64;
        Self::from_fn(format!("theta_top_m:{m}"), true, move |x: f64| (x - c).max(0.0))
    }

    /// exp(1 - 1/x^2), extended by 0 at 0. Not convex near 0; used as a
    /// modular only.
    pub fn exp_gauss() -> Self {
        Self::from_fn("exp_gauss", false, |x: f64| {
            if x <= 0.0 {
                0.0
            } else {
                (1.0 - 1.0 / (x * x)).exp()
            }
        })
    }

    /// x e^{x-1}: a convex normalized generator with genuinely non-power
    /// growth, handy wherever an Orlicz sequence norm is wanted.
    pub fn xexp() -> Self {
        Self::from_fn("xexp", true, |x: f64| {
            if x <= 0.0 {
                0.0
            } else {
                x * (x - 1.0).exp()
            }
        })
    }

    /// The splice equal to `psi` on [0,1] and `phi` on [1, inf).
    /// Both must satisfy the normalization phi(1) = psi(1) = 1.
    pub fn splice(phi: &OrliczFunction, psi: &OrliczFunction) -> Result<OrliczFunction> {
        let phi1 = phi.eval(1.0);
        let psi1 = psi.eval(1.0);
        if (phi1 - 1.0).abs() > 1e-9 || (psi1 - 1.0).abs() > 1e-9 {
            return Err(Error::SpliceNormalization { phi1, psi1 });
        }
        let (p, s) = (phi.clone(), psi.clone());
        Ok(Self::from_fn(
            format!("spliced:{},{}", phi.label, psi.label),
            false,
            move |x: f64| {
                if x <= 1.0 {
                    s.eval(x)
                } else {
                    p.eval(x)
                }
            },
        ))
    }

    /// The convex regularization x -> \int_0^x theta(t)/t dt, defined when
    /// theta(t)/t is non-decreasing (checked on a grid).
    pub fn regularized(&self) -> Result<OrliczFunction> {
        if self.eval(0.0).abs() > 1e-12 {
            return Err(Error::NotRegularizable(0.0));
        }
        let mut prev = 0.0f64;
        for k in 0..=1000 {
            let t = 1e-6 * (1e9f64).powf(k as f64 / 1000.0); // 1e-6 .. 1e3
            let r = self.eval(t) / t;
            if r < prev * (1.0 - 1e-9) {
                return Err(Error::NotRegularizable(t));
            }
            prev = prev.max(r);
        }
        let theta = self.clone();
        Ok(Self::from_fn(format!("tilde({})", self.label), true, move |x: f64| {
            if x <= 0.0 {
                return 0.0;
            }
            let delta = x * 1e-12;
            // 0 <= \int_0^delta theta/t <= theta(delta); take the middle.
            let head = 0.5 * theta.eval(delta);
            head + adaptive_simpson(&|t: f64| theta.eval(t) / t, delta, x, 1e-8, 0.0)
        }))
    }

    /// The expectation transform x -> E theta(x xi), evaluated by
    /// quadrature over the quantile variable with geometric refinement
    /// near u = 0 for unbounded xi. Divergence reports +inf.
    pub fn expectation_transform(&self, xi: &Distribution) -> OrliczFunction {
        let theta = self.clone();
        let xi = xi.clone();
        let convex = self.convex_claimed;
        OrliczFunction::from_fn(
            format!("lambda({};{})", self.label, xi.label()),
            convex,
            move |x: f64| {
                if x <= 0.0 {
                    return 0.0;
                }
                const U0: f64 = 1e-10;
                let h = |u: f64| theta.eval(x * xi.quantile(u.min(1.0 - 1e-16)));
                // Head (0, U0]: the integrand is non-increasing in u, so
                // U0 * h(U0) under-counts by at most the blow-up of h —
                // negligible at this width.
                let mut acc = U0 * h(U0);
                let mut lo = U0;
                let split = 1.0 / 64.0;
                while lo < split {
                    let hi = (lo * 2.0).min(split);
                    acc += adaptive_simpson(&h, lo, hi, 1e-7, 0.0);
                    if !acc.is_finite() || acc > DIVERGENCE_CAP {
                        return f64::INFINITY;
                    }
                    lo = hi;
                }
                acc += adaptive_simpson(&h, split, 1.0, 1e-7, 0.0);
                if !acc.is_finite() || acc > DIVERGENCE_CAP {
                    return f64::INFINITY;
                }
                acc
            },
        )
    }

    /// Grid sanity: 0 at 0, non-decreasing, midpoint-convex when claimed.
    pub fn validate_shape(&self) -> Result<()> {
        if self.eval(0.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "{}: value at 0 must be 0",
                self.label
            )));
        }
        let grid: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
        let vals: Vec<f64> = grid.iter().map(|&x| self.eval(x)).collect();
        for i in 1..vals.len() {
            if vals[i] < vals[i - 1] - 1e-9 * vals[i - 1].abs().max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{}: not non-decreasing near x = {}",
                    self.label, grid[i]
                )));
            }
        }
        if self.convex_claimed {
            for i in 0..vals.len() - 2 {
                let mid = vals[i + 1];
                let avg = 0.5 * (vals[i] + vals[i + 2]);
                if mid > avg + 1e-9 * avg.abs().max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "{}: midpoint convexity fails near x = {}",
                        self.label,
                        grid[i + 1]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Luxemburg gauge inf{lambda > 0 : modular(lambda) <= 1} for a modular
/// non-increasing in lambda. Bisection in a doubling bracket; safe for
/// non-convex generators because only monotonicity is used.
pub fn luxemburg_gauge<F: Fn(f64) -> f64>(modular: F, seed: f64) -> f64 {
    let mut hi = seed.max(1e-300);
    let mut guard = 0;
    while modular(hi) > 1.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 4000 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.5 * hi;
    while modular(lo) <= 1.0 {
        hi = lo;
        lo *= 0.5;
        if lo < 1e-300 {
            return 0.0;
        }
    }
    while hi - lo > LUXEMBURG_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if modular(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Luxemburg norm of a finite sequence: inf{lambda : sum psi(|x_i|/lambda) <= 1}.
pub fn luxemburg_seq(psi: &OrliczFunction, x: &[f64]) -> f64 {
    let max = x.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if max == 0.0 {
        return 0.0;
    }
    luxemburg_gauge(
        |lambda| {
            let mut acc = 0.0;
            for &v in x {
                if v != 0.0 {
                    acc += psi.eval(v.abs() / lambda);
                    if acc > DIVERGENCE_CAP {
                        return f64::INFINITY;
                    }
                }
            }
            acc
        },
        max,
    )
}

/// Modular \int_0^L theta(f/lambda) for a piecewise function: exact on
/// constant pieces, quadrature on affine ones.
pub fn orlicz_modular(theta: &OrliczFunction, f: &QuantileFunction, lambda: f64) -> f64 {
    let breaks = f.breakpoints();
    let mut acc = 0.0;
    for (i, piece) in f.pieces().iter().enumerate() {
        let w = breaks[i + 1] - breaks[i];
        match piece {
            Piece::Const(v) => {
                if *v > 0.0 {
                    acc += w * theta.eval(v / lambda);
                }
            }
            Piece::Affine { left, right } => {
                if (left - right).abs() <= 1e-14 * left.abs().max(1.0) {
                    acc += w * theta.eval(0.5 * (left + right) / lambda);
                } else {
                    let (l, r) = (*left, *right);
                    acc += w
                        * adaptive_simpson(
                            &|u: f64| theta.eval((l + (r - l) * u) / lambda),
                            0.0,
                            1.0,
                            1e-9,
                            0.0,
                        );
                }
            }
        }
        if !acc.is_finite() || acc > DIVERGENCE_CAP {
            return f64::INFINITY;
        }
    }
    acc
}

/// Luxemburg norm of a piecewise function over its whole domain.
pub fn luxemburg_function(theta: &OrliczFunction, f: &QuantileFunction) -> f64 {
    let max = f.max_value();
    if max == 0.0 {
        return 0.0;
    }
    luxemburg_gauge(|lambda| orlicz_modular(theta, f, lambda), max)
}

/// The profile x e^{-1/(mx)^2} that the Gaussian expectation transform of
/// the top-m hinge is equivalent to.
pub fn gaussian_lambda_profile(m: usize, x: f64) -> f64 {
    assert!(m >= 1 && x > 0.0);
    let mx = m as f64 * x;
    x * (-1.0 / (mx * mx)).exp()
}

/// (Luxemburg norm under exp(1 - 1/x^2), sup_i b*_i sqrt(1 + ln i)).
pub fn exp_gauss_norm_pair(b: &[f64]) -> (f64, f64) {
    let psi = OrliczFunction::exp_gauss();
    let lux = luxemburg_seq(&psi, b);
    let mut sorted: Vec<f64> = b.iter().map(|v| v.abs()).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let sup = sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| v * (1.0 + ((i + 1) as f64).ln()).sqrt())
        .fold(0.0f64, f64::max);
    (lux, sup)
}

/// sum_{i<=m} a*_i + m sup_{1 <= i <= n/m} a*_{mi} sqrt(1 + ln i),
/// the closed form for i.i.d. standard Gaussians under the top-m norm.
pub fn gaussian_top_m_closed_form(a: &[f64], m: usize) -> Result<f64> {
    let n = a.len();
    if m < 1 || m > n {
        return Err(Error::TopMOutOfRange { m, n });
    }
    let mut sorted: Vec<f64> = a.iter().map(|v| v.abs()).collect();
    sorted.sort_by(|x, y| y.total_cmp(x));
    let head: f64 = sorted[..m].iter().sum();
    let mut sup = 0.0f64;
    let mut i = 1usize;
    while m * i <= n {
        let term = sorted[m * i - 1] * (1.0 + (i as f64).ln()).sqrt();
        sup = sup.max(term);
        i += 1;
    }
    Ok(head + m as f64 * sup)
}
