//! A numerical laboratory for norms of independent random families.
//!
//! The quantity of interest is the M-norm of the N-norm of the vector
//! (|X_1|, ..., |X_n|): a rearrangement-invariant function norm M applied
//! to a symmetric sequence norm N of independent random variables. The
//! crate estimates it by seeded Monte Carlo and compares it with a
//! deterministic formula built from the disjunctification Y of the family
//! (the non-increasing function on [0, n] with measure{Y > t} equal to the
//! summed survival probabilities): the M-norm of Y on the unit interval
//! plus the N-norm of (Y(1), ..., Y(n)).
//!
//! Modules:
//! - [`dist`]: analytic distributions (survival, quantile, seeded sampling)
//! - [`rearrange`]: piecewise quantile functions and the disjunctification
//! - [`norms`]: L_p, Lorentz and Orlicz function norms; l_p, top-m and
//!   Orlicz sequence norms; the combined head-plus-samples functional
//! - [`orlicz`]: Orlicz function algebra and Luxemburg gauges
//! - [`montecarlo`]: seeded estimators and the explicit-constant checks
//! - [`experiment`]: the config-driven runner behind the CLI
//!
//! Quick comparison of the two sides for a family of two uniforms:
//! ```
//! use rinorm::{Distribution, McConfig, RiNormSpec, SeqNormSpec};
//! use rinorm::montecarlo::{estimate_lhs, rhs_eval};
//!
//! let family = vec![Distribution::uniform(1.0); 2];
//! let (m, n) = (RiNormSpec::lp(1.0), SeqNormSpec::linf());
//!
//! // disjoint-sum side: \int_0^1 Y + Y(1) with Y(t) = 1 - t/2
//! let rhs = rhs_eval(&family, &n, &m).unwrap();
//! assert!((rhs - 1.25).abs() < 1e-7);
//!
//! // sampled side: E max(U_1, U_2) = 2/3
//! let est = estimate_lhs(&family, &n, &m, &McConfig::new(4000, 4, 7)).unwrap();
//! assert!((est.value - 2.0 / 3.0).abs() < 4.0 * est.stderr + 1e-2);
//! ```

pub mod dist;
pub mod error;
pub mod experiment;
pub mod montecarlo;
pub mod norms;
pub mod orlicz;
pub mod quad;
pub mod rearrange;
pub mod special;

pub use dist::{Distribution, RngStream};
pub use error::{Error, Result};
pub use montecarlo::{Estimate, McConfig};
pub use norms::{HeadTailNorm, RiNormSpec, SeqNormSpec};
pub use orlicz::OrliczFunction;
pub use rearrange::{empirical_quantile, Disjunctification, QuantileFunction};
