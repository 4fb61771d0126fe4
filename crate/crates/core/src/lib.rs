//! European option pricing under a log Student's t-distribution of returns.
//!
//! A Student's t return distribution has tails fat enough that the expected
//! asset value diverges for small degrees of freedom. Prices are made finite
//! either by capping the asset at `A_T exp(sigma_T x_c)` or by truncating the
//! density above `x_c` and renormalizing. The risk-neutral scale `A_T` is
//! then fixed by requiring `E[S_T] = S_0 exp(rT)`.
//!
//! Black-Scholes is recovered as the normal limit (`nu = f64::INFINITY`),
//! and a seeded Monte Carlo sampler provides an independent check on every
//! quadrature price.
//!
//! ```
//! use gosset_core::{gosset_call, resolve_policy, MarketParams, TailPolicy};
//!
//! let market = MarketParams::with_horizon_volatility(50.0, 49.0, 0.03, 0.3, 1.0).unwrap();
//! let policy = resolve_policy(TailPolicy::capped_at_confidence(0.9999), 3.0).unwrap();
//! let quote = gosset_call(&market, 3.0, &policy).unwrap();
//! assert!((quote.scale.denominator - 1.281).abs() < 2e-3);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Published series coefficients are kept digit for digit.
#![allow(clippy::excessive_precision)]

pub mod calibration;
pub mod distributions;
mod error;
pub mod martingale;
pub mod numerics;
pub mod oracle;
pub mod pricing;

pub use calibration::{
    critical_report, fit_normal, fit_series, fit_t, fit_t_histogram, log_returns, parse_series,
    read_series, tail_mass_ratio, CriticalValue, FitResult, NormalFit, ReturnSeries, TFit,
};
pub use distributions::{
    lambda_nu, log_t_pdf, normal_cdf, normal_pdf, normal_quantile, t_cdf, t_pdf, t_quantile,
    t_variance, LogTParams, StudentT, TParams,
};
pub use error::{Error, Result};
pub use martingale::{
    expected_asset_value, growth_integral, martingale_scale, resolve_policy, MartingaleScale,
    ResolvedPolicy, TailBound, TailMode, TailPolicy,
};
pub use numerics::{integrate, ln_gamma, regularized_incomplete_beta, Interval, QuadratureResult};
pub use oracle::{mc_expected_asset, mc_price, sample_t, sample_xi, McConfig, McEstimate};
pub use pricing::{
    black_scholes, discount, gosset_call, gosset_price, gosset_put, parity_gap, MarketParams,
    Model, OptionKind, Quote,
};
