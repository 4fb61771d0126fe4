//! Risk-neutral scaling of the log-t asset model.
//!
//! With `S_T = A_T exp(sigma_T xi)` the scale `A_T` is chosen so that the
//! discounted asset is a martingale, `E[S_T] = S_0 exp(rT)`. Because
//! `E[exp(sigma_T xi)]` diverges for a Student's t, the upper tail is bounded
//! at a critical value `x_c` in one of two ways:
//!
//! * **Capped**: the asset is limited to `A_T exp(sigma_T x_c)`; the tail mass
//!   `1 - p` sits at the cap. `A_T = S_0 e^{rT} / (Z + (1-p) e^{sigma_T x_c})`.
//! * **Truncated**: the density is zero above `x_c` and renormalized by `1/p`.
//!   `A_T = S_0 e^{rT} / Z` with `Z` carrying the `1/p` factor.
//!
//! Here `Z = int_{-inf}^{x_c} exp(sigma_T xi) pdf(xi) d xi` (divided by `p`
//! when truncated).

use serde::{Deserialize, Serialize};

use crate::distributions::StudentT;
use crate::error::{Error, Result};
use crate::numerics::{integrate, Interval};
use crate::pricing::MarketParams;

/// Tolerances for the expectation integrals. Tighter than the quadrature
/// defaults so that the martingale condition holds to ~1e-11.
pub(crate) const REL_TOL: f64 = 1e-12;
pub(crate) const ABS_TOL: f64 = 1e-14;

/// Largest `sigma_T x_c` (in log units) accepted; beyond this the growth
/// factor at the bound overflows a double.
const MAX_LOG_GROWTH: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailMode {
    Capped,
    Truncated,
}

/// How the upper bound is specified: a confidence level `p = P{xi <= x_c}`
/// or the critical value `x_c` itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailBound {
    Confidence(f64),
    CriticalValue(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPolicy {
    pub mode: TailMode,
    pub bound: TailBound,
}

impl TailPolicy {
    pub fn new(mode: TailMode, bound: TailBound) -> Self {
        Self { mode, bound }
    }

    pub fn capped_at_confidence(p: f64) -> Self {
        Self::new(TailMode::Capped, TailBound::Confidence(p))
    }

    pub fn truncated_at_confidence(p: f64) -> Self {
        Self::new(TailMode::Truncated, TailBound::Confidence(p))
    }

    pub fn capped_at(x_c: f64) -> Self {
        Self::new(TailMode::Capped, TailBound::CriticalValue(x_c))
    }

    pub fn truncated_at(x_c: f64) -> Self {
        Self::new(TailMode::Truncated, TailBound::CriticalValue(x_c))
    }
}

/// A tail policy with `p`, `1 - p` and `x_c` all populated for a given `nu`.
///
/// `tail_mass` is `P{xi > x_c}` evaluated directly from the upper tail, so it
/// keeps full relative precision when `p` is within rounding of 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedPolicy {
    pub mode: TailMode,
    pub nu: f64,
    pub p: f64,
    pub tail_mass: f64,
    pub x_c: f64,
}

pub fn resolve_policy(policy: TailPolicy, nu: f64) -> Result<ResolvedPolicy> {
    let dist = StudentT::new(nu)?;
    let (p, tail_mass, x_c) = match policy.bound {
        TailBound::Confidence(p) => {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::domain("p", p, "0 < p < 1"));
            }
            (p, 1.0 - p, dist.quantile(p)?)
        }
        TailBound::CriticalValue(x_c) => {
            if !x_c.is_finite() {
                return Err(Error::domain("x_c", x_c, "finite"));
            }
            let tail = dist.sf(x_c);
            (dist.cdf(x_c), tail, x_c)
        }
    };
    if !(p > 0.0) {
        return Err(Error::domain(
            "p",
            p,
            "x_c must leave positive mass below it",
        ));
    }
    Ok(ResolvedPolicy {
        mode: policy.mode,
        nu,
        p,
        tail_mass,
        x_c,
    })
}

/// Output of the martingale normalization.
///
/// `z` is the growth integral (already divided by `p` when truncated);
/// `denominator` is what `S_0 e^{rT}` is divided by to get `a_t`. They differ
/// only for a cap, where `denominator = z + (1-p) exp(sigma_T x_c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MartingaleScale {
    pub a_t: f64,
    pub z: f64,
    pub denominator: f64,
    pub x_c: f64,
    pub p: f64,
}

impl MartingaleScale {
    /// `ln(K_T / A_T) / sigma_T`: the return at which the payoff changes sign.
    pub fn lower_limit(&self, strike: f64, sigma_t: f64) -> f64 {
        (strike / self.a_t).ln() / sigma_t
    }
}

/// `int exp(sigma_t xi) pdf(xi) d xi` over `domain`.
///
/// The upper limit must be finite: for a Student's t the integral over the
/// whole line is infinite.
pub fn growth_integral(sigma_t: f64, nu: f64, domain: Interval) -> Result<f64> {
    if !(sigma_t > 0.0 && sigma_t.is_finite()) {
        return Err(Error::domain("sigma_t", sigma_t, "0 < sigma_t < inf"));
    }
    if !domain.upper().is_finite() {
        return Err(Error::domain(
            "upper limit",
            domain.upper(),
            "finite (the untruncated growth integral diverges)",
        ));
    }
    let dist = StudentT::new(nu)?;
    integrate_split(
        |xi| (sigma_t * xi + dist.ln_pdf(xi)).exp(),
        domain.lower(),
        domain.upper(),
    )
}

/// Integrates over `[lo, hi]`, splitting at 0 (the density peak) when it is interior.
pub(crate) fn integrate_split<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64> {
    if lo == hi {
        return Ok(0.0);
    }
    if lo < 0.0 && hi > 0.0 {
        let left = integrate(&f, Interval::new(lo, 0.0)?, REL_TOL, ABS_TOL)?;
        let right = integrate(&f, Interval::new(0.0, hi)?, REL_TOL, ABS_TOL)?;
        return Ok(left.value + right.value);
    }
    Ok(integrate(&f, Interval::new(lo, hi)?, REL_TOL, ABS_TOL)?.value)
}

pub fn martingale_scale(
    market: &MarketParams,
    nu: f64,
    policy: &ResolvedPolicy,
) -> Result<MartingaleScale> {
    market.validate()?;
    check_policy(policy, nu)?;
    let sigma_t = market.sigma_t();
    let ln_forward = market.s0.ln() + market.rate * market.tenor;

    if sigma_t * policy.x_c > MAX_LOG_GROWTH {
        return Err(Error::domain(
            "sigma_t * x_c",
            sigma_t * policy.x_c,
            "growth factor at x_c must be representable (< 700 in log units)",
        ));
    }
    let bare = growth_integral(sigma_t, nu, Interval::new(f64::NEG_INFINITY, policy.x_c)?)?;
    let (z, denominator) = match policy.mode {
        TailMode::Capped => {
            let ln_tail = policy.tail_mass.ln() + sigma_t * policy.x_c;
            (bare, bare + ln_tail.exp())
        }
        TailMode::Truncated => {
            let z = bare / policy.p;
            (z, z)
        }
    };
    Ok(MartingaleScale {
        a_t: (ln_forward - denominator.ln()).exp(),
        z,
        denominator,
        x_c: policy.x_c,
        p: policy.p,
    })
}

/// Re-evaluates `E[S_T]` under the policy's distribution of `S_T`, working
/// in asset-value space with the log-t density rather than in `xi`.
///
/// Returns `S_0 exp(rT)` to quadrature precision when `scale` came from
/// [`martingale_scale`] with the same inputs.
pub fn expected_asset_value(
    scale: &MartingaleScale,
    market: &MarketParams,
    nu: f64,
    policy: &ResolvedPolicy,
) -> Result<f64> {
    check_policy(policy, nu)?;
    if scale.x_c != policy.x_c {
        return Err(Error::PolicyMismatch {
            resolved: policy.x_c,
            requested: scale.x_c,
        });
    }
    let dist = StudentT::new(nu)?;
    let sigma_t = market.sigma_t();
    let a_t = scale.a_t;
    let cap = a_t * (sigma_t * policy.x_c).exp();

    // s pdf(s) ds with s = A exp(sigma xi) is pdf(xi)/sigma ds; its scale of
    // variation is s itself, so partition [0, cap] geometrically around A.
    let weighted = |s: f64| s * crate::distributions::log_t_pdf_with(&dist, s, a_t, sigma_t);
    let mut edges = vec![0.0];
    let mut k = 40.0 / sigma_t;
    let mut lower_edges = Vec::new();
    while k >= 1.0 {
        if -k < policy.x_c {
            lower_edges.push(-k);
        }
        k *= 0.5;
    }
    edges.extend(lower_edges.into_iter().map(|xi| a_t * (sigma_t * xi).exp()));
    let mut xi = 0.0;
    while xi < policy.x_c {
        edges.push(a_t * (sigma_t * xi).exp());
        xi = 2.0 * xi + 1.0;
    }
    edges.push(cap);

    let mut body = 0.0;
    for pair in edges.windows(2) {
        if pair[1] > pair[0] {
            body += integrate(weighted, Interval::new(pair[0], pair[1])?, REL_TOL, ABS_TOL)?.value;
        }
    }
    Ok(match policy.mode {
        TailMode::Capped => body + cap * policy.tail_mass,
        TailMode::Truncated => body / policy.p,
    })
}

pub(crate) fn check_policy(policy: &ResolvedPolicy, nu: f64) -> Result<()> {
    if policy.nu != nu {
        return Err(Error::PolicyMismatch {
            resolved: policy.nu,
            requested: nu,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::t_cdf;

    fn worked_example_market() -> MarketParams {
        MarketParams::with_horizon_volatility(50.0, 49.0, 0.03, 0.3, 1.0).unwrap()
    }

    #[test]
    fn growth_integral_small_volatility_is_probability_mass() {
        for nu in [3.0, 5.0] {
            let x_c = 4.0;
            let got =
                growth_integral(1e-12, nu, Interval::new(f64::NEG_INFINITY, x_c).unwrap()).unwrap();
            assert!((got - t_cdf(x_c, nu).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn growth_integral_reference_value() {
        // mpmath quad at 30 digits: 1.2029057229...
        let got = growth_integral(
            0.3,
            3.0,
            Interval::new(f64::NEG_INFINITY, 22.203_742_273_205).unwrap(),
        )
        .unwrap();
        assert!((got - 1.202_905_722_921_887).abs() < 1e-10, "{got}");
        assert!((got - 1.2029).abs() < 1e-4);
    }

    #[test]
    fn growth_integral_edges() {
        assert_eq!(
            growth_integral(0.3, 3.0, Interval::new(1.0, 1.0).unwrap()).unwrap(),
            0.0
        );
        assert!(growth_integral(0.3, 3.0, Interval::whole_line()).is_err());
        assert!(growth_integral(0.0, 3.0, Interval::new(0.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn resolve_examples() {
        let r = resolve_policy(TailPolicy::capped_at_confidence(0.9999), 5.0).unwrap();
        assert!((r.x_c - 9.678).abs() < 1e-3);
        let r = resolve_policy(TailPolicy::truncated_at(0.0), 4.2).unwrap();
        assert_eq!(r.p, 0.5);
        let r = resolve_policy(TailPolicy::capped_at_confidence(0.99), 3.0).unwrap();
        assert!((r.x_c - 4.541).abs() < 1e-3);
        // round trip through x_c
        let back = resolve_policy(TailPolicy::capped_at(r.x_c), 3.0).unwrap();
        assert!((back.p - 0.99).abs() < 1e-12);
        assert!((back.tail_mass - 0.01).abs() < 1e-14);
    }

    #[test]
    fn resolve_rejects_bad_bounds() {
        for p in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(resolve_policy(TailPolicy::capped_at_confidence(p), 3.0).is_err());
        }
        assert!(resolve_policy(TailPolicy::capped_at(f64::INFINITY), 3.0).is_err());
        assert!(resolve_policy(TailPolicy::capped_at(1.0), 0.0).is_err());
    }

    #[test]
    fn worked_example_capped_and_truncated_diagnostics() {
        let market = worked_example_market();
        let capped = resolve_policy(TailPolicy::capped_at_confidence(0.9999), 3.0).unwrap();
        let s = martingale_scale(&market, 3.0, &capped).unwrap();
        assert!((s.denominator - 1.281).abs() < 1e-3, "{}", s.denominator);
        assert!((s.lower_limit(49.0, 0.3) - 0.6583).abs() < 1e-4);

        let truncated = resolve_policy(TailPolicy::truncated_at_confidence(0.9999), 3.0).unwrap();
        let s = martingale_scale(&market, 3.0, &truncated).unwrap();
        assert!((s.z - 1.203).abs() < 1e-3, "{}", s.z);
        assert_eq!(s.z, s.denominator);
        assert!((s.lower_limit(49.0, 0.3) - 0.4488).abs() < 1e-4);
    }

    #[test]
    fn normal_pathway_recovers_lognormal_scale() {
        let market = worked_example_market();
        let policy = resolve_policy(TailPolicy::capped_at(40.0), f64::INFINITY).unwrap();
        let s = martingale_scale(&market, f64::INFINITY, &policy).unwrap();
        assert!((s.z - (0.045f64).exp()).abs() < 1e-12);
        let want = 50.0 * (0.03f64 - 0.045).exp();
        assert!((s.a_t - want).abs() < 1e-10);
    }

    #[test]
    fn expected_asset_value_is_the_forward() {
        let market = worked_example_market();
        let forward = 50.0 * 0.03f64.exp();
        for mode in [TailMode::Capped, TailMode::Truncated] {
            for nu in [3.0, 40.0] {
                let policy =
                    resolve_policy(TailPolicy::new(mode, TailBound::Confidence(0.999)), nu)
                        .unwrap();
                let s = martingale_scale(&market, nu, &policy).unwrap();
                let e = expected_asset_value(&s, &market, nu, &policy).unwrap();
                assert!(((e - forward) / forward).abs() < 1e-8, "{mode:?} {nu}: {e}");
            }
        }
        let zero_rate = MarketParams::with_horizon_volatility(50.0, 49.0, 0.0, 0.3, 1.0).unwrap();
        let policy = resolve_policy(TailPolicy::capped_at_confidence(0.99), 5.0).unwrap();
        let s = martingale_scale(&zero_rate, 5.0, &policy).unwrap();
        let e = expected_asset_value(&s, &zero_rate, 5.0, &policy).unwrap();
        assert!((e - 50.0).abs() < 1e-7);
    }

    #[test]
    fn nu_mismatch_is_rejected() {
        let market = worked_example_market();
        let policy = resolve_policy(TailPolicy::capped_at_confidence(0.99), 5.0).unwrap();
        assert!(matches!(
            martingale_scale(&market, 3.0, &policy),
            Err(Error::PolicyMismatch { .. })
        ));
    }

    #[test]
    fn capped_scale_never_exceeds_truncated() {
        let market = worked_example_market();
        for nu in [2.65, 3.0, 5.0, 40.0] {
            for p in [0.99, 0.999, 0.9999] {
                let c = resolve_policy(TailPolicy::capped_at_confidence(p), nu).unwrap();
                let t = resolve_policy(TailPolicy::truncated_at_confidence(p), nu).unwrap();
                let a_c = martingale_scale(&market, nu, &c).unwrap().a_t;
                let a_t = martingale_scale(&market, nu, &t).unwrap().a_t;
                assert!(a_c <= a_t, "nu {nu} p {p}: {a_c} > {a_t}");
            }
        }
    }
}
