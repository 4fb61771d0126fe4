//! European option prices under the bounded log-t model, plus Black-Scholes.

use serde::{Deserialize, Serialize};

use crate::distributions::{normal_cdf, StudentT};
use crate::error::{Error, Result};
use crate::martingale::{
    check_policy, integrate_split, martingale_scale, MartingaleScale, ResolvedPolicy, TailMode,
};

/// Market inputs. `sigma` is the annualized volatility, `tenor` is in years,
/// `rate` is continuously compounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub s0: f64,
    pub strike: f64,
    pub rate: f64,
    pub sigma: f64,
    pub tenor: f64,
}

impl MarketParams {
    pub fn new(s0: f64, strike: f64, rate: f64, sigma: f64, tenor: f64) -> Result<Self> {
        let m = Self {
            s0,
            strike,
            rate,
            sigma,
            tenor,
        };
        m.validate()?;
        Ok(m)
    }

    /// Builds parameters from the horizon volatility `sigma_t = sigma sqrt(T)`.
    pub fn with_horizon_volatility(
        s0: f64,
        strike: f64,
        rate: f64,
        sigma_t: f64,
        tenor: f64,
    ) -> Result<Self> {
        if !(tenor > 0.0 && tenor.is_finite()) {
            return Err(Error::domain("tenor", tenor, "0 < tenor < inf"));
        }
        Self::new(s0, strike, rate, sigma_t / tenor.sqrt(), tenor)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            return Err(Error::domain("s0", self.s0, "0 < s0 < inf"));
        }
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(Error::domain("strike", self.strike, "0 < strike < inf"));
        }
        if !self.rate.is_finite() {
            return Err(Error::domain("rate", self.rate, "finite"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::domain("sigma", self.sigma, "0 < sigma < inf"));
        }
        if !(self.tenor > 0.0 && self.tenor.is_finite()) {
            return Err(Error::domain("tenor", self.tenor, "0 < tenor < inf"));
        }
        Ok(())
    }

    pub fn sigma_t(&self) -> f64 {
        self.sigma * self.tenor.sqrt()
    }

    pub fn forward(&self) -> f64 {
        self.s0 * (self.rate * self.tenor).exp()
    }

    pub fn discount_factor(&self) -> f64 {
        (-self.rate * self.tenor).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    GossetCapped,
    GossetTruncated,
    BlackScholes,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::GossetCapped => "gosset_capped",
            Model::GossetTruncated => "gosset_truncated",
            Model::BlackScholes => "black_scholes",
        }
    }
}

/// A priced option. `price_at_expiry` is the undiscounted expected payoff,
/// `price_now` its present value. For Black-Scholes the scale is the
/// log-normal one (`x_c = inf`, `p = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quote {
    pub price_at_expiry: f64,
    pub price_now: f64,
    pub scale: MartingaleScale,
    pub lower_limit: f64,
    pub kind: OptionKind,
    pub model: Model,
}

pub fn discount(value: f64, rate: f64, tenor: f64) -> f64 {
    value * (-rate * tenor).exp()
}

pub fn gosset_call(market: &MarketParams, nu: f64, policy: &ResolvedPolicy) -> Result<Quote> {
    gosset_price(market, nu, policy, OptionKind::Call)
}

pub fn gosset_put(market: &MarketParams, nu: f64, policy: &ResolvedPolicy) -> Result<Quote> {
    gosset_price(market, nu, policy, OptionKind::Put)
}

pub fn gosset_price(
    market: &MarketParams,
    nu: f64,
    policy: &ResolvedPolicy,
    kind: OptionKind,
) -> Result<Quote> {
    market.validate()?;
    check_policy(policy, nu)?;
    let scale = martingale_scale(market, nu, policy)?;
    let dist = StudentT::new(nu)?;
    let sigma_t = market.sigma_t();
    let strike = market.strike;
    let ln_a = scale.a_t.ln();
    let lower = scale.lower_limit(strike, sigma_t);
    let x_c = policy.x_c;

    // (A e^{sigma xi} - K) pdf(xi), the call payoff weighted by the density.
    let call_weight = |xi: f64| {
        let ln_pdf = dist.ln_pdf(xi);
        (ln_a + sigma_t * xi + ln_pdf).exp() - strike * ln_pdf.exp()
    };
    let put_weight = |xi: f64| -call_weight(xi);
    // Payoff at the cap, times the mass placed there.
    let cap_term = |sign: f64| {
        sign * ((ln_a + sigma_t * x_c + policy.tail_mass.ln()).exp() - strike * policy.tail_mass)
    };

    let expiry = match (kind, policy.mode) {
        (OptionKind::Call, TailMode::Capped) => {
            if lower >= x_c {
                0.0
            } else {
                integrate_split(call_weight, lower, x_c)? + cap_term(1.0)
            }
        }
        (OptionKind::Call, TailMode::Truncated) => {
            if lower >= x_c {
                0.0
            } else {
                integrate_split(call_weight, lower, x_c)? / policy.p
            }
        }
        (OptionKind::Put, TailMode::Capped) => {
            if lower < x_c {
                integrate_split(put_weight, f64::NEG_INFINITY, lower)?
            } else {
                // Strike above the cap: the put pays at every outcome,
                // including the capped one.
                integrate_split(put_weight, f64::NEG_INFINITY, x_c)? + cap_term(-1.0)
            }
        }
        (OptionKind::Put, TailMode::Truncated) => {
            if lower >= x_c {
                return Err(Error::StrikeAboveTruncation {
                    lower_limit: lower,
                    x_c,
                });
            }
            integrate_split(put_weight, f64::NEG_INFINITY, lower)? / policy.p
        }
    };
    if !expiry.is_finite() {
        return Err(Error::NonFiniteIntegrand {
            at: lower,
            value: expiry,
        });
    }
    let expiry = expiry.max(0.0);
    Ok(Quote {
        price_at_expiry: expiry,
        price_now: expiry * market.discount_factor(),
        scale,
        lower_limit: lower,
        kind,
        model: match policy.mode {
            TailMode::Capped => Model::GossetCapped,
            TailMode::Truncated => Model::GossetTruncated,
        },
    })
}

/// Black-Scholes price. The put is obtained from the call by parity.
pub fn black_scholes(market: &MarketParams, kind: OptionKind) -> Result<Quote> {
    market.validate()?;
    let sigma_t = market.sigma_t();
    let half_var = 0.5 * sigma_t * sigma_t;
    let d1 = ((market.s0 / market.strike).ln() + market.rate * market.tenor + half_var) / sigma_t;
    let d2 = d1 - sigma_t;
    let k_pv = market.strike * market.discount_factor();
    let call = market.s0 * normal_cdf(d1) - k_pv * normal_cdf(d2);
    let now = match kind {
        OptionKind::Call => call,
        OptionKind::Put => call - market.s0 + k_pv,
    }
    .max(0.0);
    let z = half_var.exp();
    let scale = MartingaleScale {
        a_t: market.forward() / z,
        z,
        denominator: z,
        x_c: f64::INFINITY,
        p: 1.0,
    };
    Ok(Quote {
        price_at_expiry: now / market.discount_factor(),
        price_now: now,
        scale,
        lower_limit: scale.lower_limit(market.strike, sigma_t),
        kind,
        model: Model::BlackScholes,
    })
}

/// `C_0 - P_0 - (S_0 - K e^{-rT})`; zero for a consistent pair.
pub fn parity_gap(call: &Quote, put: &Quote, market: &MarketParams) -> Result<f64> {
    if call.kind != OptionKind::Call || put.kind != OptionKind::Put {
        return Err(Error::QuoteMismatch("expected a call and a put"));
    }
    if call.model != put.model {
        return Err(Error::QuoteMismatch("quotes come from different models"));
    }
    if call.scale != put.scale {
        return Err(Error::QuoteMismatch(
            "quotes use different martingale scales",
        ));
    }
    market.validate()?;
    Ok(call.price_now - put.price_now - (market.s0 - market.strike * market.discount_factor()))
}
