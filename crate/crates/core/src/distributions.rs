//! Standardized Student's t and unit normal distributions, plus the log-t
//! density of asset values `S_t = A_t exp(sigma_t xi)`.
//!
//! Degrees of freedom are real-valued. `nu = f64::INFINITY` selects the unit
//! normal everywhere, which is how the Black-Scholes limit is reached.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{incomplete_beta_pair, ln_beta, ln_t_normalization};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Student's t with `nu` degrees of freedom, location 0 and scale 1.
///
/// Holds the normalization constants so repeated evaluation (quadrature,
/// inverse-CDF sampling) does not recompute log-gammas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentT {
    nu: f64,
    ln_lambda: f64,
    ln_beta: f64,
}

impl StudentT {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::domain("nu", nu, "nu > 0"));
        }
        if nu.is_infinite() {
            return Ok(Self {
                nu,
                ln_lambda: FRAC_1_SQRT_2PI.ln(),
                ln_beta: f64::NAN,
            });
        }
        Ok(Self {
            nu,
            ln_lambda: ln_t_normalization(nu),
            ln_beta: ln_beta(0.5 * nu, 0.5),
        })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn is_normal(&self) -> bool {
        self.nu.is_infinite()
    }

    /// Normalization constant Gamma((nu+1)/2) / (Gamma(nu/2) sqrt(pi nu)).
    pub fn lambda(&self) -> f64 {
        self.ln_lambda.exp()
    }

    pub fn ln_pdf(&self, xi: f64) -> f64 {
        if self.is_normal() {
            return self.ln_lambda - 0.5 * xi * xi;
        }
        self.ln_lambda - 0.5 * (self.nu + 1.0) * (xi * xi / self.nu).ln_1p()
    }

    pub fn pdf(&self, xi: f64) -> f64 {
        self.ln_pdf(xi).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x > 0.0 {
            1.0 - self.sf(x)
        } else {
            self.sf(-x)
        }
    }

    /// Upper tail P{xi > x}, accurate far into the tail.
    pub fn sf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if self.is_normal() {
            return normal_sf(x);
        }
        if x < 0.0 {
            return 1.0 - self.sf(-x);
        }
        let r = x / self.nu.sqrt();
        let a = 0.5 * self.nu;
        if r > 1e150 {
            // I_w(a, 1/2) = w^a / (a B(a, 1/2)) (1 + O(w)) with w = 1/r^2 below 1e-300.
            return 0.5 * (-2.0 * a * r.ln() - a.ln() - self.ln_beta).exp();
        }
        // P{xi > x} = I_w(nu/2, 1/2) / 2 with w = nu / (nu + x^2).
        let r2 = r * r;
        0.5 * incomplete_beta_pair(a, 0.5, 1.0 / (1.0 + r2), r2 / (1.0 + r2), self.ln_beta)
    }

    /// Inverse CDF. Bracketing plus safeguarded Halley iteration on
    /// `ln P{xi > x} = ln q`, solved in whichever tail holds `p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain("p", p, "0 < p < 1"));
        }
        if self.is_normal() {
            return normal_quantile(p);
        }
        if p == 0.5 {
            return Ok(0.0);
        }
        if p < 0.5 {
            return Ok(-self.upper_quantile(p));
        }
        Ok(self.upper_quantile(1.0 - p))
    }

    /// Solves P{xi > x} = q for q in (0, 1/2).
    fn upper_quantile(&self, q: f64) -> f64 {
        let nu = self.nu;
        let ln_q = q.ln();

        // Starting point: the smaller of a Cornish-Fisher expansion about the
        // normal quantile and the power-law tail asymptote; both overshoot in
        // the opposite regime.
        let z = -normal_quantile_unchecked(q);
        let z2 = z * z;
        let cornish_fisher = z
            + z * (z2 + 1.0) / (4.0 * nu)
            + z * (5.0 * z2 * z2 + 16.0 * z2 + 3.0) / (96.0 * nu * nu)
            + z * (3.0 * z2 * z2 * z2 + 19.0 * z2 * z2 + 17.0 * z2 - 15.0) / (384.0 * nu * nu * nu);
        let tail = ((self.ln_lambda + 0.5 * (nu - 1.0) * nu.ln() - ln_q) / nu).exp();
        let mut x = if cornish_fisher > 0.0 {
            cornish_fisher.min(tail)
        } else {
            tail
        };
        if !(x.is_finite() && x > 0.0) {
            x = 1.0;
        }

        let mut lo = 0.0_f64;
        let mut hi = f64::INFINITY;
        for _ in 0..200 {
            let sf = self.sf(x);
            let g = sf.ln() - ln_q;
            if g > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if g.abs() < 1e-14 {
                break;
            }
            let h = self.pdf(x) / sf; // -g'
            let g1 = -h;
            let g2 = h * (nu + 1.0) * x / (nu + x * x) - h * h;
            let denom = 2.0 * g1 * g1 - g * g2;
            let mut next = if denom != 0.0 && denom.is_finite() {
                x - 2.0 * g * g1 / denom
            } else {
                x - g / g1
            };
            if !(next > lo && next < hi) || !next.is_finite() {
                next = if hi.is_finite() {
                    0.5 * (lo + hi)
                } else {
                    2.0 * x.max(1.0)
                };
            }
            let step = (next - x).abs();
            x = next;
            if step <= 1e-15 * x.abs() {
                break;
            }
        }
        x
    }

    /// nu / (nu - 2); infinite-variance shapes (nu <= 2) are rejected.
    pub fn variance(&self) -> Result<f64> {
        t_variance(self.nu)
    }
}

/// Location-scale Student's t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TParams {
    pub nu: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl TParams {
    pub fn new(nu: f64, mu: f64, sigma: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::domain("nu", nu, "nu > 0"));
        }
        if !mu.is_finite() {
            return Err(Error::domain("mu", mu, "finite"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain("sigma", sigma, "0 < sigma < inf"));
        }
        Ok(Self { nu, mu, sigma })
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(StudentT::new(self.nu)?.pdf((x - self.mu) / self.sigma) / self.sigma)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        Ok(self.mu + self.sigma * StudentT::new(self.nu)?.quantile(p)?)
    }

    /// Variance nu/(nu-2) sigma^2, defined only for nu > 2.
    pub fn variance(&self) -> Result<f64> {
        Ok(t_variance(self.nu)? * self.sigma * self.sigma)
    }
}

/// Parameters of the log-t asset density: `S_t = a_t exp(sigma_t xi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogTParams {
    pub a_t: f64,
    pub sigma_t: f64,
    pub nu: f64,
}

impl LogTParams {
    pub fn new(a_t: f64, sigma_t: f64, nu: f64) -> Result<Self> {
        if !(a_t > 0.0 && a_t.is_finite()) {
            return Err(Error::domain("a_t", a_t, "0 < a_t < inf"));
        }
        if !(sigma_t > 0.0 && sigma_t.is_finite()) {
            return Err(Error::domain("sigma_t", sigma_t, "0 < sigma_t < inf"));
        }
        if !(nu > 0.0) {
            return Err(Error::domain("nu", nu, "nu > 0"));
        }
        Ok(Self { a_t, sigma_t, nu })
    }
}

pub fn lambda_nu(nu: f64) -> Result<f64> {
    Ok(StudentT::new(nu)?.lambda())
}

pub fn t_pdf(xi: f64, nu: f64) -> Result<f64> {
    Ok(StudentT::new(nu)?.pdf(xi))
}

pub fn t_cdf(x: f64, nu: f64) -> Result<f64> {
    Ok(StudentT::new(nu)?.cdf(x))
}

/// P{xi > x}.
pub fn t_sf(x: f64, nu: f64) -> Result<f64> {
    Ok(StudentT::new(nu)?.sf(x))
}

pub fn t_quantile(p: f64, nu: f64) -> Result<f64> {
    StudentT::new(nu)?.quantile(p)
}

pub fn t_variance(nu: f64) -> Result<f64> {
    if !(nu > 2.0) {
        return Err(Error::domain(
            "nu",
            nu,
            "nu > 2 (variance is infinite otherwise)",
        ));
    }
    if nu.is_infinite() {
        return Ok(1.0);
    }
    Ok(nu / (nu - 2.0))
}

/// Density of `S_t` under the log-t model, including the `1/(sigma_t s)` Jacobian.
pub fn log_t_pdf(s: f64, params: &LogTParams) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain("s", s, "s > 0"));
    }
    let dist = StudentT::new(params.nu)?;
    Ok(log_t_pdf_with(&dist, s, params.a_t, params.sigma_t))
}

pub(crate) fn log_t_pdf_with(dist: &StudentT, s: f64, a_t: f64, sigma_t: f64) -> f64 {
    let xi = (s / a_t).ln() / sigma_t;
    (dist.ln_pdf(xi) - (sigma_t * s).ln()).exp()
}

pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// P{X > x} for a unit normal.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("p", p, "0 < p < 1"));
    }
    Ok(normal_quantile_unchecked(p))
}

/// Acklam's rational approximation followed by one Halley step against erfc.
fn normal_quantile_unchecked(p: f64) -> f64 {
    if p > 0.5 {
        return -normal_quantile_unchecked(1.0 - p);
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}
