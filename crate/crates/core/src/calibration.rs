//! Fitting normal and location-scale Student's t distributions to returns.
//!
//! The t fit is maximum likelihood, solved by damped Newton iteration over
//! `(mu, ln sigma, ln nu)` with `nu` confined to `[NU_MIN, NU_MAX]`. Data are
//! standardized before fitting so the estimates are exactly scale- and
//! shift-equivariant. Standard errors come from the observed information.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distributions::{normal_quantile, normal_sf, StudentT, TParams};
use crate::error::{Error, Result};
use crate::numerics::{digamma, ln_gamma, trigamma, CompensatedSum};

pub const NU_MIN: f64 = 0.5;
pub const NU_MAX: f64 = 200.0;
pub const MIN_FIT_LEN: usize = 30;
/// Tail probabilities reported by default, as in the usual critical-value table.
pub const DEFAULT_Q_LEVELS: [f64; 3] = [1e-4, 1e-3, 1e-2];

const MAX_NEWTON_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub returns: Vec<f64>,
    pub label: String,
}

impl ReturnSeries {
    pub fn new(returns: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if let Some(i) = returns.iter().position(|r| !r.is_finite()) {
            return Err(Error::InvalidData(format!(
                "return #{} is not finite",
                i + 1
            )));
        }
        Ok(Self {
            returns,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    /// Rejects constant and too-short series, in that order.
    fn check_fittable(&self) -> Result<()> {
        let first = self.returns.first().copied();
        if self.returns.len() < 2 || self.returns.iter().all(|&r| Some(r) == first) {
            return Err(Error::Degenerate(format!(
                "series '{}' has zero variance; nothing to fit",
                self.label
            )));
        }
        if self.returns.len() < MIN_FIT_LEN {
            return Err(Error::InsufficientData {
                len: self.returns.len(),
                min: MIN_FIT_LEN,
            });
        }
        Ok(())
    }
}

/// `r_i = ln(P_{i+1} / P_i)`.
pub fn log_returns(prices: &[f64]) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(Error::InsufficientData {
            len: prices.len(),
            min: 2,
        });
    }
    if let Some(i) = prices.iter().position(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(Error::InvalidData(format!(
            "price #{} is {}; prices must be positive and finite",
            i + 1,
            prices[i]
        )));
    }
    let returns = prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    ReturnSeries::new(returns, "")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFit {
    pub mu: f64,
    pub sigma: f64,
    pub mu_se: f64,
    pub sigma_se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TFit {
    pub params: TParams,
    pub mu_se: f64,
    pub sigma_se: f64,
    /// `None` when the estimate sits on a bound of the `nu` range.
    pub nu_se: Option<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
}

/// `|x_c(q)|` under both fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub q: f64,
    pub normal: f64,
    pub student_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub label: String,
    pub count: usize,
    pub sample_mean: f64,
    pub sample_std: f64,
    pub normal: NormalFit,
    pub student_t: TFit,
    pub critical_values: Vec<CriticalValue>,
}

fn mean_and_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mut sum = CompensatedSum::new();
    xs.iter().for_each(|&x| sum.add(x));
    let mean = sum.value() / n;
    let mut ss = CompensatedSum::new();
    xs.iter().for_each(|&x| ss.add((x - mean) * (x - mean)));
    let std = if n > 1.0 {
        (ss.value() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

pub fn fit_normal(series: &ReturnSeries) -> Result<NormalFit> {
    series.check_fittable()?;
    let n = series.len() as f64;
    let (mu, s) = mean_and_std(&series.returns);
    let sigma = s * ((n - 1.0) / n).sqrt();
    Ok(NormalFit {
        mu,
        sigma,
        mu_se: s / n.sqrt(),
        sigma_se: sigma / (2.0 * n).sqrt(),
    })
}

/// Per-observation log-likelihood terms shared by value and derivatives.
struct NuTerms {
    ln_norm: f64,
    psi_half_diff: f64,
    trigamma_half_diff: f64,
}

impl NuTerms {
    fn new(nu: f64) -> Self {
        let a = 0.5 * (nu + 1.0);
        let b = 0.5 * nu;
        Self {
            ln_norm: ln_gamma(a).unwrap_or(f64::NAN)
                - ln_gamma(b).unwrap_or(f64::NAN)
                - 0.5 * (std::f64::consts::PI * nu).ln(),
            psi_half_diff: digamma(a) - digamma(b),
            trigamma_half_diff: trigamma(a) - trigamma(b),
        }
    }
}

/// Total log-likelihood of `xs` under t(nu, mu, sigma).
fn log_likelihood(xs: &[f64], mu: f64, sigma: f64, nu: f64) -> f64 {
    let t = NuTerms::new(nu);
    let mut sum = CompensatedSum::new();
    for &x in xs {
        let z = (x - mu) / sigma;
        sum.add(-0.5 * (nu + 1.0) * (z * z / nu).ln_1p());
    }
    sum.value() + xs.len() as f64 * (t.ln_norm - sigma.ln())
}

/// Negative log-likelihood of a series under `params`.
pub fn t_neg_log_likelihood(series: &ReturnSeries, params: &TParams) -> f64 {
    -log_likelihood(&series.returns, params.mu, params.sigma, params.nu)
}

/// Gradient and Hessian of the total log-likelihood in `(mu, sigma, nu)`.
fn derivatives(xs: &[f64], mu: f64, sigma: f64, nu: f64) -> ([f64; 3], [[f64; 3]; 3]) {
    let t = NuTerms::new(nu);
    let a = nu + 1.0;
    let mut g = [0.0; 3];
    let mut h = [[0.0; 3]; 3];
    for &x in xs {
        let z = (x - mu) / sigma;
        let z2 = z * z;
        let d = nu + z2;
        let d2 = d * d;
        g[0] += a * z / (sigma * d);
        g[1] += -1.0 / sigma + a * z2 / (sigma * d);
        g[2] +=
            0.5 * t.psi_half_diff - 0.5 / nu - 0.5 * (z2 / nu).ln_1p() + a * z2 / (2.0 * nu * d);
        h[0][0] += -a * (nu - z2) / (sigma * sigma * d2);
        h[0][1] += -2.0 * a * nu * z / (sigma * sigma * d2);
        h[0][2] += z * (z2 - 1.0) / (sigma * d2);
        h[1][1] += 1.0 / (sigma * sigma) - a * z2 * (3.0 * nu + z2) / (sigma * sigma * d2);
        h[1][2] += z2 * (z2 - 1.0) / (sigma * d2);
        h[2][2] += 0.25 * t.trigamma_half_diff + 0.5 / (nu * nu) + z2 / (2.0 * nu * d)
            - z2 * (nu * nu + 2.0 * nu + z2) / (2.0 * nu * nu * d2);
    }
    (h[1][0], h[2][0], h[2][1]) = (h[0][1], h[0][2], h[1][2]);
    (g, h)
}

/// Solves `a x = b` for a small dense system by Gaussian elimination with
/// partial pivoting. `None` if the matrix is numerically singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if !(a[piv][col].abs() > 1e-14 * scale) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (dst, src) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *dst -= f * src;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Moment and quantile based starting point on standardized data.
fn initial_guess(ys: &[f64]) -> [f64; 3] {
    let n = ys.len() as f64;
    let m4 = ys.iter().map(|y| y.powi(4)).sum::<f64>() / n;
    let excess = m4 - 3.0;
    let nu = if excess > 0.0 {
        4.0 + 6.0 / excess
    } else {
        NU_MAX
    };
    let nu = nu.clamp(2.0, NU_MAX);
    let mu = median(ys);
    let abs_dev: Vec<f64> = ys.iter().map(|y| (y - mu).abs()).collect();
    let q75 = StudentT::new(nu)
        .and_then(|d| d.quantile(0.75))
        .unwrap_or(0.6745);
    let sigma = (median(&abs_dev) / q75).max(1e-3);
    [mu, sigma.ln(), nu.ln()]
}

struct Optimum {
    mu: f64,
    sigma: f64,
    nu: f64,
    log_likelihood: f64,
    iterations: usize,
    nu_at_bound: bool,
}

/// Maximizes the t log-likelihood of standardized data.
fn newton_t(ys: &[f64]) -> Result<Optimum> {
    let n = ys.len() as f64;
    let (ln_lo, ln_hi) = (NU_MIN.ln(), NU_MAX.ln());
    let objective = |phi: &[f64; 3]| -log_likelihood(ys, phi[0], phi[1].exp(), phi[2].exp());
    let mut phi = initial_guess(ys);
    let mut f = objective(&phi);
    for iter in 1..=MAX_NEWTON_ITER {
        let (mu, sigma, nu) = (phi[0], phi[1].exp(), phi[2].exp());
        let (g, h) = derivatives(ys, mu, sigma, nu);
        // Chain rule to phi for the negative log-likelihood.
        let jac = [1.0, sigma, nu];
        let grad: Vec<f64> = (0..3).map(|i| -g[i] * jac[i]).collect();
        let mut hess: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| -h[i][j] * jac[i] * jac[j]).collect())
            .collect();
        hess[1][1] -= g[1] * sigma;
        hess[2][2] -= g[2] * nu;

        // Hold nu at a bound when the gradient pushes past it.
        let at_lo = phi[2] <= ln_lo && grad[2] > 0.0;
        let at_hi = phi[2] >= ln_hi && grad[2] < 0.0;
        let free: Vec<usize> = if at_lo || at_hi {
            vec![0, 1]
        } else {
            vec![0, 1, 2]
        };
        let gmax = free.iter().map(|&i| grad[i].abs()).fold(0.0, f64::max);
        if gmax <= 1e-9 * n {
            return Ok(Optimum {
                mu,
                sigma,
                nu,
                log_likelihood: -f,
                iterations: iter - 1,
                nu_at_bound: at_lo || at_hi,
            });
        }

        let diag_scale = free.iter().map(|&i| hess[i][i].abs()).fold(1e-12, f64::max);
        let mut lambda = 0.0;
        let mut accepted = false;
        while lambda < 1e12 * diag_scale {
            let sub: Vec<Vec<f64>> = free
                .iter()
                .map(|&i| {
                    free.iter()
                        .map(|&j| hess[i][j] + if i == j { lambda } else { 0.0 })
                        .collect()
                })
                .collect();
            let rhs: Vec<f64> = free.iter().map(|&i| -grad[i]).collect();
            let slope_ok = solve(sub, rhs.clone())
                .filter(|d| d.iter().zip(&rhs).map(|(a, b)| -a * b).sum::<f64>() < 0.0);
            if let Some(d) = slope_ok {
                let slope: f64 = d.iter().zip(&rhs).map(|(a, b)| -a * b).sum();
                let mut step = 1.0;
                for _ in 0..40 {
                    let mut trial = phi;
                    for (k, &i) in free.iter().enumerate() {
                        trial[i] += step * d[k];
                    }
                    trial[2] = trial[2].clamp(ln_lo, ln_hi);
                    let ft = objective(&trial);
                    if ft.is_finite() && ft <= f + 1e-4 * step * slope {
                        let moved = (0..3)
                            .map(|i| (trial[i] - phi[i]).abs())
                            .fold(0.0, f64::max);
                        phi = trial;
                        let improved = f - ft;
                        f = ft;
                        accepted = true;
                        if moved < 1e-14 || improved <= 1e-15 * f.abs() && moved < 1e-10 {
                            return Ok(Optimum {
                                mu: phi[0],
                                sigma: phi[1].exp(),
                                nu: phi[2].exp(),
                                log_likelihood: -f,
                                iterations: iter,
                                nu_at_bound: phi[2] <= ln_lo || phi[2] >= ln_hi,
                            });
                        }
                        break;
                    }
                    step *= 0.5;
                }
            }
            if accepted {
                break;
            }
            lambda = if lambda == 0.0 {
                1e-3 * diag_scale
            } else {
                lambda * 10.0
            };
        }
        if !accepted {
            return Err(Error::NonConvergence {
                what: "t maximum likelihood (no descent step)",
                iterations: iter,
                last: vec![phi[0], phi[1].exp(), phi[2].exp()],
            });
        }
    }
    Err(Error::NonConvergence {
        what: "t maximum likelihood",
        iterations: MAX_NEWTON_ITER,
        last: vec![phi[0], phi[1].exp(), phi[2].exp()],
    })
}

fn invert(m: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let e = (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
        cols.push(solve(m.clone(), e)?);
    }
    Some(
        (0..n)
            .map(|i| (0..n).map(|j| cols[j][i]).collect())
            .collect(),
    )
}

/// Maximum-likelihood location-scale t fit.
pub fn fit_t(series: &ReturnSeries) -> Result<TFit> {
    series.check_fittable()?;
    let (center, scale) = mean_and_std(&series.returns);
    let ys: Vec<f64> = series
        .returns
        .iter()
        .map(|x| (x - center) / scale)
        .collect();
    let opt = newton_t(&ys)?;

    let (_, h) = derivatives(&ys, opt.mu, opt.sigma, opt.nu);
    let dims = if opt.nu_at_bound { 2 } else { 3 };
    let info: Vec<Vec<f64>> = (0..dims)
        .map(|i| (0..dims).map(|j| -h[i][j]).collect())
        .collect();
    let cov = invert(info).ok_or_else(|| {
        Error::Degenerate("observed information is singular at the t fit".to_string())
    })?;
    let se = |i: usize| cov[i][i].max(0.0).sqrt();

    let n = ys.len() as f64;
    Ok(TFit {
        params: TParams::new(opt.nu, center + scale * opt.mu, scale * opt.sigma)?,
        mu_se: scale * se(0),
        sigma_se: scale * se(1),
        nu_se: (!opt.nu_at_bound).then(|| se(2)),
        // Undo the change of variables: each density picks up 1/scale.
        log_likelihood: opt.log_likelihood - n * scale.ln(),
        iterations: opt.iterations,
    })
}

/// Least-squares fit of the t density to a histogram of the returns, for
/// comparison with the likelihood fit. Minimizes the squared difference
/// between bin densities and the model density at bin centres.
pub fn fit_t_histogram(series: &ReturnSeries, bins: usize) -> Result<TParams> {
    series.check_fittable()?;
    if bins < 5 {
        return Err(Error::domain("bins", bins as f64, "at least 5"));
    }
    let (center, scale) = mean_and_std(&series.returns);
    let ys: Vec<f64> = series
        .returns
        .iter()
        .map(|x| (x - center) / scale)
        .collect();
    let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for y in &ys {
        counts[(((y - lo) / width) as usize).min(bins - 1)] += 1;
    }
    let n = ys.len() as f64;
    let hist: Vec<(f64, f64)> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (lo + (i as f64 + 0.5) * width, c as f64 / (n * width)))
        .collect();
    let loss = |phi: &[f64; 3]| -> f64 {
        let nu = phi[2].exp().clamp(NU_MIN, NU_MAX);
        let sigma = phi[1].exp();
        let Ok(dist) = StudentT::new(nu) else {
            return f64::INFINITY;
        };
        hist.iter()
            .map(|&(x, d)| (d - dist.pdf((x - phi[0]) / sigma) / sigma).powi(2))
            .sum()
    };
    let best = nelder_mead(loss, initial_guess(&ys), 2000);
    TParams::new(
        best[2].exp().clamp(NU_MIN, NU_MAX),
        center + scale * best[0],
        scale * best[1].exp(),
    )
}

/// Plain Nelder-Mead on three parameters.
fn nelder_mead<F: Fn(&[f64; 3]) -> f64>(f: F, start: [f64; 3], max_iter: usize) -> [f64; 3] {
    let mut simplex: Vec<([f64; 3], f64)> = (0..4)
        .map(|k| {
            let mut p = start;
            if k > 0 {
                p[k - 1] += 0.1;
            }
            (p, f(&p))
        })
        .collect();
    let along = |a: &[f64; 3], b: &[f64; 3], t: f64| -> [f64; 3] {
        [
            a[0] + t * (b[0] - a[0]),
            a[1] + t * (b[1] - a[1]),
            a[2] + t * (b[2] - a[2]),
        ]
    };
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (simplex[3].1 - simplex[0].1).abs() <= 1e-14 * (1.0 + simplex[0].1.abs()) {
            break;
        }
        let mut c = [0.0; 3];
        for (p, _) in &simplex[..3] {
            for i in 0..3 {
                c[i] += p[i] / 3.0;
            }
        }
        let worst = simplex[3];
        let refl = along(&c, &worst.0, -1.0);
        let fr = f(&refl);
        if fr < simplex[0].1 {
            let exp = along(&c, &worst.0, -2.0);
            let fe = f(&exp);
            simplex[3] = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (refl, fr);
        } else {
            let con = along(&c, &worst.0, 0.5);
            let fc = f(&con);
            if fc < worst.1 {
                simplex[3] = (con, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    let p = along(&best, &v.0, 0.5);
                    *v = (p, f(&p));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0].0
}

/// `|x_c(q)|` for each tail probability under the normal and the t fit.
pub fn critical_report(fit: &FitResult, q_levels: &[f64]) -> Result<Vec<CriticalValue>> {
    critical_values(&fit.normal, &fit.student_t.params, q_levels)
}

fn critical_values(
    normal: &NormalFit,
    t: &TParams,
    q_levels: &[f64],
) -> Result<Vec<CriticalValue>> {
    q_levels
        .iter()
        .map(|&q| {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::domain("q", q, "0 < q < 1"));
            }
            Ok(CriticalValue {
                q,
                normal: (normal.mu + normal.sigma * normal_quantile(q)?).abs(),
                student_t: t.quantile(q)?.abs(),
            })
        })
        .collect()
}

/// Fits both distributions and tabulates critical values.
pub fn fit_series(series: &ReturnSeries, q_levels: &[f64]) -> Result<FitResult> {
    let normal = fit_normal(series)?;
    let student_t = fit_t(series)?;
    let (sample_mean, sample_std) = mean_and_std(&series.returns);
    Ok(FitResult {
        label: series.label.clone(),
        count: series.len(),
        sample_mean,
        sample_std,
        critical_values: critical_values(&normal, &student_t.params, q_levels)?,
        normal,
        student_t,
    })
}

/// `P{xi > t}` under t(nu) relative to the same tail of the unit normal.
pub fn tail_mass_ratio(nu: f64, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::domain("threshold", threshold, "0 < threshold < inf"));
    }
    let t_tail = StudentT::new(nu)?.sf(threshold);
    Ok(t_tail / normal_sf(threshold))
}

/// Reads a series from CSV. A `return` column is used as is; otherwise a
/// `close` column is read as prices and converted to log returns.
pub fn parse_series<R: Read>(reader: R, label: &str) -> Result<ReturnSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (column, is_price) = match (find("return"), find("close")) {
        (Some(c), _) => (c, false),
        (None, Some(c)) => (c, true),
        _ => {
            return Err(Error::InvalidData(
                "CSV header needs a 'return' column or a 'date,close' layout".to_string(),
            ))
        }
    };
    let mut values = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let field = record.get(column).unwrap_or("");
        let v: f64 = field.parse().map_err(|_| {
            Error::InvalidData(format!("row {}: '{}' is not a number", i + 2, field))
        })?;
        values.push(v);
    }
    let mut series = if is_price {
        log_returns(&values)?
    } else {
        ReturnSeries::new(values, "")?
    };
    series.label = label.to_string();
    Ok(series)
}

pub fn read_series(path: &Path) -> Result<ReturnSeries> {
    let file =
        std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_series(std::io::BufReader::new(file), &label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::sample_t;

    fn synthetic(n: usize, seed: u64) -> ReturnSeries {
        let params = TParams::new(3.0, 4e-4, 0.0116).unwrap();
        ReturnSeries::new(sample_t(&params, n, seed).unwrap(), "synthetic").unwrap()
    }

    #[test]
    fn log_return_examples() {
        assert_eq!(log_returns(&[100.0, 100.0]).unwrap().returns, vec![0.0]);
        assert!((log_returns(&[100.0, 110.0]).unwrap().returns[0] - 0.0953101798).abs() < 1e-9);
        let e = std::f64::consts::E;
        let r = log_returns(&[1.0, e, e * e]).unwrap().returns;
        assert!((r[0] - 1.0).abs() < 1e-15 && (r[1] - 1.0).abs() < 1e-15);
        assert!(log_returns(&[1.0, 0.0]).is_err());
        assert!(log_returns(&[1.0]).is_err());
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let xs: Vec<f64> = synthetic(200, 3)
            .returns
            .iter()
            .map(|x| x / 0.0116)
            .collect();
        let theta = [0.05, 0.9, 3.7];
        let (g, h) = derivatives(&xs, theta[0], theta[1], theta[2]);
        let ll = |t: [f64; 3]| log_likelihood(&xs, t[0], t[1], t[2]);
        let grad_at = |t: [f64; 3]| derivatives(&xs, t[0], t[1], t[2]).0;
        for i in 0..3 {
            let step = 1e-5 * theta[i].abs().max(1.0);
            let mut up = theta;
            let mut dn = theta;
            up[i] += step;
            dn[i] -= step;
            let fd = (ll(up) - ll(dn)) / (2.0 * step);
            assert!(
                (fd - g[i]).abs() < 1e-5 * (1.0 + g[i].abs()),
                "g[{i}] {fd} vs {}",
                g[i]
            );
            let (gu, gd) = (grad_at(up), grad_at(dn));
            for j in 0..3 {
                let fd = (gu[j] - gd[j]) / (2.0 * step);
                assert!(
                    (fd - h[j][i]).abs() < 1e-5 * (1.0 + h[j][i].abs()),
                    "h[{j}][{i}] {fd} vs {}",
                    h[j][i]
                );
            }
        }
    }

    #[test]
    fn recovers_synthetic_parameters() {
        let series = synthetic(20_000, 42);
        let fit = fit_t(&series).unwrap();
        let p = fit.params;
        assert!((p.nu - 3.0).abs() <= 0.45, "nu {}", p.nu);
        assert!(
            (p.mu - 4e-4).abs() <= 3.0 * fit.mu_se,
            "mu {} se {}",
            p.mu,
            fit.mu_se
        );
        assert!(
            (p.sigma - 0.0116).abs() <= 3.0 * fit.sigma_se,
            "sigma {}",
            p.sigma
        );
        assert!(fit.nu_se.unwrap() > 0.0);
    }

    #[test]
    fn optimum_beats_true_parameters() {
        let series = synthetic(5_000, 9);
        let fit = fit_t(&series).unwrap();
        let truth = TParams::new(3.0, 4e-4, 0.0116).unwrap();
        let n = series.len() as f64;
        assert!(
            t_neg_log_likelihood(&series, &fit.params)
                <= t_neg_log_likelihood(&series, &truth) + 1e-6 * n
        );
        assert!(
            (-t_neg_log_likelihood(&series, &fit.params) - fit.log_likelihood).abs() < 1e-6 * n
        );
    }

    #[test]
    fn scale_equivariance() {
        let series = synthetic(3_000, 5);
        let scaled =
            ReturnSeries::new(series.returns.iter().map(|x| 7.5 * x).collect(), "s").unwrap();
        let a = fit_t(&series).unwrap().params;
        let b = fit_t(&scaled).unwrap().params;
        assert!((b.sigma / a.sigma - 7.5).abs() < 1e-6 * 7.5);
        assert!((b.nu - a.nu).abs() < 1e-6);
    }

    #[test]
    fn normal_data_pushes_nu_up() {
        let params = TParams::new(f64::INFINITY, 0.0, 1.0).unwrap();
        let series = ReturnSeries::new(sample_t(&params, 20_000, 1).unwrap(), "n").unwrap();
        let fit = fit_t(&series).unwrap();
        assert!(fit.params.nu > 20.0, "{}", fit.params.nu);
    }

    #[test]
    fn normal_fit_on_large_sample() {
        let params = TParams::new(f64::INFINITY, 0.0, 1.0).unwrap();
        let series = ReturnSeries::new(sample_t(&params, 1_000_000, 2).unwrap(), "n").unwrap();
        let fit = fit_normal(&series).unwrap();
        assert!(fit.mu.abs() < 5.0 * fit.mu_se);
        assert!((fit.sigma - 1.0).abs() < 5.0 * fit.sigma_se);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let s = ReturnSeries::new(vec![0.01; 100], "c").unwrap();
        assert!(matches!(fit_t(&s), Err(Error::Degenerate(_))));
        assert!(matches!(fit_normal(&s), Err(Error::Degenerate(_))));
        let two = log_returns(&[5.0, 5.0]).unwrap();
        assert!(matches!(fit_normal(&two), Err(Error::Degenerate(_))));
    }

    #[test]
    fn report_pattern() {
        let fit = fit_series(&synthetic(20_000, 4), &DEFAULT_Q_LEVELS).unwrap();
        let cv = &fit.critical_values;
        for w in cv.windows(2) {
            assert!(w[0].student_t > w[1].student_t && w[0].normal > w[1].normal);
        }
        for c in cv {
            assert!(c.student_t > c.normal, "{c:?}");
        }
        let centered = FitResult {
            normal: NormalFit {
                mu: 0.0,
                ..fit.normal
            },
            student_t: TFit {
                params: TParams {
                    mu: 0.0,
                    ..fit.student_t.params
                },
                ..fit.student_t
            },
            ..fit.clone()
        };
        let med = critical_report(&centered, &[0.5]).unwrap()[0];
        assert!(med.normal.abs() < 1e-15 && med.student_t.abs() < 1e-12);
        assert!(critical_report(&fit, &[1.0]).is_err());
    }

    #[test]
    fn tail_ratios() {
        for nu in [3.0, 5.0] {
            assert!(tail_mass_ratio(nu, 10.0).unwrap() >= 1e18);
        }
        assert!((tail_mass_ratio(3.0, 1e-9).unwrap() - 1.0).abs() < 1e-6);
        assert!((tail_mass_ratio(1e6, 10.0).unwrap() - 1.0).abs() < 0.01);
        assert!(tail_mass_ratio(3.0, 0.0).is_err());
    }

    #[test]
    fn csv_layouts_agree() {
        let prices = [100.0, 101.0, 99.5, 102.25];
        let price_csv =
            "date,close\n2020-01-01,100\n2020-01-02,101\n2020-01-03,99.5\n2020-01-06,102.25\n";
        let a = parse_series(price_csv.as_bytes(), "x").unwrap();
        let mut ret_csv = String::from("return\n");
        for r in log_returns(&prices).unwrap().returns {
            ret_csv.push_str(&format!("{r:e}\n"));
        }
        let b = parse_series(ret_csv.as_bytes(), "x").unwrap();
        assert_eq!(a.returns, b.returns);
        assert!(parse_series("foo\n1\n".as_bytes(), "x").is_err());
        assert!(parse_series("return\nabc\n".as_bytes(), "x").is_err());
    }

    #[test]
    fn histogram_fit_is_in_the_neighbourhood() {
        let p = fit_t_histogram(&synthetic(20_000, 8), 80).unwrap();
        assert!(p.nu > 1.5 && p.nu < 6.0, "{p:?}");
        assert!((p.sigma / 0.0116 - 1.0).abs() < 0.25, "{p:?}");
    }
}
