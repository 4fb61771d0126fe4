//! Subcommand implementations. Each returns the full text to print, so that
//! nothing is written unless the whole computation succeeded.

use std::fmt::Write as _;
use std::path::Path;

use gosset_core::calibration::{fit_t_histogram, DEFAULT_Q_LEVELS};
use gosset_core::{
    black_scholes, fit_series, gosset_price, mc_price, parity_gap, read_series, resolve_policy,
    t_quantile, Error, FitResult, MarketParams, McConfig, OptionKind, Quote, ResolvedPolicy,
    TParams, TailBound, TailMode, TailPolicy,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::{KindArg, MarketArgs, ModeArg, ModelArgs};

const PARITY_TOLERANCE: f64 = 1e-6;
const Z_LIMIT: f64 = 3.0;
const DEFAULT_SIGMA_T: f64 = 0.3;

#[derive(Debug)]
pub enum CliError {
    /// Bad flag value or unusable input data.
    Usage(String),
    /// A numerical routine failed.
    Numerical(String),
    /// The report was produced but the check it performs did not pass.
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) | CliError::CheckFailed(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) | CliError::CheckFailed(m) => {
                f.write_str(m)
            }
        }
    }
}

/// Flag that supplied a value the core library rejected.
fn flag_for(name: &str) -> Option<&'static str> {
    Some(match name {
        "s0" => "--s0",
        "strike" => "--strike",
        "rate" => "--rate",
        "sigma" | "sigma_t" => "--sigma/--sigma-t",
        "tenor" => "--tenor",
        "nu" => "--nu",
        "p" => "--p",
        "x_c" | "sigma_t * x_c" => "--p/--xc",
        "q" => "--q-levels",
        "bins" => "--histogram-bins",
        "samples" => "--samples",
        _ => return None,
    })
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = match &e {
            Error::Domain { name, .. } => match flag_for(name) {
                Some(flag) => format!("{flag}: {e}"),
                None => e.to_string(),
            },
            Error::StrikeAboveTruncation { .. } => format!("--strike: {e}"),
            _ => e.to_string(),
        };
        if e.is_input_error() {
            CliError::Usage(message)
        } else {
            CliError::Numerical(message)
        }
    }
}

fn usage(flag: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{flag}: {message}"))
}

fn positive(flag: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(
            flag,
            format_args!("must be positive and finite (got {v})"),
        ))
    }
}

fn finite(flag: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(usage(flag, format_args!("must be finite (got {v})")))
    }
}

fn confidence(flag: &str, p: f64) -> Result<f64, CliError> {
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(usage(
            flag,
            format_args!("must lie strictly between 0 and 1 (got {p})"),
        ))
    }
}

fn degrees_of_freedom(flag: &str, nu: f64) -> Result<f64, CliError> {
    if nu > 0.0 {
        Ok(nu)
    } else {
        Err(usage(
            flag,
            format_args!("must be positive or inf (got {nu})"),
        ))
    }
}

impl MarketArgs {
    fn validated(&self) -> Result<MarketParams, CliError> {
        positive("--s0", self.s0)?;
        positive("--strike", self.strike)?;
        finite("--rate", self.rate)?;
        positive("--tenor", self.tenor)?;
        let sigma_t = match (self.sigma, self.sigma_t) {
            (Some(s), _) => positive("--sigma", s)? * self.tenor.sqrt(),
            (None, Some(st)) => positive("--sigma-t", st)?,
            (None, None) => DEFAULT_SIGMA_T,
        };
        Ok(MarketParams::with_horizon_volatility(
            self.s0,
            self.strike,
            self.rate,
            sigma_t,
            self.tenor,
        )?)
    }

    fn with_s0(&self, s0: f64) -> Result<MarketParams, CliError> {
        let mut m = self.validated()?;
        m.s0 = positive("--s0-list", s0)?;
        Ok(m)
    }
}

/// A validated model choice.
enum Model {
    BlackScholes,
    Gosset { nu: f64, policy: ResolvedPolicy },
}

impl ModelArgs {
    fn validated(&self) -> Result<Model, CliError> {
        let mode = match self.mode {
            ModeArg::BlackScholes => {
                for (flag, given) in [
                    ("--nu", self.nu.is_some()),
                    ("--p", self.p.is_some()),
                    ("--xc", self.xc.is_some()),
                ] {
                    if given {
                        return Err(usage(flag, "is not used with --mode black-scholes"));
                    }
                }
                return Ok(Model::BlackScholes);
            }
            ModeArg::Capped => TailMode::Capped,
            ModeArg::Truncated => TailMode::Truncated,
        };
        let nu = degrees_of_freedom(
            "--nu",
            self.nu
                .ok_or_else(|| usage("--nu", "is required for Gosset modes"))?,
        )?;
        let bound = match (self.p, self.xc) {
            (Some(p), None) => TailBound::Confidence(confidence("--p", p)?),
            (None, Some(xc)) => TailBound::CriticalValue(finite("--xc", xc)?),
            _ => {
                return Err(usage(
                    "--p/--xc",
                    "exactly one of --p or --xc is required for Gosset modes",
                ))
            }
        };
        let policy = resolve_policy(TailPolicy::new(mode, bound), nu)?;
        Ok(Model::Gosset { nu, policy })
    }
}

fn kind_of(kind: KindArg) -> OptionKind {
    match kind {
        KindArg::Call => OptionKind::Call,
        KindArg::Put => OptionKind::Put,
    }
}

fn quote(market: &MarketParams, model: &Model, kind: OptionKind) -> Result<Quote, CliError> {
    Ok(match model {
        Model::BlackScholes => black_scholes(market, kind)?,
        Model::Gosset { nu, policy } => gosset_price(market, *nu, policy, kind)?,
    })
}

fn money(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn all_finite(values: &[f64]) -> Result<(), CliError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CliError::Numerical(
            "computation produced a non-finite value".into(),
        ))
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct PriceReport {
    c0_or_p0: f64,
    price_at_expiry: f64,
    a_t: f64,
    z: f64,
    denominator: f64,
    x_c: Option<f64>,
    p: f64,
    lower_limit: f64,
    model: &'static str,
}

pub fn price(market: &MarketArgs, model: &ModelArgs, kind: KindArg) -> Result<String, CliError> {
    let market = market.validated()?;
    let model = model.validated()?;
    let q = quote(&market, &model, kind_of(kind))?;
    let s = q.scale;
    all_finite(&[
        q.price_now,
        q.price_at_expiry,
        s.a_t,
        s.z,
        s.denominator,
        s.p,
        q.lower_limit,
    ])?;
    to_json(&PriceReport {
        c0_or_p0: money(q.price_now),
        price_at_expiry: money(q.price_at_expiry),
        a_t: money(s.a_t),
        z: s.z,
        denominator: s.denominator,
        x_c: s.x_c.is_finite().then_some(s.x_c),
        p: s.p,
        lower_limit: q.lower_limit,
        model: q.model.name(),
    })
}

fn nu_label(nu: f64) -> String {
    if nu.is_infinite() {
        "inf".to_string()
    } else {
        format!("{nu}")
    }
}

fn csv_row(first: &str, values: &[f64]) -> Result<String, CliError> {
    all_finite(values)?;
    let mut row = first.to_string();
    for v in values {
        let _ = write!(row, ",{v:.6}");
    }
    row.push('\n');
    Ok(row)
}

fn check_nu_list(nus: &[f64]) -> Result<(), CliError> {
    for &nu in nus {
        degrees_of_freedom("--nu-list", nu)?;
    }
    Ok(())
}

fn check_p_list(ps: &[f64]) -> Result<(), CliError> {
    for &p in ps {
        confidence("--p-list", p)?;
    }
    Ok(())
}

const TABLE_P: [f64; 6] = [0.9, 0.95, 0.99, 0.995, 0.999, 0.9999];
const MATRIX_P: [f64; 5] = [0.9, 0.95, 0.99, 0.999, 0.9999];
const MATRIX_NU: [f64; 5] = [3.0, 4.0, 6.0, 40.0, f64::INFINITY];

pub fn tables(
    which: u8,
    sigma_t: f64,
    nu_list: Option<Vec<f64>>,
    p_list: Option<Vec<f64>>,
) -> Result<String, CliError> {
    positive("--sigma-t", sigma_t)?;
    if let Some(nus) = &nu_list {
        check_nu_list(nus)?;
    }
    if let Some(ps) = &p_list {
        check_p_list(ps)?;
    }
    let mut out = String::new();
    if which == 2 {
        let nus = nu_list.unwrap_or_else(|| vec![5.0, f64::INFINITY]);
        let ps = p_list.unwrap_or_else(|| TABLE_P.to_vec());
        out.push('p');
        for nu in &nus {
            let l = nu_label(*nu);
            let _ = write!(out, ",x_c_nu{l},growth_nu{l}");
        }
        out.push('\n');
        for p in ps {
            let mut values = Vec::new();
            for &nu in &nus {
                let x = t_quantile(p, nu)?;
                values.extend([x, (sigma_t * x).exp()]);
            }
            out.push_str(&csv_row(&format!("{p}"), &values)?);
        }
    } else {
        let nus = nu_list.unwrap_or_else(|| MATRIX_NU.to_vec());
        let ps = p_list.unwrap_or_else(|| MATRIX_P.to_vec());
        out.push_str("nu");
        for p in &ps {
            let _ = write!(out, ",p{p}");
        }
        out.push('\n');
        for nu in nus {
            let values = ps
                .iter()
                .map(|&p| t_quantile(p, nu))
                .collect::<Result<Vec<_>, _>>()?;
            out.push_str(&csv_row(&nu_label(nu), &values)?);
        }
    }
    Ok(out)
}

const SWEEP_P: [f64; 3] = [0.99, 0.999, 0.9999];
const SWEEP_NU: [f64; 3] = [3.0, 5.0, 40.0];
const CURVE_NU: [f64; 2] = [3.0, 5.0];

fn default_nu_grid() -> Vec<f64> {
    let mut nus: Vec<f64> = (4..=20).map(|k| k as f64 * 0.5).collect();
    nus.extend([12.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0]);
    nus
}

fn default_p_grid() -> Vec<f64> {
    vec![
        0.9, 0.95, 0.975, 0.99, 0.995, 0.999, 0.9995, 0.9999, 0.99995, 0.99999,
    ]
}

fn gosset_call_diff(
    market: &MarketParams,
    mode: TailMode,
    nu: f64,
    p: f64,
    bs: f64,
) -> Result<f64, CliError> {
    let policy = resolve_policy(TailPolicy::new(mode, TailBound::Confidence(p)), nu)?;
    Ok(gosset_price(market, nu, &policy, OptionKind::Call)?.price_now - bs)
}

pub fn sweep(
    figure: u8,
    market: &MarketArgs,
    nu_list: Option<Vec<f64>>,
    p_list: Option<Vec<f64>>,
    s0_list: Option<Vec<f64>>,
    p: f64,
) -> Result<String, CliError> {
    let base = market.validated()?;
    if let Some(nus) = &nu_list {
        check_nu_list(nus)?;
    }
    if let Some(ps) = &p_list {
        check_p_list(ps)?;
    }
    confidence("--p", p)?;
    if let Some(s0s) = &s0_list {
        for &s in s0s {
            positive("--s0-list", s)?;
        }
    }
    let mode = if figure % 2 == 0 {
        TailMode::Capped
    } else {
        TailMode::Truncated
    };
    let bs_call = black_scholes(&base, OptionKind::Call)?.price_now;

    let (header, rows): (String, Vec<Result<String, CliError>>) = match figure {
        4 | 5 => {
            let nus = nu_list.unwrap_or_else(default_nu_grid);
            let ps = p_list.unwrap_or_else(|| SWEEP_P.to_vec());
            let header = std::iter::once("nu".to_string())
                .chain(ps.iter().map(|p| format!("diff_p{p}")))
                .collect::<Vec<_>>()
                .join(",");
            let rows = nus
                .par_iter()
                .map(|&nu| {
                    let values = ps
                        .iter()
                        .map(|&p| gosset_call_diff(&base, mode, nu, p, bs_call))
                        .collect::<Result<Vec<_>, _>>()?;
                    csv_row(&nu_label(nu), &values)
                })
                .collect();
            (header, rows)
        }
        6 | 7 => {
            let nus = nu_list.unwrap_or_else(|| SWEEP_NU.to_vec());
            let ps = p_list.unwrap_or_else(default_p_grid);
            let header = std::iter::once("p".to_string())
                .chain(nus.iter().map(|nu| format!("diff_nu{}", nu_label(*nu))))
                .collect::<Vec<_>>()
                .join(",");
            let rows = ps
                .par_iter()
                .map(|&p| {
                    let values = nus
                        .iter()
                        .map(|&nu| gosset_call_diff(&base, mode, nu, p, bs_call))
                        .collect::<Result<Vec<_>, _>>()?;
                    csv_row(&format!("{p}"), &values)
                })
                .collect();
            (header, rows)
        }
        _ => {
            let nus = nu_list.unwrap_or_else(|| CURVE_NU.to_vec());
            let s0s = s0_list.unwrap_or_else(|| (25..=75).map(f64::from).collect());
            let policies = nus
                .iter()
                .map(|&nu| {
                    Ok((
                        nu,
                        resolve_policy(TailPolicy::new(mode, TailBound::Confidence(p)), nu)?,
                    ))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let mut header = String::from("s0");
            for nu in &nus {
                let l = nu_label(*nu);
                let _ = write!(header, ",call_nu{l},put_nu{l}");
            }
            header.push_str(",call_bs,put_bs");
            let rows = s0s
                .par_iter()
                .map(|&s0| {
                    let m = market.with_s0(s0)?;
                    let mut values = Vec::new();
                    for (nu, policy) in &policies {
                        for kind in [OptionKind::Call, OptionKind::Put] {
                            values.push(gosset_price(&m, *nu, policy, kind)?.price_now);
                        }
                    }
                    for kind in [OptionKind::Call, OptionKind::Put] {
                        values.push(black_scholes(&m, kind)?.price_now);
                    }
                    csv_row(&format!("{s0}"), &values)
                })
                .collect();
            (header, rows)
        }
    };
    let mut out = header;
    out.push('\n');
    for row in rows {
        out.push_str(&row?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct FitReport {
    #[serde(flatten)]
    result: FitResult,
    histogram_t: Option<TParams>,
}

pub fn fit(
    input: &Path,
    q_levels: &[f64],
    histogram_bins: Option<usize>,
) -> Result<String, CliError> {
    for &q in q_levels {
        confidence("--q-levels", q)?;
    }
    if let Some(bins) = histogram_bins {
        if bins < 5 {
            return Err(usage(
                "--histogram-bins",
                format_args!("must be at least 5 (got {bins})"),
            ));
        }
    }
    let series = read_series(input).map_err(|e| match e {
        Error::Io(m) => usage("--input", m),
        other => CliError::from(other),
    })?;
    let q_levels = if q_levels.is_empty() {
        &DEFAULT_Q_LEVELS[..]
    } else {
        q_levels
    };
    let result = fit_series(&series, q_levels)?;
    let histogram_t = histogram_bins
        .map(|bins| fit_t_histogram(&series, bins))
        .transpose()?;
    to_json(&FitReport {
        result,
        histogram_t,
    })
}

#[derive(Serialize)]
struct ParityReport {
    model: &'static str,
    c0: f64,
    p0: f64,
    gap: f64,
    tolerance: f64,
    pass: bool,
}

pub fn parity(market: &MarketArgs, model: &ModelArgs) -> Result<String, CliError> {
    let market = market.validated()?;
    let model = model.validated()?;
    let call = quote(&market, &model, OptionKind::Call)?;
    let put = quote(&market, &model, OptionKind::Put)?;
    let gap = parity_gap(&call, &put, &market)?;
    all_finite(&[call.price_now, put.price_now, gap])?;
    let report = ParityReport {
        model: call.model.name(),
        c0: call.price_now,
        p0: put.price_now,
        gap,
        tolerance: PARITY_TOLERANCE,
        pass: gap.abs() < PARITY_TOLERANCE,
    };
    let text = to_json(&report)?;
    if report.pass {
        Ok(text)
    } else {
        Err(CliError::CheckFailed(text))
    }
}

#[derive(Serialize)]
struct McReport {
    model: &'static str,
    kind: OptionKind,
    quadrature: f64,
    mc_mean: f64,
    std_error: f64,
    z_score: f64,
    samples: u64,
    seed: u64,
    pass: bool,
}

pub fn mc_check(
    market: &MarketArgs,
    model: &ModelArgs,
    kind: KindArg,
    samples: u64,
    seed: u64,
) -> Result<String, CliError> {
    let market = market.validated()?;
    if samples < 2 {
        return Err(usage(
            "--samples",
            format_args!("must be at least 2 (got {samples})"),
        ));
    }
    let Model::Gosset { nu, policy } = model.validated()? else {
        return Err(usage("--mode", "mc-check needs --mode capped or truncated"));
    };
    let kind = kind_of(kind);
    let q = gosset_price(&market, nu, &policy, kind)?;
    let mc = mc_price(&market, nu, &policy, kind, McConfig::new(samples, seed))?;
    let diff = mc.mean - q.price_now;
    let z = if mc.std_error > 0.0 {
        diff / mc.std_error
    } else if diff == 0.0 {
        0.0
    } else {
        return Err(CliError::Numerical(
            "Monte Carlo standard error is zero".into(),
        ));
    };
    all_finite(&[q.price_now, mc.mean, mc.std_error, z])?;
    let report = McReport {
        model: q.model.name(),
        kind,
        quadrature: q.price_now,
        mc_mean: mc.mean,
        std_error: mc.std_error,
        z_score: z,
        samples,
        seed,
        pass: z.abs() <= Z_LIMIT,
    };
    let text = to_json(&report)?;
    if report.pass {
        Ok(text)
    } else {
        Err(CliError::CheckFailed(text))
    }
}
