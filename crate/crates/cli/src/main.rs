use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

use commands::CliError;

/// Option pricing under a log Student's t-distribution of returns.
///
/// Exit codes: 0 success, 2 invalid flags or input data, 3 numerical
/// failure or a failed check.
#[derive(Debug, Parser)]
#[command(name = "gosset", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Price one European option and print a JSON quote.
    #[command(
        allow_negative_numbers = true,
        after_help = "JSON keys: c0_or_p0, price_at_expiry, a_t, z, denominator, \
x_c (null when infinite), p, lower_limit, model. Currency values are rounded to 6 decimals."
    )]
    Price {
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = KindArg::Call)]
        kind: KindArg,
    },
    /// Print a critical-value table as CSV.
    #[command(
        allow_negative_numbers = true,
        after_help = "Table 2: p, then x_c and exp(sigma_t x_c) for each nu (default nu 5 and inf, \
sigma_t 0.4). Table 3: one row per nu, one x_c column per p."
    )]
    Tables {
        /// Table to produce: 2 (critical values and growth) or 3 (critical-value matrix).
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
        which: u8,
        /// Horizon volatility used for the growth columns of table 2.
        #[arg(long = "sigma-t", default_value_t = 0.4)]
        sigma_t: f64,
        /// Comma-separated degrees of freedom; `inf` for the normal.
        #[arg(long = "nu-list", value_delimiter = ',')]
        nu_list: Option<Vec<f64>>,
        /// Comma-separated confidence levels.
        #[arg(long = "p-list", value_delimiter = ',')]
        p_list: Option<Vec<f64>>,
    },
    /// Print the data behind the price-difference and price-curve figures as CSV.
    #[command(
        allow_negative_numbers = true,
        after_help = "Figures 4/5: Gosset - Black-Scholes call price vs nu (capped/truncated), \
one column per p. Figures 6/7: the same vs p, one column per nu. Figures 8/9: call and put \
prices vs s0 for each nu (capped/truncated) and Black-Scholes."
    )]
    Sweep {
        /// Figure number, 4 to 9.
        #[arg(long, value_parser = clap::value_parser!(u8).range(4..=9))]
        figure: u8,
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long = "nu-list", value_delimiter = ',')]
        nu_list: Option<Vec<f64>>,
        #[arg(long = "p-list", value_delimiter = ',')]
        p_list: Option<Vec<f64>>,
        /// Spot prices for figures 8 and 9 (default 25 to 75 in steps of 1).
        #[arg(long = "s0-list", value_delimiter = ',')]
        s0_list: Option<Vec<f64>>,
        /// Confidence level for figures 8 and 9.
        #[arg(long, default_value_t = 0.999)]
        p: f64,
    },
    /// Fit normal and Student's t distributions to a return series.
    #[command(
        allow_negative_numbers = true,
        after_help = "Input CSV needs either a `return` column or a `date,close` price layout. \
JSON keys: label, count, sample_mean, sample_std, normal {mu, sigma, mu_se, sigma_se}, \
student_t {params {nu, mu, sigma}, mu_se, sigma_se, nu_se, log_likelihood, iterations}, \
critical_values [{q, normal, student_t}], histogram_t."
    )]
    Fit {
        /// CSV file with returns or closing prices
        #[arg(long)]
        input: PathBuf,
        /// Tail probabilities for the critical-value rows.
        #[arg(long = "q-levels", value_delimiter = ',', default_values_t = [1e-4, 1e-3, 1e-2])]
        q_levels: Vec<f64>,
        /// Also fit the t density to a histogram with this many bins.
        #[arg(long = "histogram-bins")]
        histogram_bins: Option<usize>,
    },
    /// Check put-call parity for one model.
    #[command(
        allow_negative_numbers = true,
        after_help = "JSON keys: model, c0, p0, gap, tolerance, pass."
    )]
    Parity {
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Compare the quadrature price with a seeded Monte Carlo estimate.
    #[command(
        name = "mc-check",
        allow_negative_numbers = true,
        after_help = "JSON keys: model, kind, quadrature, mc_mean, std_error, \
z_score, samples, seed, pass (|z_score| <= 3)."
    )]
    McCheck {
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = KindArg::Call)]
        kind: KindArg,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 20_260_101)]
        seed: u64,
    },
}

/// Market inputs; defaults are the worked example (50, 49, 3%, 0.3, 1y).
#[derive(Debug, Args)]
struct MarketArgs {
    #[arg(long, default_value_t = 50.0)]
    s0: f64,
    #[arg(long, default_value_t = 49.0)]
    strike: f64,
    #[arg(long, default_value_t = 0.03)]
    rate: f64,
    /// Annualized volatility; alternative to --sigma-t.
    #[arg(long, conflicts_with = "sigma_t")]
    sigma: Option<f64>,
    /// Horizon volatility sigma sqrt(T) (default 0.3).
    #[arg(long = "sigma-t")]
    sigma_t: Option<f64>,
    /// Years to expiry.
    #[arg(long, default_value_t = 1.0)]
    tenor: f64,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Capped)]
    mode: ModeArg,
    /// Degrees of freedom; `inf` selects the normal.
    #[arg(long)]
    nu: Option<f64>,
    /// Confidence level P{xi <= x_c}.
    #[arg(long, conflicts_with = "xc")]
    p: Option<f64>,
    /// Critical value x_c.
    #[arg(long)]
    xc: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Capped,
    Truncated,
    BlackScholes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Call,
    Put,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Price {
            market,
            model,
            kind,
        } => commands::price(&market, &model, kind),
        Command::Tables {
            which,
            sigma_t,
            nu_list,
            p_list,
        } => commands::tables(which, sigma_t, nu_list, p_list),
        Command::Sweep {
            figure,
            market,
            nu_list,
            p_list,
            s0_list,
            p,
        } => commands::sweep(figure, &market, nu_list, p_list, s0_list, p),
        Command::Fit {
            input,
            q_levels,
            histogram_bins,
        } => commands::fit(&input, &q_levels, histogram_bins),
        Command::Parity { market, model } => commands::parity(&market, &model),
        Command::McCheck {
            market,
            model,
            kind,
            samples,
            seed,
        } => commands::mc_check(&market, &model, kind, samples, seed),
    };
    match result {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(CliError::CheckFailed(output)) => {
            print!("{output}");
            eprintln!("error: check failed");
            ExitCode::from(3)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
