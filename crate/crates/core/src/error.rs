use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the function it was passed to.
    #[error("{name} = {value} is outside the valid domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("integrand returned a non-finite value {value} at x = {at}")]
    NonFiniteIntegrand { at: f64, value: f64 },

    /// The adaptive integrator ran out of budget. The best estimate is kept.
    #[error(
        "quadrature did not converge after {evaluations} evaluations \
         (estimate {estimate}, error estimate {abs_error_estimate})"
    )]
    Quadrature {
        estimate: f64,
        abs_error_estimate: f64,
        evaluations: usize,
    },

    #[error("{what} failed to converge after {iterations} iterations")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        last: Vec<f64>,
    },

    #[error("tail policy was resolved for nu = {resolved}, but priced with nu = {requested}")]
    PolicyMismatch { resolved: f64, requested: f64 },

    #[error(
        "strike lies above the truncation point (lower limit {lower_limit} >= x_c {x_c}); \
         a truncated put is undefined there"
    )]
    StrikeAboveTruncation { lower_limit: f64, x_c: f64 },

    #[error("quotes are not comparable: {0}")]
    QuoteMismatch(&'static str),

    #[error("degenerate series: {0}")]
    Degenerate(String),

    #[error("series has {len} observations, at least {min} are required")]
    InsufficientData { len: usize, min: usize },

    #[error("invalid input data: {0}")]
    InvalidData(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }

    /// True for errors caused by the caller's input rather than by a
    /// numerical routine giving up.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::PolicyMismatch { .. }
                | Error::StrikeAboveTruncation { .. }
                | Error::QuoteMismatch(_)
                | Error::Degenerate(_)
                | Error::InsufficientData { .. }
                | Error::InvalidData(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
            _ => Error::InvalidData(e.to_string()),
        }
    }
}
