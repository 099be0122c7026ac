use thiserror::Error;

use crate::rational::Rational;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("word is trivial in F2; no tree end exists")]
    EmptyPeriod,

    #[error("parameter {value} outside [0, {max}]")]
    OutOfRange { value: String, max: String },

    #[error("group element has a bounded orbit; no boundary limit")]
    NoLimit,

    #[error("unsupported action spec: {0}")]
    UnsupportedSpec(String),

    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    #[error("orbit sequence does not converge (direction unstable at radius {radius})")]
    NotConvergent { radius: String },

    #[error("image sequence is not Cauchy at r = {r} (i = {i}, j = {j})")]
    NotCauchy { r: f64, i: usize, j: usize },

    #[error("no orbit point within N = {n} of the ray point at i = {index}")]
    NoCover { n: String, index: usize },

    #[error("analytic cross-check failed: sequence gave {sequence}, orbit limit gave {analytic}")]
    CrosscheckMismatch { sequence: String, analytic: String },

    #[error("probe failure: {0}")]
    ProbeFailure(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn out_of_range(value: &Rational, max: &Rational) -> Self {
        Error::OutOfRange {
            value: crate::rational::fmt_rational(value),
            max: crate::rational::fmt_rational(max),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
