//! Error type shared across the crate.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// Invalid grid construction or a grid mismatch between operands.
    Grid(String),
    /// A sampled or computed quantity is NaN/inf, with its location.
    NonFinite {
        what: &'static str,
        i: usize,
        j: usize,
    },
    /// Layer geometry invalid for the domain or unresolved by the grid.
    Layer(String),
    /// Iterative solver failed; carries the relative-residual history.
    Solver {
        message: String,
        residual_history: Vec<f64>,
    },
    /// A structural identity that must hold by construction was violated.
    Identity {
        what: &'static str,
        left: f64,
        right: f64,
        tol: f64,
    },
    /// Backtracking line search could not find a decrease.
    LineSearch { halvings: usize },
    /// Invalid parameter value.
    Param(String),
    Io(std::io::Error),
    /// Malformed file content (field dumps, configs).
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Grid(msg) => write!(f, "grid error: {msg}"),
            Error::NonFinite { what, i, j } => {
                write!(f, "non-finite {what} at sample ({i}, {j})")
            }
            Error::Layer(msg) => write!(f, "layer error: {msg}"),
            Error::Solver { message, residual_history } => write!(
                f,
                "solver error: {message} (last residual {:.3e}, {} recorded)",
                residual_history.last().copied().unwrap_or(f64::NAN),
                residual_history.len()
            ),
            Error::Identity { what, left, right, tol } => write!(
                f,
                "identity violation ({what}): left = {left:.16e}, right = {right:.16e}, tol = {tol:.3e}"
            ),
            Error::LineSearch { halvings } => {
                write!(f, "line search failed after {halvings} halvings")
            }
            Error::Param(msg) => write!(f, "parameter error: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
