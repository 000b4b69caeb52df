use thiserror::Error;

/// Errors raised by the solver library.
///
/// Input errors describe malformed or out-of-contract arguments. Resource
/// errors mean a configured budget would be exceeded; nothing is ever
/// silently approximated instead.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("{what} of {value} exceeds the configured budget of {budget}")]
    Budget {
        what: &'static str,
        value: String,
        budget: String,
    },

    #[error("lp solver: {0}")]
    Solver(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn budget(what: &'static str, value: impl ToString, budget: impl ToString) -> Self {
        Error::Budget {
            what,
            value: value.to_string(),
            budget: budget.to_string(),
        }
    }

    /// True for budget and solver-limit failures, false for bad input.
    pub fn is_resource(&self) -> bool {
        !matches!(self, Error::Input(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
