use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Ball parameters outside `d ≥ 1`, `q ≥ 1`, `N > 0`.
    InvalidSpec(String),
    /// `floor(N)` (or the integer budget `floor(N^q)`) does not fit a machine word.
    BudgetOverflow(String),
    /// An operation was called outside its documented domain.
    Precondition(String),
    /// The request is too large for every available evaluation path.
    Capacity(String),
    InvalidFrequency(String),
    InvalidGrid(String),
    /// A computation produced NaN or an infinity.
    NonFinite(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpec(m) => write!(f, "invalid ball spec: {m}"),
            Error::BudgetOverflow(m) => write!(f, "budget overflow: {m}"),
            Error::Precondition(m) => write!(f, "precondition violated: {m}"),
            Error::Capacity(m) => write!(f, "capacity exceeded: {m}"),
            Error::InvalidFrequency(m) => write!(f, "invalid frequency: {m}"),
            Error::InvalidGrid(m) => write!(f, "invalid grid: {m}"),
            Error::NonFinite(m) => write!(f, "non-finite value: {m}"),
        }
    }
}

impl core::error::Error for Error {}
