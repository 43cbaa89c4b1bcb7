//! Error type shared by the core modules.

use core::fmt;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration invariant does not hold. Carries the offending field
    /// and a short description of the violated bound.
    Invalid {
        /// Dotted name of the field.
        field: &'static str,
        /// What was expected.
        reason: &'static str,
    },
    /// A point coincides with the RIS so angles are undefined.
    DegenerateGeometry,
    /// Argument shapes do not match the operation's contract.
    Contract(&'static str),
    /// The exact enumerator was asked for more grid cells than its limit.
    EnumLimitExceeded {
        /// Requested number of cells.
        cells: usize,
        /// Configured limit.
        limit: usize,
    },
    /// The brute-force oracle would have to enumerate too many assignments.
    SizeLimit,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Invalid { field, reason } => write!(f, "invalid `{field}`: {reason}"),
            Error::DegenerateGeometry => f.write_str("degenerate geometry: point coincides with the RIS"),
            Error::Contract(what) => write!(f, "contract violation: {what}"),
            Error::EnumLimitExceeded { cells, limit } => {
                write!(f, "{cells} grid cells exceed the exact enumeration limit of {limit}")
            }
            Error::SizeLimit => f.write_str("problem too large for exhaustive enumeration"),
        }
    }
}

impl core::error::Error for Error {}

/// Convenience alias.
pub type Result<T> = core::result::Result<T, Error>;
