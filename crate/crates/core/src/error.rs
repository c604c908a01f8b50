use std::fmt;

use thiserror::Error;

/// Why a digit word failed to parse as a concatenation of marker blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MembershipViolation {
    /// A run of `run` markers must be closed by the digit `run + 1`.
    UnexpectedDigit { expected: u32, found: u32 },
    /// The word ends inside a block.
    IncompleteBlock { run: u32 },
    /// The periodic tail consists of markers only, so no block ever closes.
    EndlessMarkerRun,
}

impl fmt::Display for MembershipViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MembershipViolation::UnexpectedDigit { expected, found } => {
                write!(f, "expected block terminator {expected}, found digit {found}")
            }
            MembershipViolation::IncompleteBlock { run } => {
                write!(f, "word ends after {run} marker digit(s) without a terminator")
            }
            MembershipViolation::EndlessMarkerRun => {
                f.write_str("periodic tail repeats the marker digit forever")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("base {s} is not supported here (need s >= {min})")]
    InvalidRadix { s: u32, min: u32 },

    #[error("digit {digit} at offset {offset} is not a base-{s} digit")]
    InvalidDigit { digit: u32, offset: usize, s: u32 },

    #[error("marker digit {u} is not a base-{s} digit")]
    InvalidMarker { u: u32, s: u32 },

    #[error("block value {value} at position {index} is not allowed for s={s}, u={u}")]
    InvalidBlock { value: u32, index: usize, s: u32, u: u32 },

    #[error("value {0} lies outside [0, 1]")]
    OutOfRange(String),

    #[error("not a member: digit offset {offset}: {reason}")]
    NotAMember { offset: usize, reason: MembershipViolation },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid equation: {0}")]
    InvalidEquation(String),

    #[error("digit string too short: need {needed} digits, only {available} available")]
    TooShort { needed: usize, available: usize },

    #[error("resource budget exceeded: {0}")]
    Budget(String),
}

impl Error {
    /// True for errors caused by a size budget rather than by invalid input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Budget(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
