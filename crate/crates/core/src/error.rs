use thiserror::Error;

use crate::interval::Interval;
use crate::rational::{fmt_rational, Rational};

/// Contract violations raised by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("size error: {what} would need {needed} entries, cap is {cap}")]
    Size {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid full-lap tuple: {0}")]
    InvalidTuple(String),

    #[error("continuity error: {0}")]
    Continuity(String),

    #[error("not lambda-equivalent on slab {}: window map gives {}, original gives {}",
        .0.slab, fmt_rational(&.0.got), fmt_rational(&.0.expected))]
    Equivalence(Box<Mismatch>),

    #[error("map does not preserve Lebesgue measure: {0}")]
    NotPreserving(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("budget exhausted: {0}")]
    Budget(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("divisibility error: {0}")]
    Divisibility(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("expanding map required: {0}")]
    ExpandingRequired(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// The first range slab on which two maps' reciprocal-slope sums differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub slab: Interval,
    pub got: Rational,
    pub expected: Rational,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
