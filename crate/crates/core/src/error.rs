use core::fmt;

use crate::DocId;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A hash family needs at least one member function.
    EmptyHashFamily,
    /// LSH parameters violate `M = b * r`, a zero count, or a threshold outside `[0, 1]`.
    InvalidParams(&'static str),
    /// Two signatures (or a signature and a parameter set) disagree on `M`.
    LengthMismatch { expected: usize, actual: usize },
    /// A document id was referenced but is not present in the corpus.
    UnknownDocument(DocId),
    /// Edge and tree thresholds are inconsistent.
    InvalidClusterConfig(&'static str),
    /// Modularity is undefined on a graph with zero total weight.
    EmptyGraph,
    /// Negative edge weight passed to modularity.
    NegativeWeight,
    /// Synthesis spec is malformed.
    InvalidSynthSpec(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyHashFamily => f.write_str("hash family size must be at least 1"),
            Error::InvalidParams(why) => write!(f, "invalid LSH parameters: {why}"),
            Error::LengthMismatch { expected, actual } => {
                write!(f, "signature length mismatch: expected {expected}, got {actual}")
            }
            Error::UnknownDocument(id) => write!(f, "unknown document id {id}"),
            Error::InvalidClusterConfig(why) => write!(f, "invalid cluster config: {why}"),
            Error::EmptyGraph => f.write_str("modularity undefined: total edge weight is zero"),
            Error::NegativeWeight => f.write_str("edge weights must be non-negative"),
            Error::InvalidSynthSpec(why) => write!(f, "invalid synthesis spec: {why}"),
        }
    }
}

impl core::error::Error for Error {}
