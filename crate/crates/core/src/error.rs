use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Shape or value constraint violated when building a domain object.
    InvalidInput(String),
    /// A process row has zero variance over the evaluated window.
    ConstantSeries { process: usize },
    /// Fewer than three leading lags above the decay-fit floor.
    InsufficientDecayRange,
    /// Aggregation window longer than the series.
    WindowExceedsSeries { window: usize, length: usize },
    /// Every aggregate loss of a process is zero, so no bin width exists.
    DegenerateProcess { process: usize },
    /// Exhaustive DAG enumeration requested beyond its node cap.
    ExhaustiveTooLarge { nodes: usize },
    /// Joint enumeration would exceed the configuration cap.
    StateSpaceTooLarge { configurations: u128 },
    /// Edge insertion or structure would introduce a directed cycle.
    Cyclic,
    BinWidthMismatch { left: f64, right: f64 },
    HorizonBelowWindow { horizon: usize, window: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::ConstantSeries { process } => {
                write!(f, "process {process} is constant; correlation undefined")
            }
            Error::InsufficientDecayRange => f.write_str("insufficient decay range"),
            Error::WindowExceedsSeries { window, length } => write!(
                f,
                "window exceeds series length (window {window}, length {length})"
            ),
            Error::DegenerateProcess { process } => {
                write!(f, "degenerate process {process}: all aggregate losses are zero")
            }
            Error::ExhaustiveTooLarge { nodes } => {
                write!(f, "exhaustive search capped at 4 nodes (got {nodes})")
            }
            Error::StateSpaceTooLarge { configurations } => write!(
                f,
                "joint state space has {configurations} configurations (cap 1e6); \
                 use per-node marginals instead of the full joint"
            ),
            Error::Cyclic => f.write_str("structure contains a directed cycle"),
            Error::BinWidthMismatch { left, right } => {
                write!(f, "bin widths differ ({left} vs {right})")
            }
            Error::HorizonBelowWindow { horizon, window } => write!(
                f,
                "horizon below aggregation window (horizon {horizon}, window {window})"
            ),
        }
    }
}

impl core::error::Error for Error {}
