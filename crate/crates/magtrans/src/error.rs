//! Error type shared by every module in the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The config document could not be parsed against the schema.
    #[error("config error: {0}")]
    Config(String),

    /// The config parsed but holds values outside their allowed range,
    /// or an operation was handed structurally invalid inputs.
    #[error("invalid parameter: {0}")]
    Validation(String),

    /// An operation was evaluated outside its physical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The two level curves never change order inside the search bracket.
    #[error("no level crossing inside [{lo} T, {hi} T]")]
    NoCrossing { lo: f64, hi: f64 },

    /// The two level curves coincide within tolerance across the bracket,
    /// so no isolated crossing field exists.
    #[error("degenerate crossing: level curves coincide over [{lo} T, {hi} T]")]
    DegenerateCrossing { lo: f64, hi: f64 },

    /// The elimination denominator vanished (or nearly did), so the reduced
    /// two-mode model is meaningless at these detunings.
    #[error("singular elimination denominator ({denominator:e})")]
    SingularElimination { denominator: f64 },

    /// The interior block of the five-level matrix could not be inverted.
    #[error("singular interior block (condition estimate {cond_estimate:e})")]
    SingularBlock { cond_estimate: f64 },

    /// Integration step too coarse for the largest matrix element.
    #[error("step {dt:e} s too coarse for this Hamiltonian; use {suggested:e} s or smaller")]
    StepSize { dt: f64, suggested: f64 },

    /// Parsed grid data does not match its declared layout.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Bandwidth is undefined when the converter does not convert.
    #[error("bandwidth undefined: zero transduction rate")]
    UndefinedBandwidth,

    /// No baseline rate could be produced: none was supplied, or the
    /// reference grid is entirely masked.
    #[error("no baseline rate available (missing, or fully masked reference grid)")]
    EmptyBaseline,

    /// An emission sink failed; the sink identity is kept in the message.
    #[error("write to {sink} failed: {source}")]
    Io {
        sink: String,
        #[source]
        source: std::io::Error,
    },
}
