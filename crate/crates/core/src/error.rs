//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors produced by model construction, solving, shifting, and log
/// ingestion.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix or vector dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A value violates a domain requirement such as positivity,
    /// finiteness, or lying in the probability simplex.
    #[error("invalid value: {0}")]
    Domain(String),

    /// A 2x2 game whose indifference system has a vanishing denominator,
    /// so no isolated interior equilibrium exists.
    #[error("degenerate game: {0}")]
    DegenerateGame(String),

    /// The 2x2 indifference solution falls outside the open probability
    /// simplex; the game has no interior mixed equilibrium.
    #[error("no interior mixed equilibrium: {0}")]
    NoInteriorEquilibrium(String),

    /// Malformed input while parsing a frequency table or a JSON file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An operation parameter is out of its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A zero count reached the inverse problem unsmoothed; bonuses are
    /// reciprocals of frequencies and cannot absorb a zero.
    #[error("zero frequency for label {0:?}: smooth counts first (smoothing alpha > 0)")]
    ZeroFrequency(String),

    /// A shift step that would push some bonus to or below the positivity
    /// floor. `max_epsilon` is the largest admissible step size for the
    /// same direction.
    #[error(
        "step too large: epsilon {requested} exceeds the largest admissible step {max_epsilon}"
    )]
    StepTooLarge { requested: f64, max_epsilon: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
