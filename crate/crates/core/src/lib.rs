//! Game-theoretic modeling of query/answer traffic.
//!
//! The crate is organized in four layers:
//!
//! * [`game`] — finite bimatrix games: payoff evaluation, dominance, pure
//!   and 2x2 mixed Nash equilibria, and a deviation-based equilibrium
//!   check.
//! * [`alpha`] — the diagonal bonus model: a forward map from bonus
//!   vectors to the unique interior equilibrium, and the inverse
//!   reconstruction of bonuses from observed play frequencies.
//! * [`shift`] — budget-preserving bonus reallocation that increases the
//!   answering side's gain, with first-order predictions checked against
//!   exact recomputation.
//! * [`ingest`] — frequency-log preprocessing: parsing, alignment of both
//!   log sides to a common strategy count, and additive smoothing.
//!
//! [`formats`] holds the JSON file schemas shared with the command-line
//! front end.

pub mod alpha;
pub mod error;
pub mod formats;
pub mod game;
pub mod ingest;
pub mod shift;

pub use error::{Error, Result};
