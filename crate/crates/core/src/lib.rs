//! Eventual full positivity of Laurent polynomial powers.
//!
//! The pipeline goes from a polynomial to its Newton polytope, the normal fan
//! of that polytope, and the homogenized polynomial over the fan's rays. The
//! three positivity conditions are checked there, and the results are
//! cross-checked by expanding powers directly.

pub mod analysis;
pub mod cli;
pub mod fan;
pub mod homogenize;
pub mod intlin;
pub mod laurent;
pub mod markov;
pub mod parser;
pub mod polytope;
pub mod positivity;
pub mod sampling;
pub mod univariate;
