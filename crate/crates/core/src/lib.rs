//! Horse-race gambling with causally revealed side information.
//!
//! The crate computes, exactly by enumeration and approximately by
//! simulation:
//!
//! - causal conditioning `p(x^n || y^n)`, causally conditional entropy and
//!   directed information `I(Y^n -> X^n)` ([`causal_info`]),
//! - growth-optimal betting with and without a cash option, and the increase
//!   in growth rate due to side information ([`gambling`]),
//! - closed forms for a binary Markov winner observed through a binary
//!   symmetric channel ([`markov_example`]),
//! - log-optimal causal portfolios and the horse-race market embedding
//!   ([`portfolio`]),
//! - sequential prefix coding with causal side information ([`compression`]).
//!
//! All logarithms are base 2.

pub mod causal_info;
pub mod compression;
pub mod config;
pub mod error;
pub mod gambling;
pub mod joint;
pub mod markov_example;
pub mod portfolio;
pub mod process;
pub mod report;

pub use error::{Error, Result};
pub use joint::{Budget, JointTable};
pub use process::{ProcessSpec, SamplePath};
