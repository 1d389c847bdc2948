//! Learning sparse polymatrix games from observed strategy profiles.
//!
//! Each player's payoff is modelled as a linear function of indicator
//! features of its own strategy and its neighbours' strategies. Fitting a
//! group-sparse multinomial logistic regression per player recovers both the
//! interaction graph and a game whose pure Nash equilibria can be compared
//! with those of the generating game.

// `!(x >= 0.0)` style checks are used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod game;
pub mod learner;
pub mod observation;
pub mod params;
pub mod votes;

pub use error::{Error, Result};
pub use game::{PolymatrixGame, PsneSet, StrategyProfile};
pub use learner::{LearnedModel, LearnerConfig};
pub use observation::{Dataset, NoiseModel, ObservationModel, PmfTable};
pub use params::{GroupLayout, GroupedParameterVector};

/// Version string written into artifact headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
