//! Finite-population evolutionary dynamics for population games.
//!
//! * [`game`], [`protocol`]: games, revision protocols and their hypotheses.
//! * [`dynamics`]: the mean dynamic and its RK4 integration.
//! * [`chain`]: the finite-N jump process, simulation, exact stationary laws.
//! * [`transform`]: two-strategy decompositions of symmetric protocols.
//! * [`stationary`]: birth–death products and distribution comparison.

pub mod chain;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod io;
pub mod par;
pub mod protocol;
pub mod rates;
pub mod stationary;
pub mod table;
pub mod transform;

pub use chain::{build_generator, FiniteChain};
pub use dynamics::{integrate_mean_dynamic, mean_dynamic_rhs, Trajectory};
pub use error::{Error, Result};
pub use game::{make_linear_game, Payoff, PayoffVector, PopulationGame, SocialState};
pub use par::ExecMode;
pub use protocol::{validate_hypotheses, RevisionProtocol, ValidationReport};
pub use rates::{RateMatrix, Square};
pub use table::{Provenance, StationaryTable};
pub use transform::TransformedGame;
