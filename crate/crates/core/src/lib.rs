//! Exact samplers for the uniform empirical process, the centered Poisson
//! walk and its bridge, the correction coupling that turns one into the
//! other, and uniform Bernoulli bridges, together with a seeded statistical
//! harness that checks their laws and limits at desk scale.
//!
//! Every random operation takes an explicit generator; the replication
//! driver in [`replicate`] hands replication `i` the stream `i` so results do
//! not depend on thread scheduling.

pub mod bernoulli;
pub mod coupling;
pub mod dist;
pub mod empirical;
mod error;
pub mod grid;
pub mod reference;
pub mod replicate;
pub mod rng;
pub mod stats;
pub mod study;
pub mod suite;
pub mod walk;

pub use error::{Error, Result};
pub use grid::GridFunction;
pub use rng::RngStream;
