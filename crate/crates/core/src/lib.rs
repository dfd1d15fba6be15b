//! Projective-simulation agents that learn manipulation skills by playing
//! with simulated objects.
//!
//! The agent picks a sensing action, estimates a perceptual state, runs a
//! preparatory behaviour and then the skill's basic behaviour, and is
//! rewarded when the skill succeeds. A forward model learned on the side
//! drives boredom-based active learning and the composition of new
//! behaviours.

pub mod creativity;
pub mod env_model;
pub mod error;
pub mod harness;
pub mod introspect;
mod params;
pub mod ps;
pub mod skill_net;
pub mod worlds;

pub use error::{Error, Result};
pub use params::Params;
