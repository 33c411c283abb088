//! Scattering data and finite-energy sum rules for one-dimensional symmetric
//! and three-dimensional central potentials (units ħ = 2m = 1).

pub mod born;
pub mod channel;
pub mod cli;
pub mod error;
pub mod format;
pub mod jost1d;
pub mod numerics;
pub mod par;
pub mod potentials;
pub mod radial;
pub(crate) mod riccati;
pub mod spectrum;
pub mod sumrules;
pub mod wkb;

pub use riccati::OdeOptions;

pub use channel::ChannelId;
pub use error::{Error, Result};
pub use potentials::{Geometry, PotentialSpec};
