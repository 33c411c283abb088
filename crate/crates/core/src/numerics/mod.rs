//! Shared numerical building blocks.

pub mod extrap;
pub mod filon;
pub mod ode;
pub mod quad;
pub mod special;
