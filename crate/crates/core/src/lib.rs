//! Geometry of spacelike sections of the past lightcone in Minkowski space.

pub mod construction;
pub mod error;
pub mod minkowski;
pub mod pulse;
pub mod greens;
pub mod hyperplane;
pub mod section;
pub mod sphere;

pub use error::{Error, Result};
