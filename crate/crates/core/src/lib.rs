pub mod error;
pub mod harness;
pub mod l2geom;
pub mod model;
pub mod motion;
pub mod parametric;
pub mod stats;
pub mod transforms;

pub use error::{Error, Result};
