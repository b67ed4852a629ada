pub mod error;
pub mod gp_sim;
pub mod harness;
pub mod limit_laws;
pub mod pickands;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
