pub mod dist;
pub mod error;
pub mod estimators;
pub mod inference;
pub mod intervals;
pub mod par;
pub mod rank_engine;
pub mod sim_harness;

pub use error::{Error, Result};
