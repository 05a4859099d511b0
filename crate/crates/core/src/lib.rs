pub mod baselines;
pub mod beamcore;
pub mod channel;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod numkernel;

pub use error::{Error, Result};
