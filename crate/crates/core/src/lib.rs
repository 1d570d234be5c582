pub mod diagnostics;
pub mod error;
pub mod hermite;
pub mod martingale;
pub mod paths;
pub mod rng;
pub mod scenario;
pub mod spde;
pub mod stats;

pub use error::{Error, Result};
