//! Files, configuration and experiments around [`oprisk_core`].
//!
//! Every pipeline stage reads and writes plain CSV or line-oriented text (see
//! [`formats`]), so any stage can be rerun on its own from files on disk.
//! [`harness`] reproduces the correlation, topology and VaR-versus-window
//! experiments from one master seed.

pub mod config;
pub mod formats;
pub mod harness;

mod error;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
