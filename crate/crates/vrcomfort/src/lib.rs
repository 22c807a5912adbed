//! File formats, command-line tools and the sidecar service around
//! [`vrcomfort_core`].
//!
//! The latent sickness produced by the simulator is synthetic: a test
//! harness for the control loop, not a validated human model.

pub mod cli;
pub mod config;
pub mod csvio;
mod error;
pub mod model_file;
pub mod parallel;
pub mod protocol;
pub mod report;
pub mod service;

pub use error::{Error, Result};
pub use model_file::{load_model, save_model};
pub use vrcomfort_core as core;
