//! Core of a closed-loop cybersickness mitigation engine.
//!
//! Head-tracking telemetry is windowed and turned into kinematic features,
//! a random-forest regressor predicts a VRSQ-scale sickness score, and a
//! rule-based controller trades fixed-foveated-rendering strength and field
//! of view against that score and the measured framerate.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the CLI and
//! the streaming service live in the `vrcomfort` crate.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod controller;
pub mod dataset;
pub mod forest;
pub mod kinematics;
pub mod math;
pub mod simulator;
pub mod telemetry;
pub mod vrsq;

pub use controller::{Action, ComfortParams, Controller, ControllerConfig, Decision};
pub use forest::{ForestModel, HyperParams, Metrics};
pub use kinematics::{FeatureVector, FEATURE_NAMES, N_FEATURES};
pub use math::{Quat, Vec3};
pub use telemetry::{FrameTiming, HeadSample, TelemetryStream, TelemetryWindow};
