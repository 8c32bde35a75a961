//! Cooperative sound mapping simulation and estimation toolkit.
//!
//! Two (or more) simulated mobile robots, each carrying a 16-microphone
//! array, localize a sound source in a shared map frame. Per robot the
//! pipeline estimates a direction of arrival from multichannel audio
//! (GCC-PHAT pairwise correlation, steered-response-power search over a
//! hierarchical spherical grid), smooths it with a Kalman tracker, and the
//! mapper triangulates the source position from two synchronized
//! (pose, DoA) streams. The analysis module reduces trials to error
//! statistics against the baseline angle between the robots.

pub mod array;
pub mod error;
pub mod geom;
pub mod synth;

pub use error::{Error, Result};
