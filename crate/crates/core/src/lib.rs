//! Whole-body reactive obstacle avoidance for a partially sensorized
//! manipulator.
//!
//! Simulated multi-zone ToF scans are converted to point clouds, stripped of
//! points that belong to the robot itself, reduced to the single closest
//! robot/environment pair across all links, and fed to a two-level
//! task-priority controller whose safety task may act on any point of the
//! robot surface.

mod config;
pub mod control;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod par;
pub mod pipeline;
pub mod proximity;
pub mod robot;
pub mod sensing;
pub mod sim;

pub use error::{Error, Result};
