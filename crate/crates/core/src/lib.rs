//! Kinematics and torque model of a three-output open differential, and a
//! quasi-static simulator of the three-track pipe climber it drives.
//!
//! - [`geartrain`]: closed-form speed and torque relations of the differential.
//! - [`pipe_geometry`]: pipe networks and per-track speed/path laws in bends.
//! - [`speed_law`]: named track speed strategies (differential, locked axle).
//! - [`traversal`]: time-stepped traversal, compression profile, slip.
//! - [`metrics`]: APE and comparison with published reference values.
//! - [`scenario`], [`cli`]: config files and the `oodsim` command.

pub mod cli;
pub mod error;
pub mod geartrain;
pub mod metrics;
pub mod pipe_geometry;
pub mod references;
pub mod scenario;
pub mod speed_law;
pub mod traversal;
pub mod units;

pub use error::{Error, Result};
