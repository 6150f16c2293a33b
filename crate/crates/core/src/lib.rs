//! Whole-body collision avoidance for planar robots.
//!
//! Each sampled obstacle boundary point contributes one time-varying control
//! barrier function whose value is the robot's own signed distance field
//! evaluated in the body frame. Two control Lyapunov functions pull the robot
//! to its goal, and everything is combined into a small quadratic program
//! solved once per control step.
//!
//! Module map:
//! - [`geometry`]: robot shapes, the robo-centric SDF (analytic and gridded),
//!   frame transforms and obstacle boundary sampling.
//! - [`dynamics`]: single-integrator and unicycle robots, double-integrator
//!   obstacles.
//! - [`stability`]: distance and heading CLFs and their constraint rows.
//! - [`safety`]: CBF rows built through the SDF chain rule.
//! - [`qp`]: assembly, a dense dual active-set solver and a KKT checker.
//! - [`sim`]: the closed loop.
//! - [`scenario`], [`log`], [`plot`], [`bench`]: the file formats and
//!   reporting used by the `tvcbf` command line tool.

pub mod bench;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod log;
pub mod plot;
pub mod qp;
pub mod safety;
pub mod scenario;
pub mod sim;
pub mod stability;

pub use error::{Error, Result};

/// Planar vector type used throughout the crate.
pub type Vec2 = nalgebra::Vector2<f64>;
