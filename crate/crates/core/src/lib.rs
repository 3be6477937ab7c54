//! Motion control and simulation for a two-axle compliant-framed wheeled
//! mobile robot.
//!
//! The control stack has two layers. A bounded-curvature kinematic
//! controller ([`kinematic`]) regulates the frame center toward a target
//! posture. Its center command is split into per-axle references by
//! [`cascade`], and each axle tracks its reference with an independent
//! nonlinear-damping torque controller ([`dynamic`]). [`plant`] provides
//! the ground-truth physics and encoder odometry, [`interaction`] wires the
//! layers in the three feedback structures, and [`harness`] covers
//! configuration, logging, metrics and plots.

pub mod cascade;
pub mod dynamic;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod interaction;
pub mod kinematic;
pub mod plant;

pub use error::{Error, Result};
pub use geometry::{BodyVelocity, PolarError, Posture};
