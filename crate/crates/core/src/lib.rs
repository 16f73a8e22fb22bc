//! Convoy monitoring with a team of fixed-speed-band agents circling an
//! adaptive elliptical orbit around a moving ground convoy.
//!
//! Layering, bottom up: [`geometry`] → [`guidance`], [`speed`] → [`planner`],
//! [`cooperation`] → [`sim`] → [`scenario`], [`runner`], [`metrics`], [`plot`].

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod cooperation;
pub mod error;
pub mod geometry;
pub mod guidance;
pub mod metrics;
pub mod planner;
pub mod plot;
pub mod runner;
pub mod scenario;
pub mod sim;
pub mod speed;

pub use error::{Error, Result};
pub use geometry::{Direction, EllipseAxes, OrbitCoords, OrbitSpec, Vec2};
pub use runner::{run_scenario, RunOptions, RunOutput};
pub use scenario::{load_scenario, ScenarioConfig};
