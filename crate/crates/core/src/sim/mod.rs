//! Deterministic discrete-time world for the convoy monitoring scheme.

mod convoy;
mod unicycle;
mod world;

pub use convoy::{ConvoyModel, PathShape, SpeedProfile};
pub use unicycle::{altitude_step, unicycle_step, velocity_mapping, AgentState, Integrator, VelocityCommand};
pub use world::{AgentRecord, MetricsRecord, SimParams, World};
