//! Discrete-event simulation of position beaconing for geographic routing
//! in mobile ad hoc networks.
//!
//! Nodes move, exchange position beacons under one of four strategies
//! (periodic, distance-triggered, speed-adaptive, adaptive position
//! update), keep neighbor tables from those beacons and route data with
//! greedy forwarding. A run reports beacon overhead, topology accuracy,
//! delivery ratio and energy; [`analysis`] holds the analytical overhead
//! model the runs are checked against.

pub mod analysis;
pub mod beaconing;
pub mod engine;
pub mod error;
pub mod geom;
pub mod harness;
pub mod mobility;
pub mod neighbor;
pub mod radio;
pub mod report;
pub mod routing;

pub type NodeId = usize;

pub use engine::{run, ScenarioConfig, Simulation, StrategyConfig, StrategyKind};
pub use error::{Result, SimError};
pub use geom::Vec2;
pub use report::MetricsReport;
