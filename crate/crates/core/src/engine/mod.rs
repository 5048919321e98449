//! Discrete-event engine: clock and queue, random streams, scenario
//! configuration and the run loop.

pub mod config;
pub mod rng;
pub mod scheduler;
pub mod sim;

pub use config::{ScenarioConfig, StrategyConfig, StrategyKind};
pub use scheduler::{Event, EventHandle, Scheduler};
pub use sim::{run, BeaconRecord, Delivery, MotionRecord, Simulation};
