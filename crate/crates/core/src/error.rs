use std::path::PathBuf;

use thiserror::Error;

use crate::NodeId;

/// Errors surfaced by the simulator and its front end.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: `{field}` {reason}")]
    Config { field: String, reason: String },

    #[error("failed to parse scenario: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("event scheduled at t={fire_time} but clock is already at t={now}")]
    ScheduleInPast { fire_time: f64, now: f64 },

    #[error("query time {now} precedes snapshot timestamp {timestamp}")]
    TimeReversal { now: f64, timestamp: f64 },

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("node {owner} cannot hold a neighbor entry for itself")]
    SelfEntry { owner: NodeId },

    #[error("node {owner} has no neighbor entry for {neighbor}")]
    MissingNeighbor { owner: NodeId, neighbor: NodeId },

    #[error("unknown energy operation class `{0}`")]
    UnknownOpClass(String),

    #[error("analytical model outside its domain: {0}")]
    ModelDomain(String),

    #[error("cannot estimate gamma: {0}")]
    NoForwarding(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        SimError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
