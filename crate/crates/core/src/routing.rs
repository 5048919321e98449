//! Greedy geographic forwarding over predicted neighbor positions.
//!
//! Only the greedy mode is implemented: a packet stuck at a local maximum is
//! dropped and counted as a void drop. The packet lifecycle (retries,
//! false-neighbor eviction, reselection) is driven by the engine, see
//! `Simulation::forward`.

use serde::Serialize;

use crate::geom::Vec2;
use crate::mobility::KinematicSnapshot;
use crate::neighbor::NeighborTable;
use crate::NodeId;

/// Hops beyond this are treated as a routing void (prediction errors can,
/// in principle, bounce a packet around).
pub const MAX_HOPS: usize = 128;

/// One completed hop: who transmitted, and the position it announced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hop {
    pub node: NodeId,
    pub position: Vec2,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataPacket {
    pub id: u64,
    pub flow: usize,
    pub source: NodeId,
    pub destination: NodeId,
    /// Destination position looked up when the packet was created.
    pub dest_position: Vec2,
    pub size: u32,
    /// Current transmitter's kinematics, refreshed before every attempt.
    pub piggyback: KinematicSnapshot,
    pub created: f64,
    pub trace: Vec<Hop>,
}

impl DataPacket {
    pub fn hop_count(&self) -> usize {
        self.trace.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardOutcome {
    Forwarded,
    Delivered,
    DroppedVoid,
    DroppedRetries,
}

/// Greedy choice: the neighbor whose predicted position is closest to the
/// destination, provided it is strictly closer than `self_position`. Ties
/// go to the lowest id.
pub fn select_next_hop(
    table: &NeighborTable,
    self_position: Vec2,
    dest_position: Vec2,
    now: f64,
) -> Option<NodeId> {
    let own = self_position.distance(dest_position);
    let mut best: Option<(f64, NodeId)> = None;
    for entry in table.iter() {
        let d = entry.predicted(now).distance(dest_position);
        if d < own && best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, entry.neighbor));
        }
    }
    best.map(|(_, id)| id)
}
