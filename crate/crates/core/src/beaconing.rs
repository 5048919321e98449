//! Beacon-update strategies: periodic (PB), distance-based (DB), speed-based
//! (SB) and adaptive position update (APU), which combines the mobility
//! prediction (MP) rule with on-demand learning (ODL).
//!
//! The engine owns timing; this module holds per-node strategy state and
//! the trigger decisions.

use serde::Serialize;

use crate::engine::config::{ScenarioConfig, StrategyConfig, StrategyKind};
use crate::engine::scheduler::EventHandle;
use crate::error::Result;
use crate::geom::Vec2;
use crate::mobility::{predict_position, KinematicSnapshot};
use crate::neighbor::{EntrySource, NeighborTable};
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BeaconCause {
    Initial,
    Periodic,
    Distance,
    Speed,
    Mp,
    Odl,
}

impl BeaconCause {
    pub const ALL: [BeaconCause; 6] = [
        BeaconCause::Initial,
        BeaconCause::Periodic,
        BeaconCause::Distance,
        BeaconCause::Speed,
        BeaconCause::Mp,
        BeaconCause::Odl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BeaconCause::Initial => "initial",
            BeaconCause::Periodic => "periodic",
            BeaconCause::Distance => "distance",
            BeaconCause::Speed => "speed",
            BeaconCause::Mp => "mp",
            BeaconCause::Odl => "odl",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beacon {
    pub sender: NodeId,
    /// Advertised (possibly noisy) position.
    pub position: Vec2,
    pub velocity: Vec2,
    pub timestamp: f64,
    pub cause: BeaconCause,
    pub size: u32,
}

impl Beacon {
    pub fn snapshot(&self) -> KinematicSnapshot {
        KinematicSnapshot {
            position: self.position,
            velocity: self.velocity,
            timestamp: self.timestamp,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BeaconCounts {
    pub initial: u64,
    pub periodic: u64,
    pub distance: u64,
    pub speed: u64,
    pub mp: u64,
    pub odl: u64,
}

impl BeaconCounts {
    pub fn record(&mut self, cause: BeaconCause) {
        *self.slot(cause) += 1;
    }

    fn slot(&mut self, cause: BeaconCause) -> &mut u64 {
        match cause {
            BeaconCause::Initial => &mut self.initial,
            BeaconCause::Periodic => &mut self.periodic,
            BeaconCause::Distance => &mut self.distance,
            BeaconCause::Speed => &mut self.speed,
            BeaconCause::Mp => &mut self.mp,
            BeaconCause::Odl => &mut self.odl,
        }
    }

    pub fn get(&self, cause: BeaconCause) -> u64 {
        match cause {
            BeaconCause::Initial => self.initial,
            BeaconCause::Periodic => self.periodic,
            BeaconCause::Distance => self.distance,
            BeaconCause::Speed => self.speed,
            BeaconCause::Mp => self.mp,
            BeaconCause::Odl => self.odl,
        }
    }

    pub fn total(&self) -> u64 {
        BeaconCause::ALL.iter().map(|&c| self.get(c)).sum()
    }

    pub fn merge(&mut self, other: &BeaconCounts) {
        for c in BeaconCause::ALL {
            *self.slot(c) += other.get(c);
        }
    }
}

/// Speed-to-interval mapping for SB: `i_max` at or below `v_lo`, `i_min` at
/// or above `v_hi`, linear in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedMapping {
    pub i_max: f64,
    pub i_min: f64,
    pub v_lo: f64,
    pub v_hi: f64,
}

impl SpeedMapping {
    pub fn interval(&self, speed: f64) -> f64 {
        if self.v_hi <= self.v_lo || speed <= self.v_lo {
            return self.i_max;
        }
        if speed >= self.v_hi {
            return self.i_min;
        }
        let frac = (speed - self.v_lo) / (self.v_hi - self.v_lo);
        self.i_max + frac * (self.i_min - self.i_max)
    }
}

/// A strategy with every scenario-derived default filled in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Periodic { interval: f64 },
    Distance { threshold: f64 },
    Speed(SpeedMapping),
    Adaptive { aer: f64 },
}

impl Strategy {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        match cfg.strategy {
            StrategyConfig::Pb { interval } => Strategy::Periodic { interval },
            StrategyConfig::Db { .. } => Strategy::Distance {
                threshold: cfg.resolved_db_threshold(),
            },
            StrategyConfig::Sb {
                i_max, i_min, v_lo, ..
            } => Strategy::Speed(SpeedMapping {
                i_max,
                i_min,
                v_lo,
                v_hi: cfg.resolved_sb_v_hi(),
            }),
            StrategyConfig::Apu { .. } => Strategy::Adaptive {
                aer: cfg.resolved_aer(),
            },
        }
    }

    pub fn kind(&self) -> StrategyKind {
        match self {
            Strategy::Periodic { .. } => StrategyKind::Pb,
            Strategy::Distance { .. } => StrategyKind::Db,
            Strategy::Speed(_) => StrategyKind::Sb,
            Strategy::Adaptive { .. } => StrategyKind::Apu,
        }
    }

    /// Whether a beacon with `cause` may be emitted under this strategy.
    pub fn allows(&self, cause: BeaconCause) -> bool {
        matches!(
            (self, cause),
            (_, BeaconCause::Initial)
                | (Strategy::Periodic { .. }, BeaconCause::Periodic)
                | (Strategy::Distance { .. }, BeaconCause::Distance)
                | (Strategy::Speed(_), BeaconCause::Speed)
                | (
                    Strategy::Adaptive { .. },
                    BeaconCause::Mp | BeaconCause::Odl
                )
        )
    }

    /// APU nodes learn from position headers on overheard data.
    pub fn uses_piggyback(&self) -> bool {
        matches!(self, Strategy::Adaptive { .. })
    }
}

/// Per-node strategy state.
#[derive(Debug, Clone, Default)]
pub struct BeaconState {
    /// What neighbors were last told about this node.
    pub last_beacon: Option<KinematicSnapshot>,
    /// Path length travelled since the last own beacon (DB).
    pub odometer: f64,
    odometer_mark: Option<Vec2>,
    /// Periodic beacons emitted so far, counting the initial one (PB).
    pub periodic_emitted: u64,
    /// Pending self-scheduled beacon (SB), cancelled on speed changes.
    pub pending: Option<EventHandle>,
    /// An ODL response is already queued for this instant.
    pub odl_queued: bool,
    pub counts: BeaconCounts,
}

impl BeaconState {
    pub fn record(&mut self, beacon: &Beacon) {
        self.last_beacon = Some(beacon.snapshot());
        self.odometer = 0.0;
        self.counts.record(beacon.cause);
    }

    pub fn last_beacon_time(&self) -> Option<f64> {
        self.last_beacon.map(|s| s.timestamp)
    }
}

/// MP rule: how far the node's own advertised position has drifted from
/// what its neighbors extrapolate from the last beacon. Fires when the
/// deviation exceeds `aer`.
pub fn mp_deviation(last_beacon: &KinematicSnapshot, observed: Vec2, now: f64) -> Result<f64> {
    Ok(predict_position(last_beacon, now)?.distance(observed))
}

pub fn mp_check(state: &BeaconState, observed: Vec2, now: f64, aer: f64) -> Result<bool> {
    match &state.last_beacon {
        Some(last) => Ok(mp_deviation(last, observed, now)? > aer),
        None => Ok(false),
    }
}

/// ODL rule, applied by a node that overheard (or received) a data packet
/// carrying `piggyback` from `transmitter`. The entry is always refreshed;
/// returns `true` when the transmitter was a new neighbor and a beacon must
/// go out in response.
pub fn odl_check(
    table: &mut NeighborTable,
    transmitter: NodeId,
    piggyback: KinematicSnapshot,
) -> Result<bool> {
    table.upsert(transmitter, piggyback, EntrySource::Piggyback)
}

/// Time of the next periodic beacon once `emitted` have gone out, the first
/// at t = 0. Multiplying rather than accumulating keeps the grid exact.
pub fn pb_next(interval: f64, emitted: u64) -> f64 {
    emitted as f64 * interval
}

/// DB rule: accumulate path length up to `position` and report whether the
/// odometer has passed `threshold`.
pub fn db_check(state: &mut BeaconState, position: Vec2, threshold: f64) -> bool {
    if let Some(mark) = state.odometer_mark {
        state.odometer += position.distance(mark);
    }
    state.odometer_mark = Some(position);
    state.odometer > threshold
}

/// SB rule: next beacon time given the node's current speed.
pub fn sb_next(mapping: &SpeedMapping, speed: f64, last_beacon: f64) -> f64 {
    last_beacon + mapping.interval(speed)
}
