//! Per-node neighbor tables and topology-accuracy metrics.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Result, SimError};
use crate::geom::Vec2;
use crate::mobility::{predict_position, KinematicSnapshot};
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntrySource {
    Beacon,
    Piggyback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborEntry {
    pub neighbor: NodeId,
    pub snapshot: KinematicSnapshot,
    pub source: EntrySource,
}

impl NeighborEntry {
    /// Dead-reckoned position; queries before the announcement return the
    /// announced position.
    pub fn predicted(&self, now: f64) -> Vec2 {
        predict_position(&self.snapshot, now.max(self.snapshot.timestamp))
            .expect("query clamped to snapshot time")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    owner: NodeId,
    entries: BTreeMap<NodeId, NeighborEntry>,
}

impl NeighborTable {
    pub fn new(owner: NodeId) -> Self {
        NeighborTable {
            owner,
            entries: BTreeMap::new(),
        }
    }

    pub fn owner(&self) -> NodeId {
        self.owner
    }

    /// Record `snapshot` for `sender`. Returns `true` if `sender` was not in
    /// the table before. An older snapshot never overwrites a newer one.
    pub fn upsert(
        &mut self,
        sender: NodeId,
        snapshot: KinematicSnapshot,
        source: EntrySource,
    ) -> Result<bool> {
        if sender == self.owner {
            return Err(SimError::SelfEntry { owner: self.owner });
        }
        match self.entries.get_mut(&sender) {
            Some(entry) => {
                if snapshot.timestamp >= entry.snapshot.timestamp {
                    entry.snapshot = snapshot;
                    entry.source = source;
                }
                Ok(false)
            }
            None => {
                self.entries.insert(
                    sender,
                    NeighborEntry {
                        neighbor: sender,
                        snapshot,
                        source,
                    },
                );
                Ok(true)
            }
        }
    }

    pub fn get(&self, neighbor: NodeId) -> Option<&NeighborEntry> {
        self.entries.get(&neighbor)
    }

    pub fn predicted_neighbor_position(&self, neighbor: NodeId, now: f64) -> Result<Vec2> {
        let entry = self
            .entries
            .get(&neighbor)
            .ok_or(SimError::MissingNeighbor {
                owner: self.owner,
                neighbor,
            })?;
        predict_position(&entry.snapshot, now)
    }

    /// Drop every entry predicted farther than `range` from `self_position`.
    pub fn purge_out_of_range(&mut self, self_position: Vec2, now: f64, range: f64) -> Vec<NodeId> {
        let gone: Vec<NodeId> = self
            .entries
            .values()
            .filter(|e| e.predicted(now).distance(self_position) > range)
            .map(|e| e.neighbor)
            .collect();
        for id in &gone {
            self.entries.remove(id);
        }
        gone
    }

    /// Drop entries whose last announcement is older than `timeout` seconds.
    pub fn purge_stale(&mut self, now: f64, timeout: f64) -> Vec<NodeId> {
        let gone: Vec<NodeId> = self
            .entries
            .values()
            .filter(|e| now - e.snapshot.timestamp > timeout)
            .map(|e| e.neighbor)
            .collect();
        for id in &gone {
            self.entries.remove(id);
        }
        gone
    }

    pub fn remove(&mut self, neighbor: NodeId) -> bool {
        self.entries.remove(&neighbor).is_some()
    }

    pub fn contains(&self, neighbor: NodeId) -> bool {
        self.entries.contains_key(&neighbor)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in ascending neighbor id order.
    pub fn iter(&self) -> impl Iterator<Item = &NeighborEntry> {
        self.entries.values()
    }

    pub fn ids(&self) -> BTreeSet<NodeId> {
        self.entries.keys().copied().collect()
    }
}

/// Raw counts behind the two accuracy ratios for one node at one instant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AccuracyCounts {
    pub unknown: usize,
    pub false_: usize,
    pub truth: usize,
}

impl AccuracyCounts {
    pub fn measure(table: &NeighborTable, truth: &BTreeSet<NodeId>) -> Self {
        AccuracyCounts {
            unknown: truth.iter().filter(|id| !table.contains(**id)).count(),
            false_: table
                .iter()
                .filter(|e| !truth.contains(&e.neighbor))
                .count(),
            truth: truth.len(),
        }
    }

    pub fn unknown_ratio(&self) -> f64 {
        ratio(self.unknown, self.truth)
    }

    pub fn false_ratio(&self) -> f64 {
        ratio(self.false_, self.truth)
    }
}

// Both ratios share the true-neighbor denominator; the false count can exceed
// it, so the ratio is capped at 1 and the raw counts are exported alongside.
fn ratio(count: usize, truth: usize) -> f64 {
    if truth == 0 {
        0.0
    } else {
        (count as f64 / truth as f64).min(1.0)
    }
}

/// Fraction of true neighbors missing from the table.
pub fn unknown_neighbor_ratio(table: &NeighborTable, truth: &BTreeSet<NodeId>) -> f64 {
    AccuracyCounts::measure(table, truth).unknown_ratio()
}

/// Stale table entries relative to the number of true neighbors.
pub fn false_neighbor_ratio(table: &NeighborTable, truth: &BTreeSet<NodeId>) -> f64 {
    AccuracyCounts::measure(table, truth).false_ratio()
}

/// Network-wide accuracy at one sampling instant: ratios averaged over
/// nodes, counts summed over nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TopologyAccuracySample {
    pub time: f64,
    pub unknown_ratio: f64,
    pub false_ratio: f64,
    pub true_neighbor_count: usize,
    pub unknown_count: usize,
    pub false_count: usize,
}

impl TopologyAccuracySample {
    pub fn aggregate(time: f64, per_node: &[AccuracyCounts]) -> Self {
        let n = per_node.len().max(1) as f64;
        TopologyAccuracySample {
            time,
            unknown_ratio: per_node
                .iter()
                .map(AccuracyCounts::unknown_ratio)
                .sum::<f64>()
                / n,
            false_ratio: per_node
                .iter()
                .map(AccuracyCounts::false_ratio)
                .sum::<f64>()
                / n,
            true_neighbor_count: per_node.iter().map(|c| c.truth).sum(),
            unknown_count: per_node.iter().map(|c| c.unknown).sum(),
            false_count: per_node.iter().map(|c| c.false_).sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(p: (f64, f64), v: (f64, f64), t: f64) -> KinematicSnapshot {
        KinematicSnapshot {
            position: p.into(),
            velocity: v.into(),
            timestamp: t,
        }
    }

    fn set(ids: &[NodeId]) -> BTreeSet<NodeId> {
        ids.iter().copied().collect()
    }

    fn table_with(owner: NodeId, ids: &[NodeId]) -> NeighborTable {
        let mut t = NeighborTable::new(owner);
        for &id in ids {
            t.upsert(id, snap((0.0, 0.0), (0.0, 0.0), 0.0), EntrySource::Beacon)
                .unwrap();
        }
        t
    }

    #[test]
    fn upsert_reports_new_senders() {
        let mut t = NeighborTable::new(0);
        assert!(t
            .upsert(1, snap((1.0, 1.0), (0.0, 0.0), 0.0), EntrySource::Beacon)
            .unwrap());
        assert!(!t
            .upsert(1, snap((2.0, 1.0), (0.0, 0.0), 1.5), EntrySource::Beacon)
            .unwrap());
        assert_eq!(t.len(), 1);
        assert_eq!(t.get(1).unwrap().snapshot.timestamp, 1.5);
        // stale announcement does not roll the entry back
        t.upsert(1, snap((9.0, 9.0), (0.0, 0.0), 1.0), EntrySource::Piggyback)
            .unwrap();
        assert_eq!(t.get(1).unwrap().snapshot.position, Vec2::new(2.0, 1.0));
    }

    #[test]
    fn piggyback_inserts_with_source() {
        let mut t = NeighborTable::new(0);
        assert!(t
            .upsert(3, snap((5.0, 5.0), (1.0, 0.0), 2.0), EntrySource::Piggyback)
            .unwrap());
        assert_eq!(t.get(3).unwrap().source, EntrySource::Piggyback);
    }

    #[test]
    fn self_entry_rejected() {
        let mut t = NeighborTable::new(4);
        assert!(matches!(
            t.upsert(4, snap((0.0, 0.0), (0.0, 0.0), 0.0), EntrySource::Beacon),
            Err(SimError::SelfEntry { owner: 4 })
        ));
    }

    #[test]
    fn predicted_positions() {
        let mut t = NeighborTable::new(0);
        t.upsert(1, snap((0.0, 0.0), (5.0, 0.0), 0.0), EntrySource::Beacon)
            .unwrap();
        t.upsert(2, snap((7.0, 3.0), (0.0, 0.0), 4.0), EntrySource::Beacon)
            .unwrap();
        assert_eq!(
            t.predicted_neighbor_position(1, 3.0).unwrap(),
            Vec2::new(15.0, 0.0)
        );
        assert_eq!(t.predicted_neighbor_position(1, 0.0).unwrap(), Vec2::ZERO);
        assert_eq!(
            t.predicted_neighbor_position(2, 1e5).unwrap(),
            Vec2::new(7.0, 3.0)
        );
        assert!(matches!(
            t.predicted_neighbor_position(9, 1.0),
            Err(SimError::MissingNeighbor { .. })
        ));
    }

    #[test]
    fn purge_by_predicted_distance() {
        let r = 250.0;
        let mut t = NeighborTable::new(0);
        t.upsert(
            1,
            snap((r - 1.0, 0.0), (0.0, 0.0), 0.0),
            EntrySource::Beacon,
        )
        .unwrap();
        t.upsert(
            2,
            snap((r + 1.0, 0.0), (0.0, 0.0), 0.0),
            EntrySource::Beacon,
        )
        .unwrap();
        assert_eq!(t.purge_out_of_range(Vec2::ZERO, 0.0, r), vec![2]);
        assert!(t.contains(1));
    }

    #[test]
    fn receding_neighbor_purged_after_half_second() {
        let r = 250.0;
        let tick = 0.1;
        let mut t = NeighborTable::new(0);
        t.upsert(
            1,
            snap((r - 5.0, 0.0), (10.0, 0.0), 0.0),
            EntrySource::Beacon,
        )
        .unwrap();
        let mut purged_at = None;
        for k in 1..=20 {
            let now = k as f64 * tick;
            if !t.purge_out_of_range(Vec2::ZERO, now, r).is_empty() {
                purged_at = Some(now);
                break;
            }
        }
        // predicted distance r - 5 + 10 t exceeds r only once t > 0.5
        assert!((purged_at.unwrap() - 0.6).abs() < 1e-9);
    }

    #[test]
    fn stale_entries_time_out() {
        let mut t = NeighborTable::new(0);
        t.upsert(1, snap((0.0, 0.0), (0.0, 0.0), 0.0), EntrySource::Beacon)
            .unwrap();
        t.upsert(2, snap((0.0, 0.0), (0.0, 0.0), 2.0), EntrySource::Beacon)
            .unwrap();
        assert!(t.purge_stale(3.0, 3.0).is_empty());
        assert_eq!(t.purge_stale(3.5, 3.0), vec![1]);
    }

    #[test]
    fn unknown_ratio_definition() {
        let truth = set(&[1, 2, 3]);
        assert!(
            (unknown_neighbor_ratio(&table_with(0, &[1, 2]), &truth) - 1.0 / 3.0).abs() < 1e-12
        );
        assert_eq!(
            unknown_neighbor_ratio(&table_with(0, &[1, 2, 3, 4]), &truth),
            0.0
        );
        assert_eq!(unknown_neighbor_ratio(&table_with(0, &[1]), &set(&[])), 0.0);
    }

    #[test]
    fn false_ratio_definition() {
        let truth = set(&[1, 2, 3]);
        assert!(
            (false_neighbor_ratio(&table_with(0, &[1, 2, 4]), &truth) - 1.0 / 3.0).abs() < 1e-12
        );
        assert_eq!(false_neighbor_ratio(&table_with(0, &[1, 2]), &truth), 0.0);
        assert_eq!(false_neighbor_ratio(&table_with(0, &[5]), &set(&[])), 0.0);
    }

    #[test]
    fn two_instant_scenario() {
        // X at the origin with R = 100. At t, C and D are neighbors and A, B
        // are outside. At t + dt, A and B have moved in without beaconing and
        // C and D have moved out while still listed.
        let (x, a, b, c, d) = (0, 1, 2, 3, 4);
        let r = 100.0;
        let at_t = [
            (a, (150.0, 0.0)),
            (b, (0.0, -160.0)),
            (c, (50.0, 50.0)),
            (d, (-60.0, 0.0)),
        ];
        let at_t_dt = [
            (a, (90.0, 0.0)),
            (b, (0.0, -70.0)),
            (c, (120.0, 90.0)),
            (d, (-130.0, 0.0)),
        ];
        let truth_at = |pos: &[(NodeId, (f64, f64))]| -> BTreeSet<NodeId> {
            pos.iter()
                .filter(|(_, p)| Vec2::from(*p).norm() <= r)
                .map(|(id, _)| *id)
                .collect()
        };
        let table = table_with(x, &[c, d]);
        let before = AccuracyCounts::measure(&table, &truth_at(&at_t));
        assert_eq!((before.unknown, before.false_), (0, 0));
        let after = AccuracyCounts::measure(&table, &truth_at(&at_t_dt));
        assert_eq!(after.unknown, 2);
        assert_eq!(after.false_, 2);
        assert_eq!(after.unknown_ratio(), 1.0);
        assert_eq!(after.false_ratio(), 1.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ratios_bounded(table_ids in proptest::collection::btree_set(1usize..30, 0..20),
                              truth in proptest::collection::btree_set(1usize..30, 0..20)) {
                let ids: Vec<NodeId> = table_ids.into_iter().collect();
                let t = table_with(0, &ids);
                let u = unknown_neighbor_ratio(&t, &truth);
                let f = false_neighbor_ratio(&t, &truth);
                prop_assert!((0.0..=1.0).contains(&u));
                prop_assert!((0.0..=1.0).contains(&f));
            }
        }
    }
}
