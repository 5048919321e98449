//! Reachability, packet delivery and per-operation energy accounting.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::engine::config::{RadioKind, ScenarioConfig};
use crate::engine::rng::SimRng;
use crate::error::{Result, SimError};
use crate::geom::Vec2;
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioModel {
    pub kind: RadioKind,
    pub range: f64,
    pub loss_probability: f64,
}

impl RadioModel {
    pub fn unit_disk(range: f64) -> Self {
        RadioModel {
            kind: RadioKind::UnitDisk,
            range,
            loss_probability: 0.0,
        }
    }

    pub fn lossy_disk(range: f64, loss_probability: f64) -> Self {
        RadioModel {
            kind: RadioKind::LossyDisk,
            range,
            loss_probability,
        }
    }

    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        match cfg.perturbations.radio_model {
            RadioKind::UnitDisk => Self::unit_disk(cfg.radio_range),
            RadioKind::LossyDisk => {
                Self::lossy_disk(cfg.radio_range, cfg.perturbations.loss_probability)
            }
        }
    }
}

/// Geometric reachability: closed disk of radius `range`.
pub fn in_range(p: Vec2, q: Vec2, model: &RadioModel) -> bool {
    p.distance(q) <= model.range
}

/// Energy accounting classes, one per row of the per-operation cost table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpClass {
    P2pSend,
    BroadcastSend,
    P2pRecv,
    BroadcastRecv,
    PromiscuousRecv,
    PromiscuousDiscard,
}

impl OpClass {
    pub const ALL: [OpClass; 6] = [
        OpClass::P2pSend,
        OpClass::BroadcastSend,
        OpClass::P2pRecv,
        OpClass::BroadcastRecv,
        OpClass::PromiscuousRecv,
        OpClass::PromiscuousDiscard,
    ];

    /// `(μW·s per byte, fixed μW·s)`.
    pub const fn coefficients(self) -> (f64, f64) {
        match self {
            OpClass::P2pSend => (0.48, 431.0),
            OpClass::BroadcastSend => (2.1, 272.0),
            OpClass::P2pRecv => (0.12, 316.0),
            OpClass::BroadcastRecv => (0.26, 50.0),
            OpClass::PromiscuousRecv => (0.12, 83.0),
            OpClass::PromiscuousDiscard => (0.11, 54.0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OpClass::P2pSend => "p2p-send",
            OpClass::BroadcastSend => "broadcast-send",
            OpClass::P2pRecv => "p2p-recv",
            OpClass::BroadcastRecv => "broadcast-recv",
            OpClass::PromiscuousRecv => "promiscuous-recv",
            OpClass::PromiscuousDiscard => "promiscuous-discard",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for OpClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OpClass {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        OpClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| SimError::UnknownOpClass(s.to_owned()))
    }
}

/// Energy in μW·s for one operation on a packet of `size` bytes.
pub fn energy_cost(class: OpClass, size: u32) -> f64 {
    let (per_byte, fixed) = class.coefficients();
    per_byte * f64::from(size) + fixed
}

/// [`energy_cost`] keyed by class name, e.g. `"broadcast-send"`.
pub fn energy_cost_named(class: &str, size: u32) -> Result<f64> {
    Ok(energy_cost(class.parse()?, size))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyAccumulator {
    pub operations: u64,
    pub bytes: u64,
    /// Running sum of per-operation costs.
    pub micro_joules: f64,
}

impl EnergyAccumulator {
    /// Closed-form total from the operation and byte counts.
    pub fn recomputed(&self, class: OpClass) -> f64 {
        let (per_byte, fixed) = class.coefficients();
        per_byte * self.bytes as f64 + fixed * self.operations as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    nodes: Vec<[EnergyAccumulator; 6]>,
}

impl EnergyLedger {
    pub fn new(node_count: usize) -> Self {
        EnergyLedger {
            nodes: vec![[EnergyAccumulator::default(); 6]; node_count],
        }
    }

    pub fn charge(&mut self, node: NodeId, class: OpClass, size: u32) {
        let acc = &mut self.nodes[node][class.index()];
        acc.operations += 1;
        acc.bytes += u64::from(size);
        acc.micro_joules += energy_cost(class, size);
    }

    pub fn get(&self, node: NodeId, class: OpClass) -> &EnergyAccumulator {
        &self.nodes[node][class.index()]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_total(&self, node: NodeId) -> f64 {
        self.nodes[node].iter().map(|a| a.micro_joules).sum()
    }

    pub fn class_total(&self, class: OpClass) -> f64 {
        self.nodes
            .iter()
            .map(|n| n[class.index()].micro_joules)
            .sum()
    }

    pub fn class_operations(&self, class: OpClass) -> u64 {
        self.nodes.iter().map(|n| n[class.index()].operations).sum()
    }

    pub fn total(&self) -> f64 {
        (0..self.nodes.len()).map(|n| self.node_total(n)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationErrorModel {
    /// Per-axis standard deviation, meters.
    pub sigma: f64,
}

impl LocalizationErrorModel {
    pub fn observed_position(&self, true_pos: Vec2, rng: &mut SimRng) -> Vec2 {
        if self.sigma == 0.0 {
            return true_pos;
        }
        let noise = Normal::new(0.0, self.sigma).expect("sigma validated as finite and >= 0");
        Vec2::new(
            true_pos.x + noise.sample(rng),
            true_pos.y + noise.sample(rng),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnicastOutcome {
    Delivered,
    FailedAfterRetries,
}

/// Result of a single unicast transmission attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attempt {
    pub delivered: bool,
    /// In-range nodes other than the addressee that picked up the frame.
    pub overhearers: Vec<NodeId>,
}

/// The shared medium: reachability with optional loss, plus the energy ledger.
#[derive(Debug, Clone)]
pub struct Radio {
    pub model: RadioModel,
    pub ledger: EnergyLedger,
    rng: SimRng,
}

impl Radio {
    pub fn new(model: RadioModel, node_count: usize, rng: SimRng) -> Self {
        Radio {
            model,
            ledger: EnergyLedger::new(node_count),
            rng,
        }
    }

    fn receives(&mut self, from: Vec2, to: Vec2) -> bool {
        if !in_range(from, to, &self.model) {
            return false;
        }
        match self.model.kind {
            RadioKind::UnitDisk => true,
            RadioKind::LossyDisk => !self.rng.random_bool(self.model.loss_probability),
        }
    }

    /// Broadcast from `sender` given everyone's current true position.
    /// Charges one broadcast-send plus one broadcast-recv per receiver.
    pub fn deliver_broadcast(
        &mut self,
        sender: NodeId,
        size: u32,
        positions: &[Vec2],
    ) -> Vec<NodeId> {
        self.ledger.charge(sender, OpClass::BroadcastSend, size);
        let from = positions[sender];
        let mut receivers = Vec::new();
        for (id, &pos) in positions.iter().enumerate() {
            if id != sender && self.receives(from, pos) {
                self.ledger.charge(id, OpClass::BroadcastRecv, size);
                receivers.push(id);
            }
        }
        receivers
    }

    /// One unicast transmission. The sender pays a p2p-send, the addressee a
    /// p2p-recv if the frame gets through, and every other node that hears it
    /// pays `overhear_class`.
    pub fn unicast_attempt(
        &mut self,
        sender: NodeId,
        receiver: NodeId,
        size: u32,
        positions: &[Vec2],
        overhear_class: OpClass,
    ) -> Attempt {
        self.ledger.charge(sender, OpClass::P2pSend, size);
        let from = positions[sender];
        let mut delivered = false;
        let mut overhearers = Vec::new();
        for (id, &pos) in positions.iter().enumerate() {
            if id == sender || !self.receives(from, pos) {
                continue;
            }
            if id == receiver {
                self.ledger.charge(id, OpClass::P2pRecv, size);
                delivered = true;
            } else {
                self.ledger.charge(id, overhear_class, size);
                overhearers.push(id);
            }
        }
        Attempt {
            delivered,
            overhearers,
        }
    }

    /// Up to `retry_limit` back-to-back attempts against fixed positions.
    /// Returns the outcome and the number of attempts made.
    pub fn send_unicast(
        &mut self,
        sender: NodeId,
        receiver: NodeId,
        size: u32,
        positions: &[Vec2],
        retry_limit: u32,
        overhear_class: OpClass,
    ) -> (UnicastOutcome, u32) {
        for attempt in 1..=retry_limit {
            if self
                .unicast_attempt(sender, receiver, size, positions, overhear_class)
                .delivered
            {
                return (UnicastOutcome::Delivered, attempt);
            }
        }
        (UnicastOutcome::FailedAfterRetries, retry_limit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::rng::{stream, Stream};

    fn radio(model: RadioModel, n: usize) -> Radio {
        Radio::new(model, n, stream(3, Stream::Radio, 0))
    }

    #[test]
    fn range_boundary_is_closed() {
        let m = RadioModel::unit_disk(250.0);
        let o = Vec2::ZERO;
        assert!(in_range(o, o, &m));
        assert!(in_range(o, Vec2::new(250.0, 0.0), &m));
        assert!(in_range(o, Vec2::new(150.0, 200.0), &m));
        assert!(!in_range(o, Vec2::new(250.0 + 1e-9, 0.0), &m));
    }

    #[test]
    fn table_rows() {
        assert_eq!(energy_cost(OpClass::BroadcastSend, 100), 482.0);
        assert_eq!(energy_cost(OpClass::P2pSend, 0), 431.0);
        assert_eq!(energy_cost(OpClass::PromiscuousDiscard, 100), 65.0);
        assert_eq!(energy_cost_named("broadcast-recv", 100).unwrap(), 76.0);
        assert!(matches!(
            energy_cost_named("teleport", 1),
            Err(SimError::UnknownOpClass(_))
        ));
    }

    #[test]
    fn lonely_broadcast_still_costs() {
        let mut r = radio(RadioModel::unit_disk(100.0), 1);
        assert!(r.deliver_broadcast(0, 32, &[Vec2::ZERO]).is_empty());
        assert_eq!(r.ledger.get(0, OpClass::BroadcastSend).operations, 1);
        assert_eq!(r.ledger.total(), energy_cost(OpClass::BroadcastSend, 32));
    }

    #[test]
    fn broadcast_reaches_everyone_in_range() {
        let mut r = radio(RadioModel::unit_disk(100.0), 5);
        let pos = [
            Vec2::new(0.0, 0.0),
            Vec2::new(50.0, 0.0),
            Vec2::new(0.0, 100.0),
            Vec2::new(-70.0, 70.0),
            Vec2::new(300.0, 0.0),
        ];
        assert_eq!(r.deliver_broadcast(0, 32, &pos), vec![1, 2, 3]);
        assert_eq!(r.ledger.class_operations(OpClass::BroadcastRecv), 3);
    }

    #[test]
    fn total_loss_silences_broadcast() {
        let mut r = radio(RadioModel::lossy_disk(100.0, 1.0), 3);
        let pos = [Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)];
        for _ in 0..50 {
            assert!(r.deliver_broadcast(0, 32, &pos).is_empty());
        }
    }

    #[test]
    fn unicast_in_range_delivers_first_try() {
        let mut r = radio(RadioModel::unit_disk(100.0), 3);
        let pos = [Vec2::ZERO, Vec2::new(80.0, 0.0), Vec2::new(0.0, 60.0)];
        let out = r.send_unicast(0, 1, 512, &pos, 4, OpClass::PromiscuousRecv);
        assert_eq!(out, (UnicastOutcome::Delivered, 1));
        assert_eq!(r.ledger.get(0, OpClass::P2pSend).operations, 1);
        assert_eq!(r.ledger.get(1, OpClass::P2pRecv).operations, 1);
        // the bystander overhears rather than receives
        assert_eq!(r.ledger.get(2, OpClass::PromiscuousRecv).operations, 1);
        assert_eq!(r.ledger.get(2, OpClass::P2pRecv).operations, 0);
    }

    #[test]
    fn unicast_to_departed_neighbor_exhausts_retries() {
        let mut r = radio(RadioModel::unit_disk(100.0), 3);
        let pos = [Vec2::ZERO, Vec2::new(180.0, 0.0), Vec2::new(0.0, 60.0)];
        let out = r.send_unicast(0, 1, 512, &pos, 4, OpClass::PromiscuousDiscard);
        assert_eq!(out, (UnicastOutcome::FailedAfterRetries, 4));
        assert_eq!(r.ledger.get(0, OpClass::P2pSend).operations, 4);
        assert_eq!(r.ledger.get(1, OpClass::P2pRecv).operations, 0);
        assert_eq!(r.ledger.get(2, OpClass::PromiscuousDiscard).operations, 4);
    }

    #[test]
    fn ledger_sums_match_closed_form() {
        let mut r = radio(RadioModel::lossy_disk(120.0, 0.3), 6);
        let pos: Vec<Vec2> = (0..6).map(|i| Vec2::new(40.0 * i as f64, 0.0)).collect();
        for i in 0..200 {
            let s = i % 6;
            r.deliver_broadcast(s, 32, &pos);
            r.unicast_attempt(s, (s + 1) % 6, 512, &pos, OpClass::PromiscuousRecv);
        }
        for n in 0..6 {
            for c in OpClass::ALL {
                let acc = r.ledger.get(n, c);
                assert!(
                    (acc.micro_joules - acc.recomputed(c)).abs() < 1e-6 * (1.0 + acc.micro_joules)
                );
            }
        }
    }

    #[test]
    fn zero_sigma_is_exact() {
        let mut rng = stream(1, Stream::Localization, 0);
        let loc = LocalizationErrorModel { sigma: 0.0 };
        let p = Vec2::new(12.5, 99.0);
        assert_eq!(loc.observed_position(p, &mut rng), p);
    }

    #[test]
    fn localization_noise_statistics() {
        let mut rng = stream(1, Stream::Localization, 0);
        let loc = LocalizationErrorModel { sigma: 10.0 };
        let truth = Vec2::new(500.0, 300.0);
        let n = 100_000;
        let (mut sx, mut sy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let p = loc.observed_position(truth, &mut rng);
            let (dx, dy) = (p.x - truth.x, p.y - truth.y);
            sx += dx;
            sy += dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
        let nf = n as f64;
        let (mx, my) = (sx / nf, sy / nf);
        let std_x = (sxx / nf - mx * mx).sqrt();
        let std_y = (syy / nf - my * my).sqrt();
        assert!((std_x - 10.0).abs() < 0.2, "{std_x}");
        assert!((std_y - 10.0).abs() < 0.2, "{std_y}");
        assert!(Vec2::new(mx, my).norm() < 0.2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn unit_disk_is_symmetric(ax in -1e3f64..1e3, ay in -1e3f64..1e3, bx in -1e3f64..1e3, by in -1e3f64..1e3, r in 1.0f64..500.0) {
                let m = RadioModel::unit_disk(r);
                let (a, b) = (Vec2::new(ax, ay), Vec2::new(bx, by));
                prop_assert_eq!(in_range(a, b, &m), in_range(b, a, &m));
            }

            #[test]
            fn every_in_range_node_hears_each_attempt(xs in proptest::collection::vec((0.0f64..400.0, 0.0f64..400.0), 3..12)) {
                let pos: Vec<Vec2> = xs.iter().map(|&p| p.into()).collect();
                let mut r = radio(RadioModel::unit_disk(150.0), pos.len());
                let a = r.unicast_attempt(0, 1, 100, &pos, OpClass::PromiscuousRecv);
                let expected: Vec<NodeId> = (2..pos.len()).filter(|&i| in_range(pos[0], pos[i], &r.model)).collect();
                prop_assert_eq!(a.overhearers, expected);
                prop_assert_eq!(a.delivered, in_range(pos[0], pos[1], &r.model));
            }
        }
    }
}
