//! Per-run orchestration: owns the clock, the nodes and their tables, and
//! dispatches every event kind.

use std::collections::BTreeSet;

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::beaconing::{
    db_check, mp_check, odl_check, pb_next, sb_next, Beacon, BeaconCause, BeaconState, Strategy,
};
use crate::engine::config::ScenarioConfig;
use crate::engine::rng::{self, SimRng, Stream};
use crate::engine::scheduler::Scheduler;
use crate::error::{Result, SimError};
use crate::geom::Vec2;
use crate::mobility::{KinematicSnapshot, MobileNode, RandomWaypoint};
use crate::neighbor::{AccuracyCounts, EntrySource, NeighborTable, TopologyAccuracySample};
use crate::radio::{in_range, LocalizationErrorModel, OpClass, Radio, RadioModel};
use crate::report::{FlowStats, MetricsReport};
use crate::routing::{select_next_hop, DataPacket, ForwardOutcome, Hop, MAX_HOPS};
use crate::NodeId;

#[derive(Debug, Clone)]
enum EventKind {
    Tick(u64),
    BeaconEmit {
        node: NodeId,
        cause: BeaconCause,
    },
    BeaconArrival {
        beacon: Beacon,
        receivers: Vec<NodeId>,
    },
    /// A unicast frame reaching the nodes that heard it. `addressee` is set
    /// when the intended next hop got it.
    DataArrival {
        from: NodeId,
        piggyback: KinematicSnapshot,
        overhearers: Vec<NodeId>,
        addressee: Option<(NodeId, Box<DataPacket>)>,
    },
    PacketGeneration {
        flow: usize,
        index: u64,
    },
    MetricsSample(u64),
    WaypointChange(NodeId),
    RetransmitTimeout {
        sender: NodeId,
        next_hop: NodeId,
        attempt: u32,
        packet: Box<DataPacket>,
    },
}

impl EventKind {
    fn tag(&self) -> u8 {
        match self {
            EventKind::Tick(_) => 0,
            EventKind::BeaconEmit { .. } => 1,
            EventKind::BeaconArrival { .. } => 2,
            EventKind::DataArrival { .. } => 3,
            EventKind::PacketGeneration { .. } => 4,
            EventKind::MetricsSample(_) => 5,
            EventKind::WaypointChange(_) => 6,
            EventKind::RetransmitTimeout { .. } => 7,
        }
    }

    /// Flow of the packet this event carries, if any.
    fn packet_flow(&self) -> Option<usize> {
        match self {
            EventKind::DataArrival {
                addressee: Some((_, p)),
                ..
            } => Some(p.flow),
            EventKind::RetransmitTimeout { packet, .. } => Some(packet.flow),
            _ => None,
        }
    }
}

/// A beacon as it went out, for inspection by tests and tools.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeaconRecord {
    pub time: f64,
    pub node: NodeId,
    pub cause: BeaconCause,
}

/// A leg change of one node: `(time, node, position, velocity)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionRecord {
    pub time: f64,
    pub node: NodeId,
    pub position: Vec2,
    pub velocity: Vec2,
}

/// Record of one delivered packet.
#[derive(Debug, Clone, PartialEq)]
pub struct Delivery {
    pub packet: u64,
    pub flow: usize,
    pub dest_position: Vec2,
    pub created: f64,
    pub delivered: f64,
    pub trace: Vec<Hop>,
}

pub struct Simulation {
    cfg: ScenarioConfig,
    strategy: Strategy,
    timeout: Option<f64>,
    queue: Scheduler<EventKind>,
    nodes: Vec<MobileNode>,
    tables: Vec<NeighborTable>,
    beaconing: Vec<BeaconState>,
    radio: Radio,
    localization: LocalizationErrorModel,
    loc_rngs: Vec<SimRng>,
    flows: Vec<FlowStats>,
    accuracy: Vec<TopologyAccuracySample>,
    beacon_log: Vec<BeaconRecord>,
    motion_log: Vec<MotionRecord>,
    deliveries: Vec<Delivery>,
    forwarding_ops: u64,
    unicast_attempts: u64,
    retry_failures: u64,
    events_processed: u64,
    next_packet: u64,
    event_hash: Sha256,
    traffic_hash: Sha256,
}

/// Simulate `cfg` over `[0, duration)` and return the run's metrics.
pub fn run(cfg: &ScenarioConfig) -> Result<MetricsReport> {
    let mut sim = Simulation::new(cfg.clone())?;
    sim.run_to_end()?;
    Ok(sim.finish())
}

impl Simulation {
    pub fn new(cfg: ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.node_count;
        let seed = cfg.seed;
        let area = Vec2::new(cfg.area_a, cfg.area_b);

        let nodes: Vec<MobileNode> = (0..n)
            .map(|i| {
                let r = rng::stream(seed, Stream::Mobility, i as u64);
                if let Some(spec) = cfg.nodes.get(i) {
                    MobileNode::scripted(spec.position.into(), &spec.waypoints, area, r)
                } else if cfg.is_static() {
                    let mut r = r;
                    let rwp = RandomWaypoint::from_config(&cfg);
                    MobileNode::fixed(rwp.random_point(&mut r), area, r)
                } else {
                    MobileNode::random(RandomWaypoint::from_config(&cfg), r)
                }
            })
            .collect();

        let mut sim = Simulation {
            strategy: Strategy::from_config(&cfg),
            timeout: cfg.neighbor_timeout(),
            queue: Scheduler::new(),
            tables: (0..n).map(NeighborTable::new).collect(),
            beaconing: vec![BeaconState::default(); n],
            radio: Radio::new(
                RadioModel::from_config(&cfg),
                n,
                rng::stream(seed, Stream::Radio, 0),
            ),
            localization: LocalizationErrorModel {
                sigma: cfg.perturbations.localization_sigma,
            },
            loc_rngs: (0..n)
                .map(|i| rng::stream(seed, Stream::Localization, i as u64))
                .collect(),
            flows: Vec::new(),
            accuracy: Vec::new(),
            beacon_log: Vec::new(),
            motion_log: Vec::new(),
            deliveries: Vec::new(),
            forwarding_ops: 0,
            unicast_attempts: 0,
            retry_failures: 0,
            events_processed: 0,
            next_packet: 0,
            event_hash: Sha256::new(),
            traffic_hash: Sha256::new(),
            nodes,
            cfg,
        };
        sim.bootstrap()?;
        Ok(sim)
    }

    fn bootstrap(&mut self) -> Result<()> {
        let n = self.cfg.node_count;
        for id in 0..n {
            self.log_motion(id, 0.0);
        }
        for id in 0..n {
            self.queue.schedule(
                0.0,
                EventKind::BeaconEmit {
                    node: id,
                    cause: BeaconCause::Initial,
                },
            )?;
        }
        for id in 0..n {
            self.schedule_transition(id)?;
        }
        self.setup_flows()?;
        self.schedule_if_before_end(self.cfg.tick_interval, EventKind::Tick(1))?;
        self.schedule_if_before_end(
            self.cfg.metrics_sample_interval,
            EventKind::MetricsSample(1),
        )?;
        Ok(())
    }

    fn setup_flows(&mut self) -> Result<()> {
        let cfg = &self.cfg;
        let mut traffic = rng::stream(cfg.seed, Stream::Traffic, 0);
        let pairs: Vec<(NodeId, NodeId, Option<f64>)> = if cfg.flows.is_empty() {
            let mut chosen = BTreeSet::new();
            let mut pairs = Vec::with_capacity(cfg.flow_count);
            while pairs.len() < cfg.flow_count {
                let src = traffic.random_range(0..cfg.node_count);
                let dst = traffic.random_range(0..cfg.node_count);
                if src != dst && chosen.insert((src, dst)) {
                    pairs.push((src, dst, None));
                }
            }
            pairs
        } else {
            cfg.flows.iter().map(|f| (f.src, f.dst, f.start)).collect()
        };

        let rate = cfg.packet_rate;
        let traffic_start = cfg.traffic_start;
        for (i, (src, dst, start)) in pairs.into_iter().enumerate() {
            let start = match start {
                Some(s) => s,
                None if rate > 0.0 => traffic_start + traffic.random_range(0.0..1.0) / rate,
                None => traffic_start,
            };
            self.traffic_hash.update((src as u64).to_le_bytes());
            self.traffic_hash.update((dst as u64).to_le_bytes());
            self.traffic_hash.update(start.to_le_bytes());
            self.flows.push(FlowStats {
                src,
                dst,
                start,
                ..Default::default()
            });
            if rate > 0.0 {
                self.schedule_if_before_end(
                    start,
                    EventKind::PacketGeneration { flow: i, index: 0 },
                )?;
            }
        }
        Ok(())
    }

    fn schedule_if_before_end(&mut self, t: f64, kind: EventKind) -> Result<()> {
        if t < self.cfg.duration {
            self.queue.schedule(t, kind)?;
        }
        Ok(())
    }

    fn schedule_transition(&mut self, id: NodeId) -> Result<()> {
        if let Some(t) = self.nodes[id].next_transition() {
            self.schedule_if_before_end(t, EventKind::WaypointChange(id))?;
        }
        Ok(())
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn now(&self) -> f64 {
        self.queue.now()
    }

    pub fn table(&self, id: NodeId) -> &NeighborTable {
        &self.tables[id]
    }

    /// Mutable access for constructing scenarios (e.g. pre-seeding or
    /// forgetting links).
    pub fn table_mut(&mut self, id: NodeId) -> &mut NeighborTable {
        &mut self.tables[id]
    }

    pub fn true_position(&self, id: NodeId, now: f64) -> Result<Vec2> {
        self.nodes
            .get(id)
            .map(|n| n.position_at(now))
            .ok_or(SimError::UnknownNode(id))
    }

    pub fn beacon_log(&self) -> &[BeaconRecord] {
        &self.beacon_log
    }

    pub fn motion_log(&self) -> &[MotionRecord] {
        &self.motion_log
    }

    pub fn deliveries(&self) -> &[Delivery] {
        &self.deliveries
    }

    pub fn energy(&self) -> &crate::radio::EnergyLedger {
        &self.radio.ledger
    }

    pub fn flows(&self) -> &[FlowStats] {
        &self.flows
    }

    /// Process every event with fire time `<= t` (and before the end of the run).
    pub fn run_until(&mut self, t: f64) -> Result<()> {
        let end = self.cfg.duration;
        while let Some(next) = self.queue.peek_time() {
            if next > t || next >= end {
                break;
            }
            let event = self.queue.pop().expect("peeked event exists");
            self.event_hash.update(event.fire_time.to_le_bytes());
            self.event_hash.update(event.sequence.to_le_bytes());
            self.event_hash.update([event.kind.tag()]);
            self.events_processed += 1;
            self.dispatch(event.kind)?;
        }
        self.queue.advance_to(t.min(end));
        Ok(())
    }

    pub fn run_to_end(&mut self) -> Result<()> {
        self.run_until(self.cfg.duration)
    }

    fn dispatch(&mut self, kind: EventKind) -> Result<()> {
        match kind {
            EventKind::Tick(k) => self.on_tick(k),
            EventKind::BeaconEmit { node, cause } => self.on_beacon_emit(node, cause),
            EventKind::BeaconArrival { beacon, receivers } => {
                for r in receivers {
                    self.tables[r].upsert(beacon.sender, beacon.snapshot(), EntrySource::Beacon)?;
                }
                Ok(())
            }
            EventKind::DataArrival {
                from,
                piggyback,
                overhearers,
                addressee,
            } => self.on_data_arrival(from, piggyback, overhearers, addressee),
            EventKind::PacketGeneration { flow, index } => self.on_packet_generation(flow, index),
            EventKind::MetricsSample(k) => self.on_metrics_sample(k),
            EventKind::WaypointChange(id) => self.on_waypoint_change(id),
            EventKind::RetransmitTimeout {
                sender,
                next_hop,
                attempt,
                packet,
            } => self.on_retransmit_timeout(sender, next_hop, attempt, *packet),
        }
    }

    fn positions(&self, now: f64) -> Vec<Vec2> {
        self.nodes.iter().map(|n| n.position_at(now)).collect()
    }

    fn observed_position(&mut self, id: NodeId, now: f64) -> Vec2 {
        let truth = self.nodes[id].position_at(now);
        self.localization
            .observed_position(truth, &mut self.loc_rngs[id])
    }

    fn log_motion(&mut self, id: NodeId, t: f64) {
        let rec = MotionRecord {
            time: t,
            node: id,
            position: self.nodes[id].position_at(t),
            velocity: self.nodes[id].velocity(),
        };
        self.motion_log.push(rec);
    }

    // ---- ticks: purge, then strategy self-checks -------------------------

    fn on_tick(&mut self, k: u64) -> Result<()> {
        let now = self.now();
        let range = self.cfg.radio_range;
        for id in 0..self.nodes.len() {
            let observed = self.observed_position(id, now);
            self.tables[id].purge_out_of_range(observed, now, range);
            if let Some(timeout) = self.timeout {
                self.tables[id].purge_stale(now, timeout);
            }
            match self.strategy {
                Strategy::Adaptive { aer } => {
                    if mp_check(&self.beaconing[id], observed, now, aer)? {
                        self.emit_beacon(id, BeaconCause::Mp, observed)?;
                    }
                }
                Strategy::Distance { threshold } => {
                    let truth = self.nodes[id].position_at(now);
                    if db_check(&mut self.beaconing[id], truth, threshold) {
                        self.emit_beacon(id, BeaconCause::Distance, observed)?;
                    }
                }
                Strategy::Periodic { .. } | Strategy::Speed(_) => {}
            }
        }
        self.schedule_if_before_end(
            (k + 1) as f64 * self.cfg.tick_interval,
            EventKind::Tick(k + 1),
        )
    }

    // ---- beacons ----------------------------------------------------------

    fn on_beacon_emit(&mut self, id: NodeId, cause: BeaconCause) -> Result<()> {
        let now = self.now();
        let observed = self.observed_position(id, now);
        let cause = match (cause, self.strategy) {
            (BeaconCause::Odl, Strategy::Adaptive { aer }) => {
                self.beaconing[id].odl_queued = false;
                // A simultaneous MP condition takes the attribution.
                if mp_check(&self.beaconing[id], observed, now, aer)? {
                    BeaconCause::Mp
                } else {
                    BeaconCause::Odl
                }
            }
            (c, _) => c,
        };
        self.emit_beacon(id, cause, observed)
    }

    fn emit_beacon(&mut self, id: NodeId, cause: BeaconCause, observed: Vec2) -> Result<()> {
        debug_assert!(self.strategy.allows(cause));
        let now = self.now();
        let beacon = Beacon {
            sender: id,
            position: observed,
            velocity: self.nodes[id].velocity(),
            timestamp: now,
            cause,
            size: self.cfg.beacon_size,
        };
        self.beaconing[id].record(&beacon);
        self.beacon_log.push(BeaconRecord {
            time: now,
            node: id,
            cause,
        });

        let positions = self.positions(now);
        let receivers = self.radio.deliver_broadcast(id, beacon.size, &positions);
        let latency = self.cfg.mac.broadcast_latency(beacon.size);
        if !receivers.is_empty() {
            self.queue.schedule(
                now + latency,
                EventKind::BeaconArrival { beacon, receivers },
            )?;
        }

        match self.strategy {
            Strategy::Periodic { interval }
                if matches!(cause, BeaconCause::Initial | BeaconCause::Periodic) =>
            {
                let state = &mut self.beaconing[id];
                state.periodic_emitted += 1;
                let next = pb_next(interval, state.periodic_emitted);
                self.schedule_if_before_end(
                    next,
                    EventKind::BeaconEmit {
                        node: id,
                        cause: BeaconCause::Periodic,
                    },
                )?;
            }
            Strategy::Speed(mapping) => {
                let next = sb_next(&mapping, self.nodes[id].speed(), now);
                self.schedule_speed_beacon(id, next)?;
            }
            _ => {}
        }
        Ok(())
    }

    fn schedule_speed_beacon(&mut self, id: NodeId, at: f64) -> Result<()> {
        if let Some(h) = self.beaconing[id].pending.take() {
            self.queue.cancel(h);
        }
        if at < self.cfg.duration {
            let h = self.queue.schedule(
                at,
                EventKind::BeaconEmit {
                    node: id,
                    cause: BeaconCause::Speed,
                },
            )?;
            self.beaconing[id].pending = Some(h);
        }
        Ok(())
    }

    // ---- mobility ---------------------------------------------------------

    fn on_waypoint_change(&mut self, id: NodeId) -> Result<()> {
        let now = self.now();
        self.nodes[id].transition(now);
        self.log_motion(id, now);
        self.schedule_transition(id)?;
        if let Strategy::Speed(mapping) = self.strategy {
            if let Some(last) = self.beaconing[id].last_beacon_time() {
                let next = sb_next(&mapping, self.nodes[id].speed(), last).max(now);
                self.schedule_speed_beacon(id, next)?;
            }
        }
        Ok(())
    }

    // ---- traffic ----------------------------------------------------------

    fn on_packet_generation(&mut self, flow: usize, index: u64) -> Result<()> {
        let now = self.now();
        self.traffic_hash.update((flow as u64).to_le_bytes());
        self.traffic_hash.update(now.to_le_bytes());
        let (src, dst) = (self.flows[flow].src, self.flows[flow].dst);
        self.flows[flow].generated += 1;
        let packet = DataPacket {
            id: self.next_packet,
            flow,
            source: src,
            destination: dst,
            dest_position: self.nodes[dst].position_at(now),
            size: self.cfg.packet_size,
            piggyback: KinematicSnapshot {
                position: Vec2::ZERO,
                velocity: Vec2::ZERO,
                timestamp: now,
            },
            created: now,
            trace: Vec::new(),
        };
        self.next_packet += 1;
        self.forward(src, packet, false)?;

        let start = self.flows[flow].start;
        let next = start + (index + 1) as f64 / self.cfg.packet_rate;
        self.schedule_if_before_end(
            next,
            EventKind::PacketGeneration {
                flow,
                index: index + 1,
            },
        )
    }

    /// Handle a packet held by `node`: deliver it, hand it to the greedy next
    /// hop, or drop it. `after_failure` marks a reselection following an
    /// exhausted retry cycle.
    pub(crate) fn forward(
        &mut self,
        node: NodeId,
        packet: DataPacket,
        after_failure: bool,
    ) -> Result<ForwardOutcome> {
        let now = self.now();
        let flow = packet.flow;
        if node == packet.destination {
            let stats = &mut self.flows[flow];
            stats.delivered += 1;
            stats.total_delay += now - packet.created;
            stats.total_hops += packet.hop_count() as u64;
            self.deliveries.push(Delivery {
                packet: packet.id,
                flow,
                dest_position: packet.dest_position,
                created: packet.created,
                delivered: now,
                trace: packet.trace,
            });
            return Ok(ForwardOutcome::Delivered);
        }
        let observed = self.observed_position(node, now);
        let next = if packet.hop_count() >= MAX_HOPS {
            None
        } else {
            select_next_hop(&self.tables[node], observed, packet.dest_position, now)
        };
        match next {
            Some(next_hop) => {
                self.forwarding_ops += 1;
                self.attempt(node, next_hop, 1, packet, observed)?;
                Ok(ForwardOutcome::Forwarded)
            }
            None if after_failure => {
                self.flows[flow].dropped_retries += 1;
                Ok(ForwardOutcome::DroppedRetries)
            }
            None => {
                self.flows[flow].dropped_void += 1;
                Ok(ForwardOutcome::DroppedVoid)
            }
        }
    }

    fn attempt(
        &mut self,
        sender: NodeId,
        next_hop: NodeId,
        attempt: u32,
        mut packet: DataPacket,
        observed: Vec2,
    ) -> Result<()> {
        let now = self.now();
        packet.piggyback = KinematicSnapshot {
            position: observed,
            velocity: self.nodes[sender].velocity(),
            timestamp: now,
        };
        let overhear_class = if self.strategy.uses_piggyback() {
            OpClass::PromiscuousRecv
        } else {
            OpClass::PromiscuousDiscard
        };
        let positions = self.positions(now);
        let outcome =
            self.radio
                .unicast_attempt(sender, next_hop, packet.size, &positions, overhear_class);
        self.unicast_attempts += 1;
        let arrival = now + self.cfg.mac.unicast_latency(packet.size);
        let piggyback = packet.piggyback;
        let listeners = if self.strategy.uses_piggyback() {
            outcome.overhearers
        } else {
            Vec::new()
        };

        if outcome.delivered {
            packet.trace.push(Hop {
                node: sender,
                position: observed,
                time: now,
            });
            self.queue.schedule(
                arrival,
                EventKind::DataArrival {
                    from: sender,
                    piggyback,
                    overhearers: listeners,
                    addressee: Some((next_hop, Box::new(packet))),
                },
            )?;
        } else {
            if !listeners.is_empty() {
                self.queue.schedule(
                    arrival,
                    EventKind::DataArrival {
                        from: sender,
                        piggyback,
                        overhearers: listeners,
                        addressee: None,
                    },
                )?;
            }
            self.queue.schedule(
                arrival,
                EventKind::RetransmitTimeout {
                    sender,
                    next_hop,
                    attempt,
                    packet: Box::new(packet),
                },
            )?;
        }
        Ok(())
    }

    fn on_retransmit_timeout(
        &mut self,
        sender: NodeId,
        next_hop: NodeId,
        attempt: u32,
        packet: DataPacket,
    ) -> Result<()> {
        if attempt < self.cfg.mac.retry_limit {
            let observed = self.observed_position(sender, self.now());
            return self.attempt(sender, next_hop, attempt + 1, packet, observed);
        }
        // The MAC gave up: treat the next hop as a false neighbor.
        self.retry_failures += 1;
        self.tables[sender].remove(next_hop);
        self.forward(sender, packet, true).map(|_| ())
    }

    fn on_data_arrival(
        &mut self,
        from: NodeId,
        piggyback: KinematicSnapshot,
        overhearers: Vec<NodeId>,
        addressee: Option<(NodeId, Box<DataPacket>)>,
    ) -> Result<()> {
        let learns = self.strategy.uses_piggyback();
        if learns {
            for o in overhearers {
                self.learn_from_data(o, from, piggyback)?;
            }
        }
        if let Some((to, packet)) = addressee {
            if learns {
                self.learn_from_data(to, from, piggyback)?;
            }
            self.forward(to, *packet, false)?;
        }
        Ok(())
    }

    /// Piggyback processing; a new transmitter triggers an ODL beacon.
    fn learn_from_data(
        &mut self,
        listener: NodeId,
        transmitter: NodeId,
        piggyback: KinematicSnapshot,
    ) -> Result<()> {
        let is_new = odl_check(&mut self.tables[listener], transmitter, piggyback)?;
        if is_new && !self.beaconing[listener].odl_queued {
            self.beaconing[listener].odl_queued = true;
            let now = self.now();
            self.queue.schedule(
                now,
                EventKind::BeaconEmit {
                    node: listener,
                    cause: BeaconCause::Odl,
                },
            )?;
        }
        Ok(())
    }

    // ---- metrics ----------------------------------------------------------

    /// Accuracy of every node's table against ground truth right now.
    pub fn accuracy_counts(&self) -> Vec<AccuracyCounts> {
        let now = self.now();
        let positions = self.positions(now);
        let model = &self.radio.model;
        (0..positions.len())
            .map(|i| {
                let truth: BTreeSet<NodeId> = (0..positions.len())
                    .filter(|&j| j != i && in_range(positions[i], positions[j], model))
                    .collect();
                AccuracyCounts::measure(&self.tables[i], &truth)
            })
            .collect()
    }

    fn on_metrics_sample(&mut self, k: u64) -> Result<()> {
        let sample = TopologyAccuracySample::aggregate(self.now(), &self.accuracy_counts());
        self.accuracy.push(sample);
        self.schedule_if_before_end(
            (k + 1) as f64 * self.cfg.metrics_sample_interval,
            EventKind::MetricsSample(k + 1),
        )
    }

    /// Close the run and assemble its report. Packets still held in queued
    /// events are counted as in flight.
    pub fn finish(mut self) -> MetricsReport {
        for event in self.queue.pending() {
            if let Some(flow) = event.kind.packet_flow() {
                self.flows[flow].in_flight += 1;
            }
        }
        let mut mobility = Sha256::new();
        for m in &self.motion_log {
            mobility.update(m.time.to_le_bytes());
            mobility.update((m.node as u64).to_le_bytes());
            for v in [m.position.x, m.position.y, m.velocity.x, m.velocity.y] {
                mobility.update(v.to_le_bytes());
            }
        }
        let mut totals = crate::beaconing::BeaconCounts::default();
        for b in &self.beaconing {
            totals.merge(&b.counts);
        }
        MetricsReport {
            strategy: self.strategy.kind(),
            beacons: totals,
            beacons_per_node: self.beaconing.iter().map(|b| b.counts).collect(),
            accuracy: self.accuracy,
            flows: self.flows,
            energy: self.radio.ledger,
            forwarding_ops: self.forwarding_ops,
            unicast_attempts: self.unicast_attempts,
            retry_failures: self.retry_failures,
            events_processed: self.events_processed,
            mobility_digest: hex(&mobility.finalize()),
            traffic_digest: hex(&self.traffic_hash.finalize()),
            event_digest: hex(&self.event_hash.finalize()),
            config: self.cfg,
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes[..8].iter().map(|b| format!("{b:02x}")).collect()
}
