#![allow(dead_code)]

use beaconsim::engine::config::{FlowSpec, Leg, NodeSpec};
use beaconsim::{MetricsReport, ScenarioConfig, StrategyConfig, Vec2};

/// Overhead decomposition for APU runs: every beacon is initial, MP or ODL.
pub fn assert_apu_closure(r: &MetricsReport) {
    let b = &r.beacons;
    assert_eq!(b.initial + b.mp + b.odl, b.total(), "closure broken: {b:?}");
    for (n, c) in r.beacons_per_node.iter().enumerate() {
        assert_eq!(c.initial + c.mp + c.odl, c.total(), "node {n}: {c:?}");
    }
}

pub fn apu(aer: f64) -> StrategyConfig {
    StrategyConfig::Apu { aer: Some(aer) }
}

pub fn fixed(points: &[(f64, f64)]) -> Vec<NodeSpec> {
    points.iter().map(|&(x, y)| NodeSpec::fixed(x, y)).collect()
}

pub fn scripted(start: (f64, f64), legs: &[(f64, f64, f64)]) -> NodeSpec {
    NodeSpec {
        position: start,
        waypoints: legs.iter().map(|&(x, y, v)| Leg(x, y, v)).collect(),
    }
}

/// Scenario built from explicit nodes and flows.
pub fn explicit(nodes: Vec<NodeSpec>, flows: &[(usize, usize, f64)]) -> ScenarioConfig {
    ScenarioConfig {
        node_count: nodes.len(),
        nodes,
        flow_count: flows.len(),
        flows: flows
            .iter()
            .map(|&(src, dst, start)| FlowSpec {
                src,
                dst,
                start: Some(start),
            })
            .collect(),
        ..ScenarioConfig::default()
    }
}

/// Greedy walk over true positions with complete neighbor knowledge.
/// Returns the node sequence (excluding the destination) if the walk
/// reaches `dst`, `None` on a void.
pub fn greedy_oracle(positions: &[Vec2], range: f64, src: usize, dst: usize) -> Option<Vec<usize>> {
    let target = positions[dst];
    let mut at = src;
    let mut path = Vec::new();
    while at != dst {
        path.push(at);
        let here = positions[at].distance(target);
        let mut best: Option<(f64, usize)> = None;
        for (j, p) in positions.iter().enumerate() {
            if j == at || positions[at].distance(*p) > range {
                continue;
            }
            let d = p.distance(target);
            if d < here && best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, j));
            }
        }
        at = best?.1;
        if path.len() > positions.len() {
            return None;
        }
    }
    Some(path)
}

pub mod fig3 {
    pub const A: usize = 0;
    pub const B: usize = 1;
    pub const P: usize = 2;
    pub const C: usize = 3;
    pub const D: usize = 4;
    pub const E: usize = 5;
    pub const F: usize = 6;
    pub const FIRST_DATA: f64 = 20.0;
}

/// Path-enrichment layout: route A-B-P, with C and D beside the path in
/// range of A, B and P, and E, F hanging off C and D out of range of the
/// route. Radio range 250 m.
pub fn fig3_scenario() -> ScenarioConfig {
    let nodes = fixed(&[
        (50.0, 450.0),  // A
        (250.0, 450.0), // B
        (450.0, 450.0), // P
        (250.0, 330.0), // C
        (250.0, 570.0), // D
        (250.0, 100.0), // E
        (250.0, 800.0), // F
    ]);
    let mut cfg = explicit(nodes, &[(fig3::A, fig3::P, fig3::FIRST_DATA)]);
    cfg.duration = 25.0;
    cfg.strategy = apu(1e6);
    cfg
}

/// Forget the links A-C, A-D, B-C and B-D in both directions, as if C and D
/// had never been heard by the route nodes.
pub fn fig3_forget(sim: &mut beaconsim::Simulation) {
    use fig3::*;
    for (x, y) in [(A, C), (A, D), (B, C), (B, D)] {
        sim.table_mut(x).remove(y);
        sim.table_mut(y).remove(x);
    }
}

pub const TURN_TIME: f64 = 5.0;
pub const TURN_SPEED: f64 = 20.0;

/// One node heading east at 20 m/s that turns north after 100 m.
pub fn turn_scenario(aer: f64) -> ScenarioConfig {
    let mut cfg = explicit(
        vec![scripted(
            (100.0, 500.0),
            &[(200.0, 500.0, TURN_SPEED), (200.0, 1000.0, TURN_SPEED)],
        )],
        &[],
    );
    cfg.duration = 10.0;
    cfg.strategy = apu(aer);
    cfg
}

pub mod recovery {
    pub const SRC: usize = 0;
    pub const GONE: usize = 1;
    pub const DST: usize = 2;
    pub const ALT: usize = 3;
    pub const SEND: f64 = 12.0;
}

/// Source with two candidates toward the destination. The better one
/// (GONE) creeps for 10 s, which is what its initial beacon announces, and
/// then leaves at 100 m/s. With prediction-only purging the source keeps
/// the stale entry, so the first packet must fall back to ALT.
pub fn recovery_scenario() -> ScenarioConfig {
    let nodes = vec![
        scripted((100.0, 300.0), &[]),
        scripted(
            (320.0, 300.0),
            &[(320.0, 300.1, 0.01), (320.0, 1000.0, 100.0)],
        ),
        scripted((520.0, 300.0), &[]),
        scripted((280.0, 360.0), &[]),
    ];
    let mut cfg = explicit(nodes, &[(recovery::SRC, recovery::DST, recovery::SEND)]);
    cfg.duration = 15.0;
    cfg.packet_rate = 0.1;
    cfg.strategy = apu(1e6);
    cfg
}

/// Nodes on straight legs that last the whole run.
pub fn linear_scenario() -> ScenarioConfig {
    let legs = [
        ((100.0, 300.0), (1400.0, 300.0), 10.0),
        ((150.0, 450.0), (1400.0, 450.0), 12.0),
        ((100.0, 200.0), (1100.0, 900.0), 8.0),
        ((900.0, 500.0), (100.0, 500.0), 6.0),
        ((400.0, 100.0), (400.0, 950.0), 5.0),
        ((500.0, 400.0), (500.0, 400.0), 0.0),
    ];
    let nodes = legs
        .iter()
        .map(|&(from, (x, y), v)| {
            if v == 0.0 {
                scripted(from, &[])
            } else {
                scripted(from, &[(x, y, v)])
            }
        })
        .collect();
    let mut cfg = explicit(nodes, &[]);
    cfg.duration = 80.0;
    cfg.strategy = apu(25.0);
    cfg
}
